#include <doctest.h>

#include "cubeshuffle/operad.hpp"
#include "cubeshuffle/random.hpp"

using namespace cubeshuffle;

namespace {

Rational q(long p, long d = 1) { return Rational(p, d); }

std::vector<Cube> cubes_of(const OperadElement& e) {
  std::vector<Cube> out;
  for (Index k : e.domain().indices().members()) out.push_back(e.domain().cube(k));
  return out;
}

// brute-force substitution: for each outer cube i, the inner cubes mapped by L_{I^n, A_i}
std::vector<Cube> substitute_oracle(const OperadElement& outer, const std::vector<OperadElement>& inners) {
  std::vector<Cube> out;
  const std::size_t n = outer.dim();
  for (std::size_t i = 0; i < inners.size(); ++i) {
    const Cube a = outer.domain().cube(i + 1);
    for (const Cube& b : cubes_of(inners[i])) {
      std::vector<Interval> axes;
      for (std::size_t x = 0; x < n; ++x)
        axes.emplace_back(a.axis(x).lo() + b.axis(x).lo() * a.axis(x).length(),
                          a.axis(x).lo() + b.axis(x).hi() * a.axis(x).length());
      out.emplace_back(std::move(axes));
    }
  }
  return out;
}

OperadElement random_element(std::size_t n, Rng& rng) {
  const std::size_t arity = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  return OperadElement(random_finite_domain(n, arity, rng));
}

Permutation random_permutation(std::size_t m, Rng& rng) {
  std::vector<Index> img(m);
  for (std::size_t i = 0; i < m; ++i) img[i] = i + 1;
  std::shuffle(img.begin(), img.end(), rng);
  return Permutation(img);
}

}  // namespace

TEST_CASE("operad unit") {
  Rng rng(seed_from_env(21));
  for (int i = 0; i < 25; ++i) {
    const auto x = random_element(2, rng);
    CHECK(cubes_of(compose(OperadElement::unit(2), {x})) == cubes_of(x));
    std::vector<OperadElement> units(*x.arity(), OperadElement::unit(2));
    CHECK(cubes_of(compose(x, units)) == cubes_of(x));
  }
}

TEST_CASE("operad composition with an omega inner") {
  const auto outer = OperadElement(NDomain::finite(2, {Cube::slab(2, q(0), q(1, 2)), Cube::slab(2, q(1, 2), q(1))}));
  const auto out = compose(outer, {OperadElement::unit(2), OperadElement(standard_domain(2))});
  CHECK(out.is_omega());
  CHECK(out.domain().cube(1) == Cube::slab(2, q(0), q(1, 2)));
  CHECK(out.domain().cube(2) == Cube::slab(2, q(1, 2), q(3, 4)));
  CHECK(validate(out.domain(), 60).valid);
  CHECK_THROWS_AS(compose(outer, {OperadElement(standard_domain(2)), OperadElement(standard_domain(2))}), OperadError);
  CHECK_THROWS_AS(compose(outer, {OperadElement::unit(2)}), OperadError);
}

TEST_CASE("operad composition matches substitution and is associative") {
  Rng rng(seed_from_env(22));
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_element(2, rng);
    std::vector<OperadElement> bs;
    for (std::size_t i = 0; i < *a.arity(); ++i) bs.push_back(random_element(2, rng));
    const auto ab = compose(a, bs);
    CHECK(cubes_of(ab) == substitute_oracle(a, bs));
    CHECK(validate(ab.domain(), 64).valid);

    std::vector<OperadElement> cs;
    for (std::size_t j = 0; j < *ab.arity(); ++j) cs.push_back(random_element(2, rng));
    // pointwise: b_i composed with its own slice of cs
    std::vector<OperadElement> bcs;
    std::size_t offset = 0;
    for (const auto& b : bs) {
      std::vector<OperadElement> slice(cs.begin() + offset, cs.begin() + offset + *b.arity());
      offset += *b.arity();
      bcs.push_back(compose(b, slice));
    }
    CHECK(cubes_of(compose(ab, cs)) == cubes_of(compose(a, bcs)));
  }
}

TEST_CASE("symmetric action") {
  Rng rng(seed_from_env(23));
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = OperadElement(random_finite_domain(2, 3, rng));
    CHECK(cubes_of(symmetric_action(x, Permutation::identity(3))) == cubes_of(x));
    const auto phi = random_permutation(3, rng), psi = random_permutation(3, rng);
    // (phi psi)-action = phi-action then psi-action, from R_{(phi psi)(k)} = (phi-acted)_{psi(k)}
    CHECK(cubes_of(symmetric_action(x, phi.after(psi))) == cubes_of(symmetric_action(symmetric_action(x, phi), psi)));
  }
}

TEST_CASE("symmetric action is equivariant for composition") {
  Rng rng(seed_from_env(24));
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = OperadElement(random_finite_domain(2, 2, rng));
    const auto b1 = random_element(2, rng), b2 = random_element(2, rng);
    const Permutation sigma({2, 1});
    // compose(a . sigma; b_{sigma(1)}, b_{sigma(2)}) = compose(a; b_1, b_2) . (block swap)
    const auto left = compose(symmetric_action(a, sigma), {b2, b1});
    const std::size_t m1 = *b1.arity(), m2 = *b2.arity();
    std::vector<Index> block;
    for (std::size_t k = 1; k <= m2; ++k) block.push_back(m1 + k);
    for (std::size_t k = 1; k <= m1; ++k) block.push_back(k);
    const auto right = symmetric_action(compose(a, {b1, b2}), Permutation(block));
    CHECK(cubes_of(left) == cubes_of(right));
  }
}

TEST_CASE("action on loops") {
  const auto seq = bump_sequence(2, IndexSet::finite({1}), Decay::Constant, q(1));
  const auto unit = act_on_loops(OperadElement::unit(2), seq);
  for (long i = 0; i <= 8; ++i) {
    const Point p{q(i, 8), q(3, 8)};
    CHECK(unit(p).value == seq.loop(1)(p));
  }

  const auto outer = OperadElement(NDomain::finite(2, {Cube::slab(2, q(0), q(1, 3)), Cube::slab(2, q(1, 2), q(1))}));
  const auto inner1 = OperadElement(NDomain::finite(2, {Cube({Interval(q(1, 4), q(3, 4)), Interval(q(0), q(1, 2))})}));
  const auto inner2 = OperadElement(standard_domain(2));
  const auto composed = compose(outer, {inner1, inner2});
  const auto f = bump_sequence(2, IndexSet::naturals(), Decay::Harmonic, q(1));
  const auto direct = act_on_loops(composed, f);
  // nested: outer action on (g_1, g_2), g_1 = prod over inner1 of f_1, g_2 = prod over inner2 of f_2, f_3, ...
  const auto g1 = act_on_loops(inner1, bump_sequence(2, IndexSet::finite({1}), Decay::Harmonic, q(1)));
  for (long i = 0; i <= 16; ++i)
    for (long j = 0; j <= 16; ++j) {
      const Point p{q(i, 16), q(j, 16)};
      LoopValue expected = LoopValue::zero(1);
      for (std::size_t o = 1; o <= 2; ++o) {
        const Cube c = outer.domain().cube(o);
        if (!c.interior_contains(p)) continue;
        const Point local = canonical_affine(c, Cube::unit(2)).apply(p);
        if (o == 1) expected = g1(local).value;
        if (o == 2) {
          // inner2 carries f_2, f_3, ...: shift indices by one
          const auto hits = inner2.domain().locate(local);
          if (!hits.empty() && !on_unit_boundary(local))
            expected = f.loop(hits.front() + 1)(canonical_affine(inner2.domain().cube(hits.front()), Cube::unit(2)).apply(local));
        }
      }
      CHECK(direct(p).value == expected);
    }
}
