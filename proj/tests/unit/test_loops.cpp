#include <doctest.h>

#include "cubeshuffle/loops.hpp"

using namespace cubeshuffle;

namespace {

Rational q(long p, long d = 1) { return Rational(p, d); }

// tent(u) = 1 - |2u - 1| on [0,1]
Rational tent_oracle(const Rational& u) {
  const Rational v = 2 * u - 1;
  return Rational(1) - (v.sign() < 0 ? -v : v);
}

}  // namespace

TEST_CASE("bump loops") {
  const auto f = bump_loop(q(3), 1, 2);
  CHECK(f(Point{q(1, 2), q(1, 2)}).q == std::vector<Rational>{q(3)});
  CHECK(f(Point{q(0), q(1, 3)}).is_zero());
  CHECK(f(Point{q(1, 3), q(1)}).is_zero());
  CHECK(bump_loop(q(1), 1, 2)(Point{q(1, 4), q(1, 2)}).q == std::vector<Rational>{q(1, 2)});
  const auto g = bump_loop(q(1), 2, 2, 3);
  CHECK(g(Point{q(1, 2), q(1, 2)}).q == std::vector<Rational>{q(0), q(1), q(0)});
  CHECK_THROWS(bump_loop(q(0), 1, 2));
  CHECK_THROWS(bump_loop(q(1), 3, 2, 2));
  for (long i = 0; i <= 12; ++i) CHECK(tent(q(i, 12)) == tent_oracle(q(i, 12)));
}

TEST_CASE("null certificates") {
  const auto harmonic = bump_sequence(2, IndexSet::naturals(), Decay::Harmonic, q(1));
  CHECK(null_certificate(harmonic, q(1, 10)) == 11);
  const auto geometric = bump_sequence(2, IndexSet::naturals(), Decay::Geometric, q(1));
  CHECK(null_certificate(geometric, q(1, 100)) == 7);
  const auto finite = bump_sequence(2, IndexSet::finite({2, 5, 9}), Decay::Constant, q(1));
  CHECK(null_certificate(finite, q(1, 100)) == 10);
  // brute force: every k >= M has bound < eps, M - 1 does not
  for (long e : {10, 100, 1000}) {
    const Index m = null_certificate(harmonic, q(1, e));
    CHECK(harmonic.bound(m) < q(1, e));
    CHECK_FALSE(harmonic.bound(m - 1) < q(1, e));
  }
}

TEST_CASE("concatenation locality and basepoint") {
  const auto d = standard_domain(2);
  const auto seq = bump_sequence(2, IndexSet::naturals(), Decay::Harmonic, q(1));
  const auto loop = concatenate(d, seq);
  // (1/4, c) lies in R_1 = [0,1/2] x I; first coordinate maps to 1/2
  const Point p{q(1, 4), q(1, 3)};
  CHECK(loop(p).value == seq.loop(1)(Point{q(1, 2), q(1, 3)}));
  CHECK(loop(Point{q(0), q(1, 2)}).value.is_zero());
  CHECK(loop(Point{q(1), q(1, 2)}).value.is_zero());
  CHECK(loop(Point{q(1, 2), q(1)}).value.is_zero());
  for (Index k = 1; k <= 20; ++k) {
    const Cube c = d.cube(k);
    const Point inside{c.axis(0).lo() + c.axis(0).length() / 3, q(2, 5)};
    const Point local = canonical_affine(c, Cube::unit(2)).apply(inside);
    CHECK(loop(inside).value == seq.loop(k)(local));
  }
}

TEST_CASE("two-fold concatenation") {
  const auto d = NDomain::finite(2, {Cube::slab(2, q(0), q(1, 2)), Cube::slab(2, q(1, 2), q(1))});
  const auto seq = bump_sequence(2, IndexSet::finite({1, 2}), Decay::Harmonic, q(1));
  const auto loop = concatenate(d, seq);
  for (long i = 0; i <= 16; ++i)
    for (long j = 0; j <= 16; ++j) {
      const Point s{q(i, 16), q(j, 16)};
      // f_1 . f_2: f_1(2 s_1, s_2) on the left half, f_2(2 s_1 - 1, s_2) on the right
      Rational expected = 0;
      if (i < 8) expected = tent_oracle(2 * s[0]) * tent_oracle(s[1]);
      if (i > 8) expected = Rational(1, 2) * tent_oracle(2 * s[0] - 1) * tent_oracle(s[1]);
      CHECK(loop(s).value.q == std::vector<Rational>{expected});
    }
}

TEST_CASE("truncated evaluation reports a dominating error") {
  // no locator: scan up to the truncation
  const auto std2 = standard_domain(2);
  const auto blind = NDomain::rule(2, IndexSet::naturals(), [std2](Index k) { return std2.cube(k); }, std::nullopt, "");
  const auto seq = bump_sequence(2, IndexSet::naturals(), Decay::Harmonic, q(1));
  const auto loop = concatenate(blind, seq, 10);
  const auto far = loop(Point{q(99, 100), q(1, 2)});
  CHECK(far.value.is_zero());
  CHECK(far.error_bound == q(1, 11));
  const auto exact = concatenate(std2, seq)(Point{q(99, 100), q(1, 2)});
  CHECK(exact.value.q[0] <= far.error_bound);
}

TEST_CASE("concatenation rejects mismatched inputs") {
  const auto seq = bump_sequence(3, IndexSet::naturals(), Decay::Harmonic, q(1));
  CHECK_THROWS(concatenate(standard_domain(2), seq));
  const auto bounded = bump_sequence(2, IndexSet::naturals(), Decay::Constant, q(1));
  CHECK_THROWS(concatenate(standard_domain(2), bounded));
}

TEST_CASE("sequence json") {
  const auto seq = interleave(bump_sequence(2, IndexSet::naturals(), Decay::Harmonic, q(1)),
                              bump_sequence(2, IndexSet::naturals(), Decay::Geometric, q(1, 2)));
  const auto back = sequence_from_json(sequence_to_json(seq), 2, IndexSet::naturals());
  for (Index k = 1; k <= 10; ++k) {
    CHECK(back.bound(k) == seq.bound(k));
    CHECK(back.loop(k)(Point{q(1, 3), q(1, 2)}) == seq.loop(k)(Point{q(1, 3), q(1, 2)}));
  }
}
