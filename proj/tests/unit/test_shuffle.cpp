#include <doctest.h>

#include "cubeshuffle/random.hpp"
#include "cubeshuffle/shuffle.hpp"

using namespace cubeshuffle;

namespace {

NDomain three_squares() {
  return NDomain::finite(2, {Cube({Interval(Rational(1, 10), Rational(3, 10)), Interval(Rational(1, 10), Rational(3, 10))}),
                             Cube({Interval(Rational(1, 2), Rational(9, 10)), Interval(Rational(1, 10), Rational(1, 2))}),
                             Cube({Interval(Rational(1, 5), Rational(2, 5)), Interval(Rational(3, 5), Rational(4, 5))})});
}

}  // namespace

TEST_CASE("eh intervals are pairwise disjoint and inside the last sides") {
  const NDomain d = three_squares();
  const auto iv = eh_intervals(d);
  REQUIRE(iv.size() == 3);
  for (std::size_t i = 0; i < iv.size(); ++i) {
    CHECK(d.cube(i + 1).axis(1).contains(iv[i]));
    for (std::size_t j = i + 1; j < iv.size(); ++j) CHECK_FALSE(iv[i].interiors_overlap(iv[j]));
  }
}

TEST_CASE("eh shuffle lands on permuted slabs and verifies") {
  const NDomain d = three_squares();
  const Permutation phi({2, 3, 1});
  const auto plan = eh_shuffle(d, phi);
  const auto rep = verify(plan.schedule);
  CHECK(rep.ok);
  // index at position p ends in slot phi^-1(p)
  CHECK(plan.schedule.path(3).end() == Cube::slab(2, Rational(1, 3), Rational(2, 3)));
  CHECK(plan.schedule.path(1).end() == Cube::slab(2, Rational(2, 3), Rational(1)));
  CHECK(plan.schedule.stages().size() == 4);
}

TEST_CASE("twist permutation sends the first slot to the centre") {
  const auto phi = twist_permutation(2);
  CHECK(phi(1) == 5);
  CHECK(phi(2) == 1);
  CHECK(phi(5) == 4);
  CHECK(phi(6) == 6);
  CHECK(twist_permutation(3)(1) == 14);
}

TEST_CASE("finite shuffle without fixed cubes uses two eh stages") {
  Rng rng(7);
  const NDomain r = three_squares();
  const NDomain s = random_finite_domain(2, 3, rng);
  const auto plan = finite_shuffle(r, s, {});
  REQUIRE(plan.provenance.size() == 2);
  CHECK(plan.provenance[0].lemma == "eh_shuffle");
  CHECK(plan.provenance[1].lemma == "eh_shuffle");
  CHECK(verify(plan.schedule).ok);
  CHECK(plan.schedule.path(2).start() == r.cube(2));
  CHECK(plan.schedule.path(2).end() == s.cube(2));
}

TEST_CASE("random finite scenarios verify") {
  Rng rng(seed_from_env(11));
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = trial % 3 == 2 ? 3 : 2;
    const std::size_t m = 2 + trial % 4;
    const auto sc = random_scenario(n, m, trial % 2 ? 1 : 0, rng);
    CAPTURE(trial);
    const auto plan = finite_shuffle(sc.r, sc.s, sc.fixed);
    const auto rep = verify(plan.schedule);
    CHECK_MESSAGE(rep.ok, (rep.failure ? rep.failure->message : std::string()));
    for (Index k : sc.fixed) CHECK(plan.schedule.path(k).is_constant());
  }
}

TEST_CASE("two-cycle swap refuses a disconnected complement") {
  const Cube wall = Cube({Interval(Rational(2, 5), Rational(3, 5)), Interval::unit()});
  const Cube a({Interval(Rational(1, 10), Rational(1, 5)), Interval(Rational(1, 10), Rational(1, 5))});
  const Cube b({Interval(Rational(4, 5), Rational(9, 10)), Interval(Rational(1, 10), Rational(1, 5))});
  const NDomain r = NDomain::finite(2, {wall, a});
  const NDomain s = NDomain::finite(2, {wall, b});
  CHECK_THROWS_WITH(two_cycle_swap(r, s, 2, {1}), "complement disconnected");
}

TEST_CASE("gluing blocks tile the space-time cube") {
  for (std::size_t n : {2u, 3u}) {
    const auto blocks = gluing_blocks(n, 12);
    CHECK(blocks.size() == 24);
    CHECK(check_gluing_tiling(blocks, 12).ok);
  }
}

TEST_CASE("infinite gluing of the standard domain verifies on a prefix") {
  const auto plan = infinite_to_standard(interleaved_pair_domain(2));
  const auto rep = verify(plan.schedule, 12);
  CHECK_MESSAGE(rep.ok, (rep.failure ? rep.failure->message : std::string()));
  CHECK(plan.stages_up_to(5).size() == 5);
  CHECK(plan.provenance_up_to(5).size() == 6);
}

namespace {

Rational q(long p, long d = 1) { return Rational(p, d); }
Cube box2(Rational a, Rational b, Rational c, Rational d) { return Cube({Interval(a, b), Interval(c, d)}); }
std::string why(const VerificationReport& r) { return r.failure ? r.failure->message : std::string(); }

NDomain restricted_fixture_r() {
  const Cube c1 = box2(q(0), q(1, 4), q(3, 4), q(1));
  const Cube c2 = box2(q(3, 4), q(1), q(3, 4), q(1));
  return finite_plus_tail(2, {c1, c2}, box2(q(0), q(1, 2), q(0), q(1, 2)), standard_domain(2));
}

NDomain restricted_fixture_s() {
  const Cube c1 = box2(q(0), q(1, 4), q(3, 4), q(1));
  const Cube c2 = box2(q(3, 4), q(1), q(3, 4), q(1));
  return finite_plus_tail(2, {c1, c2}, box2(q(1, 2), q(1), q(1, 8), q(5, 8)), interleaved_pair_domain(2));
}

}  // namespace

TEST_CASE("shrink schedule interpolates corners") {
  const auto parent = NDomain::finite(2, {Cube::unit(2)});
  const auto child = NDomain::finite(2, {box2(q(1, 4), q(1, 2), q(1, 4), q(1, 2))});
  const auto s = shrink_schedule(parent, make_witness(parent, child));
  CHECK(s.path(1).at(q(1, 2)) == box2(q(1, 8), q(3, 4), q(1, 8), q(3, 4)));
  for (long i = 0; i <= 32; ++i) CHECK(parent.cube(1).contains(s.path(1).at(q(i, 32))));
  CHECK(shrink_schedule(parent, make_witness(parent, parent)).path(1).is_constant());
  CHECK_THROWS_AS(shrink_schedule(child, make_witness(child, parent)), ShuffleError);
}

TEST_CASE("eh shuffle examples") {
  const auto single = eh_shuffle(NDomain::finite(2, {box2(q(1, 4), q(1, 2), q(1, 4), q(1, 2))}), Permutation::identity(1));
  CHECK(single.schedule.path(1).end() == Cube::unit(2));

  const auto halves = NDomain::finite(2, {Cube::slab(2, q(0), q(1, 2)), Cube::slab(2, q(1, 2), q(1))});
  const auto swap = eh_shuffle(halves, Permutation({2, 1}));
  CHECK(swap.schedule.path(1).end() == Cube::slab(2, q(1, 2), q(1)));
  CHECK(swap.schedule.path(2).end() == Cube::slab(2, q(0), q(1, 2)));
  CHECK(verify(swap.schedule).ok);

  const auto adv = adversarial_dense_domain(2);
  const auto plan = eh_shuffle(adv, Permutation::identity(adv.indices().size()));
  const auto rep = verify(plan.schedule);
  CHECK_MESSAGE(rep.ok, why(rep));
}

TEST_CASE("two-cycle swap examples") {
  const Cube a = box2(q(0), q(1, 4), q(0), q(1, 4));
  const auto same = two_cycle_swap(NDomain::finite(2, {a}), NDomain::finite(2, {a}), 1, {});
  CHECK(same.schedule.path(1).is_constant());

  const Cube b = box2(q(3, 4), q(1), q(3, 4), q(1));
  const auto lone = two_cycle_swap(NDomain::finite(2, {a}), NDomain::finite(2, {b}), 1, {});
  CHECK(verify(lone.schedule).ok);
  CHECK(lone.schedule.path(1).end() == b);

  const Cube wall = box2(q(1, 3), q(2, 3), q(0), q(2, 3));
  const Cube goal = box2(q(3, 4), q(1), q(0), q(1, 4));
  const auto r = NDomain::finite(2, {wall, a}), s = NDomain::finite(2, {wall, goal});
  const auto around = two_cycle_swap(r, s, 2, {1});
  const auto rep = verify(around.schedule);
  CHECK_MESSAGE(rep.ok, why(rep));
  CHECK(around.schedule.path(1).is_constant());
  const auto mover = around.schedule.path(2);
  for (const auto& kf : mover.keyframes()) CHECK(interiors_disjoint(kf.cube, wall));
}

TEST_CASE("finite shuffle examples") {
  const auto d = NDomain::finite(2, {box2(q(0), q(1, 2), q(0), q(1, 2)), box2(q(1, 2), q(1), q(1, 2), q(1))});
  const auto constant = finite_shuffle(d, d, {1, 2});
  CHECK(constant.schedule.path(1).is_constant());
  CHECK(constant.schedule.path(2).is_constant());

  const Cube bottom = box2(q(0), q(1), q(0), q(1, 4));
  const auto r = NDomain::finite(2, {bottom, box2(q(0), q(1, 4), q(1, 2), q(3, 4)), box2(q(1, 2), q(3, 4), q(1, 2), q(3, 4))});
  const auto s = NDomain::finite(2, {bottom, box2(q(3, 4), q(1), q(3, 4), q(1)), box2(q(0), q(1, 3), q(1, 3), q(2, 3))});
  const auto plan = finite_shuffle(r, s, {1});
  const auto rep = verify(plan.schedule);
  CHECK_MESSAGE(rep.ok, why(rep));
  const auto still = plan.schedule.path(1);
  for (const auto& kf : still.keyframes()) CHECK(kf.cube == bottom);
  // dispatch: shuffle returns the same paths
  const auto via = shuffle(r, s, {1});
  for (Index k : {1, 2, 3}) CHECK(via.schedule.path(k) == plan.schedule.path(k));
  CHECK(via.provenance.front().lemma == "shuffle");
}

TEST_CASE("ntwist") {
  const auto r = shrink_to_interior(standard_domain(2)).child;
  const auto tw = ntwist(r);
  CHECK(tw.phi(1) == 5);
  // index 1: its cell slab is [0,1/9] x I, widened to [0,rho]
  const auto p1 = tw.stage.schedule.path(1);
  CHECK(p1.at(q(5, 6)) == Cube::slab(2, q(0), q(1, 9)));
  CHECK(p1.end() == Cube::slab(2, q(0), q(1, 2)));
  CHECK(validate(tw.residual, 30).valid);
  for (Index k = 2; k <= 30; ++k) CHECK(tw.residual.cube(k).strictly_inside_unit());
  const auto rep = verify(tw.stage.schedule, 30);
  CHECK_MESSAGE(rep.ok, why(rep));
  CHECK_THROWS_AS(ntwist(standard_domain(2)), ShuffleError);
}

TEST_CASE("infinite gluing blocks and keyframe budget") {
  const auto blocks = gluing_blocks(2, 5);
  // stage block A_2, read in the source-to-standard orientation: time t maps to 1 - t
  const auto& a2 = blocks[2];
  CHECK(a2.label == "H_2");
  CHECK(a2.block.space == Cube::slab(2, q(1, 2), q(1)));
  CHECK(Rational(1) - a2.block.time.hi() == q(1, 3));
  CHECK(Rational(1) - a2.block.time.lo() == q(1, 2));

  const auto plan = infinite_to_standard(standard_domain(2));
  const auto p1 = plan.schedule.path(1);
  std::size_t in_stage_one = 0;
  for (const auto& kf : p1.keyframes()) in_stage_one += kf.time <= q(1, 2);
  CHECK(p1.keyframes().size() <= in_stage_one + 2);
  CHECK(p1.end() == Cube::slab(2, q(0), q(1, 2)));
  CHECK(p1.at(q(3, 4)) == p1.end());
}

TEST_CASE("restricted infinite shuffle") {
  const auto r = restricted_fixture_r(), s = restricted_fixture_s();
  const auto plan = shuffle(r, s, {1, 2});
  const auto rep = verify(plan.schedule, 40);
  CHECK_MESSAGE(rep.ok, why(rep));
  CHECK(plan.schedule.path(1).is_constant());
  CHECK(plan.schedule.path(2).is_constant());
  const auto seq = bump_sequence(2, IndexSet::naturals(), Decay::Harmonic, q(1));
  const auto at0 = concatenate(r, seq), at1 = concatenate(s, seq);
  for (long i = 0; i <= 8; ++i)
    for (long j = 0; j <= 8; ++j) {
      const Point p{q(i, 8), q(j, 8)};
      const auto e0 = eval_homotopy(plan.schedule, seq, p, q(0));
      const auto e1 = eval_homotopy(plan.schedule, seq, p, q(1));
      CHECK(e0.value == at0(p).value);
      CHECK(e1.value == at1(p).value);
    }
}

TEST_CASE("corollary plans") {
  const auto id = permutation_plan(2, Permutation::identity(3));
  CHECK(id.schedule.source().same_as(id.schedule.target()));
  const auto t = permutation_plan(2, Permutation::transposition(1, 2));
  CHECK(t.schedule.source().cube(1) == Cube::slab(2, q(0), q(1, 2)));
  CHECK(t.schedule.target().cube(1) == Cube::slab(2, q(1, 2), q(2, 3)));
  CHECK(verify(t.schedule, 20).ok);
}

TEST_CASE("plan replay rebuilds the same paths") {
  const auto plan = shuffle(interleaved_pair_domain(2), standard_domain(2));
  const auto again = replay(plan.provenance_up_to(4));
  for (Index k = 1; k <= 6; ++k) CHECK(again.schedule.path(k) == plan.schedule.path(k));
}
