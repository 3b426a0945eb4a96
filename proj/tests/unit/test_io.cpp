#include <doctest.h>

#include "cubeshuffle/io.hpp"

#include <filesystem>

using namespace cubeshuffle;

namespace {

const std::string fixtures = CUBESHUFFLE_FIXTURES;

Rational q(long p, long d = 1) { return Rational(p, d); }

}  // namespace

TEST_CASE("rationals and cubes round trip through json") {
  CHECK(rational_from_json(to_json(q(-3, 7))) == q(-3, 7));
  CHECK(rational_from_json(Json(2)) == q(2));
  const Cube c({Interval(q(1, 3), q(1, 2)), Interval(q(0), q(1))});
  CHECK(cube_from_json(to_json(c)) == c);
  CHECK_THROWS(rational_from_json(Json("1/0")));
}

TEST_CASE("scenario fixtures parse") {
  const auto sc = scenario_from_json(read_json_file(fixtures + "/finite_three.json"));
  CHECK(sc.r.indices().size() == 3);
  CHECK(sc.fixed.empty());
  const auto back = scenario_from_json(scenario_to_json(sc));
  CHECK(back.r.same_as(sc.r));
  CHECK(back.s.same_as(sc.s));
  CHECK(scenario_sequence(sc).bound(2) == q(1, 2));
  CHECK_THROWS_AS(read_json_file(fixtures + "/missing.json"), IoError);
}

TEST_CASE("plan files round trip and verify identically") {
  const auto sc = scenario_from_json(read_json_file(fixtures + "/restricted_finite.json"));
  const auto plan = shuffle(sc.r, sc.s, sc.fixed);
  const Json j = plan_to_json(plan);
  CHECK(j["schema"] == "cube-shuffle/plan/1");
  const auto loaded = plan_from_json(Json::parse(j.dump()));
  CHECK(loaded.complete);
  for (Index k : {1, 2, 3}) CHECK(loaded.schedule.path(k) == plan.schedule.path(k));
  CHECK(loaded.schedule.fixed() == plan.schedule.fixed());
  CHECK(verify(loaded.schedule).to_json() == verify(plan.schedule).to_json());
  CHECK(plan_to_json(ShufflePlan{loaded.schedule, loaded.provenance, nullptr, nullptr, nullptr})["paths"] == j["paths"]);
}

TEST_CASE("truncated infinite plans replay past their bound") {
  const auto sc = scenario_from_json(read_json_file(fixtures + "/infinite_standard_gluing.json"));
  const auto plan = shuffle(sc.r, sc.s, sc.fixed);
  const Json j = plan_to_json(plan, 6);
  CHECK(j["stages"].size() == 6);
  CHECK(j["paths"].size() == 6);
  const auto loaded = plan_from_json(j);
  CHECK_FALSE(loaded.complete);
  const auto full = plan_for_bound(loaded, 12);
  CHECK(full.schedule.path(10) == plan.schedule.path(10));
}

TEST_CASE("frames") {
  const auto plan = infinite_to_standard(interleaved_pair_domain(2));
  const auto f0 = frame_at(plan.schedule, q(0), 8);
  const auto f1 = frame_at(plan.schedule, q(1), 8);
  CHECK(f0.rectangles.size() == 8);
  for (const auto& r : f1.rectangles) CHECK(r.cube == standard_domain(2).cube(r.index));
  // staircase: at t = 1/2 stage 1 is done, so index 1 already sits on its slab
  const auto half = frame_at(plan.schedule, q(1, 2), 8);
  CHECK(half.rectangles[0].cube == Cube::slab(2, q(0), q(1, 2)));
  for (std::size_t i = 1; i < half.rectangles.size(); ++i)
    CHECK(Cube::slab(2, q(1, 2), q(1)).contains(half.rectangles[i].cube));
  const std::string svg = to_svg(f1);
  CHECK(svg.find("<svg") == 0);
  std::size_t count = 0;
  for (auto pos = svg.find("data-index"); pos != std::string::npos; pos = svg.find("data-index", pos + 1)) ++count;
  CHECK(count == 8);
  CHECK(to_svg(f1) == svg);
  CHECK_THROWS_AS(frame_at(infinite_to_standard(standard_domain(3)).schedule, q(0), 4), IoError);
}

TEST_CASE("time lists") {
  CHECK(parse_times("0,1/3,1/2,1") == std::vector<Rational>{q(0), q(1, 3), q(1, 2), q(1)});
  CHECK_THROWS_AS(parse_times("0,2"), IoError);
  CHECK_THROWS_AS(parse_times("x"), IoError);
}
