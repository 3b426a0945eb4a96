#pragma once

#include "cubeshuffle/shuffle.hpp"

#include <optional>
#include <string>

namespace cubeshuffle {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// {"R": domain, "S": domain, "F": [indices], "sequence": {...}}
struct Scenario {
  NDomain r;
  NDomain s;
  std::vector<Index> fixed;
  Json sequence;  // null when absent
};

Scenario scenario_from_json(const Json& j);
Json scenario_to_json(const Scenario& sc);
/// The scenario's sequence over R's index set (harmonic bumps when absent).
KSequence scenario_sequence(const Scenario& sc);

/// Plan files carry every path up to `bound`; finite plans are complete.
Json plan_to_json(const ShufflePlan& plan, Index bound = 64);

struct LoadedPlan {
  CubeSchedule schedule;  // over the materialized indices
  std::vector<ProvenanceEntry> provenance;
  std::vector<StageNote> stages;
  Index materialized_bound = 0;
  bool complete = true;
};

LoadedPlan plan_from_json(const Json& j);
/// The full plan, rebuilt from provenance when the file holds a truncated infinite plan.
ShufflePlan plan_for_bound(const LoadedPlan& loaded, Index bound);

struct Rectangle {
  Index index;
  Cube cube;
  std::string color;
};

struct Frame {
  Rational time;
  std::vector<Rectangle> rectangles;
};

/// Schedule state at time t for indices up to `bound` (n = 2 only).
Frame frame_at(const CubeSchedule& schedule, const Rational& t, Index bound);
std::string to_svg(const Frame& frame, unsigned size = 512);
std::string index_color(Index k);

/// Comma-separated rationals, e.g. "0,1/3,1/2,1".
std::vector<Rational> parse_times(const std::string& list);

}  // namespace cubeshuffle
