#pragma once

#include "cubeshuffle/domain.hpp"
#include "cubeshuffle/loops.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cubeshuffle {

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Keyframe {
  Rational time;
  Cube cube;
  friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

/// Piecewise-affine path of cubes over [0,1]; corners interpolate linearly between keyframes.
class CubePath {
 public:
  explicit CubePath(std::vector<Keyframe> keyframes);
  static CubePath constant(const Cube& c);
  static CubePath linear(const Cube& from, const Cube& to);

  const std::vector<Keyframe>& keyframes() const { return kf_; }
  const Cube& start() const { return kf_.front().cube; }
  const Cube& end() const { return kf_.back().cube; }
  Cube at(const Rational& t) const;
  bool is_constant() const;

  CubePath reversed() const;
  CubePath mapped(const AffineCubeMap& map) const;
  /// Drops keyframes that lie on the segment between their neighbours.
  CubePath simplified() const;

  friend bool operator==(const CubePath&, const CubePath&) = default;

 private:
  std::vector<Keyframe> kf_;
};

/// parts[i] squeezed into [breaks[i], breaks[i+1]]; consecutive parts must chain exactly.
CubePath join(const std::vector<CubePath>& parts, const std::vector<Rational>& breaks);
/// Keyframes of `path` with times mapped onto `window`.
std::vector<Keyframe> retime(const CubePath& path, const Interval& window);
/// Path of a cube nested in a moving carrier: X(t) = L_{carrier(0), carrier(t)}(X).
CubePath carried_path(const CubePath& carrier, const Cube& nested);

struct StageNote {
  std::string label;
  Rational t0, t1;
};

class CubeSchedule {
 public:
  using PathFn = std::function<CubePath(Index)>;

  CubeSchedule(std::size_t n, IndexSet indices, PathFn path, NDomain source, NDomain target,
               std::vector<Index> fixed, std::vector<StageNote> stages);

  static CubeSchedule constant(const NDomain& domain, std::vector<Index> fixed = {});
  static CubeSchedule from_paths(const NDomain& source, const NDomain& target, std::map<Index, CubePath> paths,
                                 std::vector<Index> fixed, std::vector<StageNote> stages);

  std::size_t dim() const { return n_; }
  const IndexSet& indices() const { return indices_; }
  bool is_finite() const { return indices_.is_finite(); }
  CubePath path(Index k) const;
  const NDomain& source() const { return source_; }
  const NDomain& target() const { return target_; }
  const std::vector<Index>& fixed() const { return fixed_; }
  const std::vector<StageNote>& stages() const { return stages_; }

  CubeSchedule with_stages(std::vector<StageNote> stages) const;
  CubeSchedule with_fixed(std::vector<Index> fixed) const;

 private:
  struct Cache;
  std::size_t n_;
  IndexSet indices_;
  PathFn path_fn_;
  std::shared_ptr<Cache> cache_;
  NDomain source_, target_;
  std::vector<Index> fixed_;
  std::vector<StageNote> stages_;
};

struct VerificationFailure {
  std::string kind;  // "endpoint", "fixed", "overlap", "degenerate"
  Index i = 0, j = 0;
  Rational t0, t1;
  std::string message;
};

struct VerificationReport {
  bool ok = true;
  bool endpoints_ok = true;
  bool fixed_ok = true;
  bool disjoint_ok = true;
  std::size_t checked_indices = 0;
  std::size_t pairs_checked = 0;
  std::size_t segments_checked = 0;
  std::optional<VerificationFailure> failure;
  Json to_json() const;
};

VerificationReport verify(const CubeSchedule& schedule, Index bound = 64, unsigned bisect_depth = 16);

/// Exact check that two paths keep interior-disjoint cubes at all times.
std::optional<std::pair<Rational, Rational>> first_overlap(const CubePath& a, const CubePath& b,
                                                           unsigned bisect_depth = 16, std::size_t* segments = nullptr);

CubeSchedule compose(const std::vector<CubeSchedule>& schedules);
CubeSchedule reverse(const CubeSchedule& schedule);

struct BlockEmbedding {
  Cube space;
  Interval time;
};

/// A schedule placed in a space-time block; keyframe times live in block.time.
struct Fragment {
  std::string label;
  BlockEmbedding block;
  IndexSet indices;
  std::function<std::vector<Keyframe>(Index)> keyframes;
};

Fragment embed(const CubeSchedule& schedule, const BlockEmbedding& block, std::string label = "");
/// Same schedule with every cube mapped through L_{I^n, block}; time unchanged.
CubeSchedule embed_space(const CubeSchedule& schedule, const Cube& block);

/// H(s,t) = f_k(L_{cube_k(t), I^n}(s)) for the least k <= truncation with s in cube_k(t), basepoint otherwise.
EvalResult eval_homotopy(const CubeSchedule& schedule, const KSequence& seq, const Point& s, const Rational& t,
                         Index truncation = 64);

}  // namespace cubeshuffle
