#include "cubeshuffle/schedule.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace cubeshuffle {

CubePath::CubePath(std::vector<Keyframe> keyframes) : kf_(std::move(keyframes)) {
  if (kf_.size() < 2) throw ScheduleError("a path needs at least two keyframes");
  if (kf_.front().time != Rational(0) || kf_.back().time != Rational(1))
    throw ScheduleError("path keyframes must start at time 0 and end at time 1");
  for (std::size_t i = 1; i < kf_.size(); ++i) {
    if (!(kf_[i - 1].time < kf_[i].time)) throw ScheduleError("keyframe times must increase strictly");
    if (kf_[i].cube.dim() != kf_[0].cube.dim()) throw ScheduleError("keyframe cubes differ in dimension");
  }
}

CubePath CubePath::constant(const Cube& c) { return CubePath({{Rational(0), c}, {Rational(1), c}}); }

CubePath CubePath::linear(const Cube& from, const Cube& to) {
  if (from == to) return constant(from);
  return CubePath({{Rational(0), from}, {Rational(1), to}});
}

Cube CubePath::at(const Rational& t) const {
  if (t <= kf_.front().time) return kf_.front().cube;
  if (t >= kf_.back().time) return kf_.back().cube;
  auto it = std::upper_bound(kf_.begin(), kf_.end(), t, [](const Rational& x, const Keyframe& k) { return x < k.time; });
  const Keyframe& b = *it;
  const Keyframe& a = *(it - 1);
  if (a.time == t) return a.cube;
  return Cube::interpolate(a.cube, b.cube, (t - a.time) / (b.time - a.time));
}

bool CubePath::is_constant() const {
  return std::all_of(kf_.begin(), kf_.end(), [&](const Keyframe& k) { return k.cube == kf_.front().cube; });
}

CubePath CubePath::reversed() const {
  std::vector<Keyframe> out;
  out.reserve(kf_.size());
  for (auto it = kf_.rbegin(); it != kf_.rend(); ++it) out.push_back({Rational(1) - it->time, it->cube});
  return CubePath(std::move(out));
}

CubePath CubePath::mapped(const AffineCubeMap& map) const {
  std::vector<Keyframe> out;
  out.reserve(kf_.size());
  for (const auto& k : kf_) out.push_back({k.time, map.apply(k.cube)});
  return CubePath(std::move(out));
}

CubePath CubePath::simplified() const {
  std::vector<Keyframe> out{kf_.front()};
  for (std::size_t i = 1; i + 1 < kf_.size(); ++i) {
    const Keyframe& a = out.back();
    const Keyframe& b = kf_[i + 1];
    const Cube on_line = Cube::interpolate(a.cube, b.cube, (kf_[i].time - a.time) / (b.time - a.time));
    if (!(on_line == kf_[i].cube)) out.push_back(kf_[i]);
  }
  out.push_back(kf_.back());
  return CubePath(std::move(out));
}

std::vector<Keyframe> retime(const CubePath& path, const Interval& window) {
  std::vector<Keyframe> out;
  out.reserve(path.keyframes().size());
  for (const auto& k : path.keyframes()) out.push_back({window.lo() + k.time * window.length(), k.cube});
  return out;
}

CubePath join(const std::vector<CubePath>& parts, const std::vector<Rational>& breaks) {
  if (parts.empty() || breaks.size() != parts.size() + 1) throw ScheduleError("join: bad partition");
  std::vector<Keyframe> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0 && !(parts[i - 1].end() == parts[i].start()))
      throw ScheduleError("join: part " + std::to_string(i) + " does not start where the previous part ends");
    auto piece = retime(parts[i], Interval(breaks[i], breaks[i + 1]));
    out.insert(out.end(), piece.begin() + (i > 0 ? 1 : 0), piece.end());
  }
  return CubePath(std::move(out)).simplified();
}

CubePath carried_path(const CubePath& carrier, const Cube& nested) {
  if (!carrier.start().contains(nested)) throw ScheduleError("carried cube is not inside its carrier");
  std::vector<Keyframe> out;
  for (const auto& k : carrier.keyframes())
    out.push_back({k.time, canonical_affine(carrier.start(), k.cube).apply(nested)});
  return CubePath(std::move(out));
}

struct CubeSchedule::Cache {
  std::mutex mutex;
  std::unordered_map<Index, CubePath> paths;
};

CubeSchedule::CubeSchedule(std::size_t n, IndexSet indices, PathFn path, NDomain source, NDomain target,
                           std::vector<Index> fixed, std::vector<StageNote> stages)
    : n_(n),
      indices_(std::move(indices)),
      path_fn_(std::move(path)),
      cache_(std::make_shared<Cache>()),
      source_(std::move(source)),
      target_(std::move(target)),
      fixed_(std::move(fixed)),
      stages_(std::move(stages)) {
  std::sort(fixed_.begin(), fixed_.end());
  fixed_.erase(std::unique(fixed_.begin(), fixed_.end()), fixed_.end());
  for (Index k : fixed_)
    if (!indices_.contains(k)) throw ScheduleError("fixed index " + std::to_string(k) + " not in index set");
}

CubeSchedule CubeSchedule::constant(const NDomain& domain, std::vector<Index> fixed) {
  return CubeSchedule(domain.dim(), domain.indices(), [domain](Index k) { return CubePath::constant(domain.cube(k)); },
                      domain, domain, std::move(fixed), {{"constant", Rational(0), Rational(1)}});
}

CubeSchedule CubeSchedule::from_paths(const NDomain& source, const NDomain& target, std::map<Index, CubePath> paths,
                                      std::vector<Index> fixed, std::vector<StageNote> stages) {
  auto table = std::make_shared<const std::map<Index, CubePath>>(std::move(paths));
  return CubeSchedule(
      source.dim(), source.indices(),
      [table](Index k) {
        auto it = table->find(k);
        if (it == table->end()) throw ScheduleError("no path for index " + std::to_string(k));
        return it->second;
      },
      source, target, std::move(fixed), std::move(stages));
}

CubePath CubeSchedule::path(Index k) const {
  if (!indices_.contains(k)) throw ScheduleError("index " + std::to_string(k) + " not in schedule");
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->paths.find(k);
    if (it != cache_->paths.end()) return it->second;
  }
  CubePath p = path_fn_(k);
  std::lock_guard lock(cache_->mutex);
  return cache_->paths.emplace(k, std::move(p)).first->second;
}

CubeSchedule CubeSchedule::with_stages(std::vector<StageNote> stages) const {
  CubeSchedule s = *this;
  s.stages_ = std::move(stages);
  return s;
}

CubeSchedule CubeSchedule::with_fixed(std::vector<Index> fixed) const {
  return CubeSchedule(n_, indices_, path_fn_, source_, target_, std::move(fixed), stages_);
}

Json VerificationReport::to_json() const {
  Json j{{"schema", "cube-shuffle/verify/1"},
         {"ok", ok},
         {"endpoints_ok", endpoints_ok},
         {"fixed_ok", fixed_ok},
         {"disjoint_ok", disjoint_ok},
         {"checked_indices", checked_indices},
         {"pairs_checked", pairs_checked},
         {"segments_checked", segments_checked}};
  if (failure) {
    j["failure"] = {{"kind", failure->kind},
                    {"i", failure->i},
                    {"j", failure->j},
                    {"t0", cubeshuffle::to_json(failure->t0)},
                    {"t1", cubeshuffle::to_json(failure->t1)},
                    {"message", failure->message}};
  }
  return j;
}

namespace {

/// Cubes of `p` at each of the sorted `times`.
std::vector<Cube> sample(const CubePath& p, const std::vector<Rational>& times) {
  std::vector<Cube> out;
  out.reserve(times.size());
  const auto& kf = p.keyframes();
  std::size_t seg = 0;
  for (const auto& t : times) {
    while (seg + 1 < kf.size() - 1 && kf[seg + 1].time <= t) ++seg;
    const Keyframe& a = kf[seg];
    const Keyframe& b = kf[seg + 1];
    if (t == a.time) out.push_back(a.cube);
    else if (t == b.time) out.push_back(b.cube);
    else out.push_back(Cube::interpolate(a.cube, b.cube, (t - a.time) / (b.time - a.time)));
  }
  return out;
}

bool separated_throughout(const Cube& a0, const Cube& a1, const Cube& b0, const Cube& b1) {
  for (std::size_t i = 0; i < a0.dim(); ++i) {
    if (a0.axis(i).hi() <= b0.axis(i).lo() && a1.axis(i).hi() <= b1.axis(i).lo()) return true;
    if (b0.axis(i).hi() <= a0.axis(i).lo() && b1.axis(i).hi() <= a1.axis(i).lo()) return true;
  }
  return false;
}

bool segment_ok(const Cube& a0, const Cube& a1, const Cube& b0, const Cube& b1, unsigned depth) {
  if (separated_throughout(a0, a1, b0, b1)) return true;
  if (depth == 0) return false;
  if (!interiors_disjoint(a0, b0) || !interiors_disjoint(a1, b1)) return false;
  const Rational half(1, 2);
  const Cube am = Cube::interpolate(a0, a1, half);
  const Cube bm = Cube::interpolate(b0, b1, half);
  return segment_ok(a0, am, b0, bm, depth - 1) && segment_ok(am, a1, bm, b1, depth - 1);
}

}  // namespace

std::optional<std::pair<Rational, Rational>> first_overlap(const CubePath& a, const CubePath& b, unsigned bisect_depth,
                                                           std::size_t* segments) {
  std::vector<Rational> times;
  times.reserve(a.keyframes().size() + b.keyframes().size());
  for (const auto& k : a.keyframes()) times.push_back(k.time);
  for (const auto& k : b.keyframes()) times.push_back(k.time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const auto ca = sample(a, times);
  const auto cb = sample(b, times);
  for (std::size_t s = 0; s + 1 < times.size(); ++s) {
    if (segments) ++*segments;
    if (!segment_ok(ca[s], ca[s + 1], cb[s], cb[s + 1], bisect_depth)) return std::make_pair(times[s], times[s + 1]);
  }
  return std::nullopt;
}

VerificationReport verify(const CubeSchedule& schedule, Index bound, unsigned bisect_depth) {
  VerificationReport rep;
  const std::vector<Index> idx = schedule.indices().indices_up_to(bound);
  rep.checked_indices = idx.size();
  std::vector<CubePath> paths;
  paths.reserve(idx.size());
  auto fail = [&](VerificationFailure f) {
    if (!rep.failure) rep.failure = std::move(f);
    rep.ok = false;
  };
  for (Index k : idx) {
    paths.push_back(schedule.path(k));
    const CubePath& p = paths.back();
    if (!(p.start() == schedule.source().cube(k))) {
      rep.endpoints_ok = false;
      fail({"endpoint", k, k, Rational(0), Rational(0), "path does not start at the source cube"});
    }
    if (!(p.end() == schedule.target().cube(k))) {
      rep.endpoints_ok = false;
      fail({"endpoint", k, k, Rational(1), Rational(1), "path does not end at the target cube"});
    }
    if (std::binary_search(schedule.fixed().begin(), schedule.fixed().end(), k) && !p.is_constant()) {
      rep.fixed_ok = false;
      fail({"fixed", k, k, Rational(0), Rational(1), "fixed index moves"});
    }
  }

  std::atomic<std::size_t> next{0}, segments{0}, pairs{0};
  std::mutex mutex;
  std::optional<VerificationFailure> overlap;
  auto worker = [&] {
    std::size_t local_segments = 0, local_pairs = 0;
    for (std::size_t i = next++; i < paths.size(); i = next++) {
      for (std::size_t j = i + 1; j < paths.size(); ++j) {
        ++local_pairs;
        auto bad = first_overlap(paths[i], paths[j], bisect_depth, &local_segments);
        if (bad) {
          std::lock_guard lock(mutex);
          if (!overlap || std::make_pair(idx[i], idx[j]) < std::make_pair(overlap->i, overlap->j))
            overlap = VerificationFailure{"overlap", idx[i], idx[j], bad->first, bad->second,
                                          "interiors may meet during the segment"};
          break;
        }
      }
    }
    segments += local_segments;
    pairs += local_pairs;
  };
  const unsigned threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  rep.segments_checked = segments;
  rep.pairs_checked = pairs;
  if (overlap) {
    rep.disjoint_ok = false;
    fail(*overlap);
  }
  return rep;
}

namespace {

bool domains_chain(const NDomain& a, const NDomain& b) {
  if (a.same_as(b)) return true;
  if (!(a.indices() == b.indices())) return false;
  for (Index k : a.indices().indices_up_to(32))
    if (!(a.cube(k) == b.cube(k))) return false;
  return true;
}

}  // namespace

CubeSchedule compose(const std::vector<CubeSchedule>& schedules) {
  if (schedules.empty()) throw ScheduleError("compose: no schedules");
  if (schedules.size() == 1) return schedules.front();
  const std::size_t parts = schedules.size();
  for (std::size_t i = 0; i + 1 < parts; ++i) {
    if (schedules[i].dim() != schedules[i + 1].dim() || !(schedules[i].indices() == schedules[i + 1].indices()))
      throw ScheduleError("compose: stage " + std::to_string(i + 1) + " has a different index set or dimension");
    if (!domains_chain(schedules[i].target(), schedules[i + 1].source()))
      throw ScheduleError("compose: stage " + std::to_string(i + 1) + " target differs from the next source");
  }
  std::vector<Rational> breaks;
  for (std::size_t i = 0; i <= parts; ++i)
    breaks.push_back(Rational(static_cast<long>(i), static_cast<long>(parts)));

  std::vector<Index> fixed = schedules.front().fixed();
  for (const auto& s : schedules) {
    std::vector<Index> keep;
    std::set_intersection(fixed.begin(), fixed.end(), s.fixed().begin(), s.fixed().end(), std::back_inserter(keep));
    fixed = std::move(keep);
  }
  std::vector<StageNote> stages;
  for (std::size_t i = 0; i < parts; ++i) {
    const Rational w = breaks[i + 1] - breaks[i];
    if (schedules[i].stages().empty()) stages.push_back({"stage " + std::to_string(i + 1), breaks[i], breaks[i + 1]});
    for (const auto& note : schedules[i].stages())
      stages.push_back({note.label, breaks[i] + note.t0 * w, breaks[i] + note.t1 * w});
  }
  auto parts_copy = std::make_shared<const std::vector<CubeSchedule>>(schedules);
  return CubeSchedule(
      schedules.front().dim(), schedules.front().indices(),
      [parts_copy, breaks](Index k) {
        std::vector<CubePath> ps;
        ps.reserve(parts_copy->size());
        for (const auto& s : *parts_copy) ps.push_back(s.path(k));
        return join(ps, breaks);
      },
      schedules.front().source(), schedules.back().target(), std::move(fixed), std::move(stages));
}

CubeSchedule reverse(const CubeSchedule& schedule) {
  std::vector<StageNote> stages;
  for (auto it = schedule.stages().rbegin(); it != schedule.stages().rend(); ++it)
    stages.push_back({it->label + " (reversed)", Rational(1) - it->t1, Rational(1) - it->t0});
  return CubeSchedule(
      schedule.dim(), schedule.indices(), [schedule](Index k) { return schedule.path(k).reversed(); },
      schedule.target(), schedule.source(), schedule.fixed(), std::move(stages));
}

Fragment embed(const CubeSchedule& schedule, const BlockEmbedding& block, std::string label) {
  const AffineCubeMap map = canonical_affine(Cube::unit(schedule.dim()), block.space);
  return Fragment{std::move(label), block, schedule.indices(),
                  [schedule, map, block](Index k) { return retime(schedule.path(k).mapped(map), block.time); }};
}

CubeSchedule embed_space(const CubeSchedule& schedule, const Cube& block) {
  const AffineCubeMap map = canonical_affine(Cube::unit(schedule.dim()), block);
  return CubeSchedule(
      schedule.dim(), schedule.indices(), [schedule, map](Index k) { return schedule.path(k).mapped(map); },
      image_domain(schedule.source(), block), image_domain(schedule.target(), block), schedule.fixed(),
      schedule.stages());
}

EvalResult eval_homotopy(const CubeSchedule& schedule, const KSequence& seq, const Point& s, const Rational& t,
                         Index truncation) {
  if (s.size() != schedule.dim()) throw ScheduleError("point dimension mismatch");
  EvalResult r;
  r.value = LoopValue::zero(seq.target_dim());
  if (on_unit_boundary(s)) return r;
  for (Index k : schedule.indices().indices_up_to(truncation)) {
    const Cube c = schedule.path(k).at(t);
    if (c.contains(s)) {
      r.index = k;
      r.value = evaluate_in_cube(seq.loop(k), c, s);
      return r;
    }
  }
  if (!schedule.is_finite()) r.error_bound = seq.tail_bound(truncation);
  return r;
}

}  // namespace cubeshuffle
