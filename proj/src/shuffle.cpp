#include "cubeshuffle/shuffle.hpp"

#include <algorithm>
#include <mutex>

namespace cubeshuffle {

namespace {

NDomain lazy_domain(std::size_t n, const IndexSet& idx, std::function<Cube(Index)> fn, std::string certificate) {
  return NDomain::rule(n, idx, std::move(fn), std::nullopt, std::move(certificate), nullptr);
}

Interval sub_window(const Interval& window, const Interval& inner) {
  return Interval(window.lo() + inner.lo() * window.length(), window.lo() + inner.hi() * window.length());
}

Interval flipped(const Interval& t) { return Interval(Rational(1) - t.hi(), Rational(1) - t.lo()); }

bool contains_index(const std::vector<Index>& sorted, Index k) {
  return std::binary_search(sorted.begin(), sorted.end(), k);
}

std::vector<Index> sorted_unique(std::vector<Index> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

Json interval_json(const Interval& i) { return Json::array({to_json(i.lo()), to_json(i.hi())}); }

bool is_standard(const NDomain& d) {
  return !d.is_finite() && d.same_as(standard_domain_on(d.dim(), d.indices()));
}

}  // namespace

// --- plans -----------------------------------------------------------------------

std::vector<ProvenanceEntry> ShufflePlan::provenance_up_to(Index bound) const {
  return lazy_provenance ? lazy_provenance(bound) : provenance;
}

std::vector<StageNote> ShufflePlan::stages_up_to(Index bound) const {
  return lazy_stages ? lazy_stages(bound) : schedule.stages();
}

std::vector<FragmentInfo> ShufflePlan::fragments_up_to(Index bound) const {
  return lazy_fragments ? lazy_fragments(bound) : std::vector<FragmentInfo>{};
}

ShufflePlan plan_of(CubeSchedule schedule, std::string lemma, Json params) {
  ShufflePlan p{std::move(schedule), {}, nullptr, nullptr, nullptr};
  p.provenance.push_back({std::move(lemma), std::move(params)});
  return p;
}

ShufflePlan plan_sequence(const std::vector<ShufflePlan>& parts) {
  if (parts.empty()) throw ShuffleError("plan_sequence: no parts");
  if (parts.size() == 1) return parts.front();
  std::vector<CubeSchedule> schedules;
  for (const auto& p : parts) schedules.push_back(p.schedule);
  ShufflePlan out{compose(schedules), {}, nullptr, nullptr, nullptr};
  for (const auto& p : parts) out.provenance.insert(out.provenance.end(), p.provenance.begin(), p.provenance.end());

  const bool lazy = std::any_of(parts.begin(), parts.end(), [](const ShufflePlan& p) {
    return p.lazy_provenance || p.lazy_stages || p.lazy_fragments;
  });
  if (!lazy) return out;
  auto shared = std::make_shared<const std::vector<ShufflePlan>>(parts);
  auto window = [count = parts.size()](std::size_t i) {
    return Interval(Rational(static_cast<long>(i), static_cast<long>(count)),
                    Rational(static_cast<long>(i + 1), static_cast<long>(count)));
  };
  out.lazy_provenance = [shared](Index bound) {
    std::vector<ProvenanceEntry> all;
    for (const auto& p : *shared) {
      auto e = p.provenance_up_to(bound);
      all.insert(all.end(), e.begin(), e.end());
    }
    return all;
  };
  out.lazy_stages = [shared, window](Index bound) {
    std::vector<StageNote> all;
    for (std::size_t i = 0; i < shared->size(); ++i) {
      const Interval w = window(i);
      for (const auto& s : (*shared)[i].stages_up_to(bound)) {
        const Interval t = sub_window(w, Interval(s.t0, s.t1));
        all.push_back({s.label, t.lo(), t.hi()});
      }
    }
    return all;
  };
  out.lazy_fragments = [shared, window](Index bound) {
    std::vector<FragmentInfo> all;
    for (std::size_t i = 0; i < shared->size(); ++i)
      for (auto f : (*shared)[i].fragments_up_to(bound)) {
        f.block.time = sub_window(window(i), f.block.time);
        all.push_back(std::move(f));
      }
    return all;
  };
  return out;
}

ShufflePlan plan_reverse(const ShufflePlan& plan) {
  ShufflePlan out{reverse(plan.schedule), {}, nullptr, nullptr, nullptr};
  auto flip = [](std::vector<ProvenanceEntry> entries) {
    std::reverse(entries.begin(), entries.end());
    for (auto& e : entries) {
      if (!e.params.is_object()) e.params = Json::object();
      e.params["reversed"] = !e.params.value("reversed", false);
    }
    return entries;
  };
  out.provenance = flip(plan.provenance);
  if (plan.lazy_provenance) out.lazy_provenance = [plan, flip](Index b) { return flip(plan.provenance_up_to(b)); };
  if (plan.lazy_stages)
    out.lazy_stages = [plan](Index b) {
      std::vector<StageNote> all;
      auto notes = plan.stages_up_to(b);
      for (auto it = notes.rbegin(); it != notes.rend(); ++it)
        all.push_back({it->label + " (reversed)", Rational(1) - it->t1, Rational(1) - it->t0});
      return all;
    };
  if (plan.lazy_fragments)
    out.lazy_fragments = [plan](Index b) {
      auto frags = plan.fragments_up_to(b);
      for (auto& f : frags) f.block.time = flipped(f.block.time);
      return frags;
    };
  return out;
}

ShufflePlan plan_embed_space(const ShufflePlan& plan, const Cube& block) {
  ShufflePlan out = plan;
  out.schedule = embed_space(plan.schedule, block);
  if (plan.lazy_fragments) {
    const AffineCubeMap map = canonical_affine(Cube::unit(block.dim()), block);
    out.lazy_fragments = [plan, map](Index b) {
      auto frags = plan.fragments_up_to(b);
      for (auto& f : frags) f.block.space = map.apply(f.block.space);
      return frags;
    };
  }
  return out;
}

// --- shrinking -------------------------------------------------------------------

CubeSchedule shrink_schedule(const NDomain& parent, const SubdomainWitness& child) {
  if (!(parent.indices() == child.child.indices()) || parent.dim() != child.child.dim())
    throw ShuffleError("shrink_schedule: witness does not match the parent domain");
  if (auto bad = child.first_violation(64))
    throw ShuffleError("shrink_schedule: child cube " + std::to_string(*bad) + " is not inside its parent");
  const NDomain target = child.child;
  return CubeSchedule(
      parent.dim(), parent.indices(),
      [parent, target](Index k) { return CubePath::linear(parent.cube(k), target.cube(k)); }, parent, target, {},
      {{"shrink", Rational(0), Rational(1)}});
}

// --- finite Eckmann-Hilton shuffle ------------------------------------------------

std::vector<Interval> eh_intervals(const NDomain& domain) {
  if (!domain.is_finite()) throw ShuffleError("eh_shuffle needs a finite domain");
  const auto& members = domain.indices().members();
  const std::size_t m = members.size();
  const std::size_t last = domain.dim() - 1;
  if (m == 0) return {};
  Rational ell = domain.cube(members.front()).axis(last).length();
  for (Index k : members) ell = min(ell, domain.cube(k).axis(last).length());
  const Rational w = ell / Rational(static_cast<long>(2 * m * (m + 1)));
  std::vector<Interval> chosen;
  for (Index k : members) {
    const Interval j = domain.cube(k).axis(last);
    Rational s = j.lo();
    for (bool moved = true; moved;) {
      moved = false;
      for (const auto& c : chosen)
        if (c.lo() <= s + w && s <= c.hi()) {
          s = c.hi() + w;
          moved = true;
        }
    }
    if (s + w > j.hi()) throw ShuffleError("eh_shuffle: interval selection ran out of room");
    chosen.emplace_back(s, s + w);
  }
  return chosen;
}

NDomain slab_domain(std::size_t n, const std::vector<Index>& indices, const Permutation& phi) {
  const long m = static_cast<long>(indices.size());
  const Permutation inv = phi.inverse();
  std::vector<Cube> cubes;
  for (std::size_t p = 1; p <= indices.size(); ++p) {
    const long slot = static_cast<long>(inv(p));
    cubes.push_back(Cube::slab(n, Rational(slot - 1, m), Rational(slot, m)));
  }
  return NDomain::finite(n, indices, std::move(cubes));
}

ShufflePlan eh_shuffle(const NDomain& domain, const Permutation& phi) {
  if (!domain.is_finite()) throw ShuffleError("eh_shuffle needs a finite domain");
  const auto& members = domain.indices().members();
  const std::size_t m = members.size();
  if (phi.size() != m) throw ShuffleError("eh_shuffle: permutation size differs from the domain size");
  const std::size_t n = domain.dim();
  const auto iv = eh_intervals(domain);
  const NDomain target = slab_domain(n, members, phi);
  std::map<Index, CubePath> paths;
  for (std::size_t p = 0; p < m; ++p) {
    const Index k = members[p];
    const Cube r = domain.cube(k);
    const Cube d = target.cube(k);
    std::vector<Interval> a = r.axes(), b(n, Interval::unit()), c(n, Interval::unit());
    a[n - 1] = b[n - 1] = c[n - 1] = iv[p];
    c[0] = d.axis(0);
    paths.emplace(k, CubePath({{Rational(0), r},
                               {Rational(1, 4), Cube(a)},
                               {Rational(1, 2), Cube(b)},
                               {Rational(3, 4), Cube(c)},
                               {Rational(1), d}})
                         .simplified());
  }
  Json ivs = Json::array();
  for (const auto& i : iv) ivs.push_back(interval_json(i));
  return plan_of(CubeSchedule::from_paths(domain, target, std::move(paths), {},
                                          {{"eh: pinch", Rational(0), Rational(1, 4)},
                                           {"eh: widen", Rational(1, 4), Rational(1, 2)},
                                           {"eh: slot", Rational(1, 2), Rational(3, 4)},
                                           {"eh: grow", Rational(3, 4), Rational(1)}}),
                 "eh_shuffle", {{"indices", members}, {"phi", phi.images()}, {"intervals", ivs}});
}

// --- two-cycle swap ---------------------------------------------------------------

namespace {

void require_same_shape(const NDomain& r, const NDomain& s) {
  if (r.dim() != s.dim()) throw ShuffleError("domains differ in dimension");
  if (!(r.indices() == s.indices())) throw ShuffleError("domains have different index sets");
}

Cube centred_cube(const Point& c, const Rational& side) {
  std::vector<Interval> axes;
  for (const auto& x : c) axes.emplace_back(x - side / 2, x + side / 2);
  return Cube(std::move(axes));
}

}  // namespace

ShufflePlan two_cycle_swap(const NDomain& r, const NDomain& s, Index k0, const std::vector<Index>& fixed_in) {
  require_same_shape(r, s);
  if (!r.is_finite()) throw ShuffleError("two_cycle_swap needs finite domains");
  const auto fixed = sorted_unique(fixed_in);
  const auto& members = r.indices().members();
  if (!r.indices().contains(k0)) throw ShuffleError("two_cycle_swap: k0 not in the index set");
  if (contains_index(fixed, k0)) throw ShuffleError("two_cycle_swap: k0 is fixed");
  for (Index k : fixed)
    if (!r.indices().contains(k)) throw ShuffleError("two_cycle_swap: fixed index outside the index set");
  for (Index k : members)
    if (k != k0 && !(r.cube(k) == s.cube(k)))
      throw ShuffleError("two_cycle_swap: domains differ away from k0 (index " + std::to_string(k) + ")");

  std::vector<Cube> obstacles;
  for (Index k : fixed) obstacles.push_back(r.cube(k));
  if (!complement_connected(r.dim(), obstacles)) throw ShuffleError("complement disconnected");
  if (r.cube(k0) == s.cube(k0))
    return plan_of(CubeSchedule::constant(r, fixed), "two_cycle_swap", {{"k0", k0}, {"constant", true}});

  std::vector<Index> bystanders;
  for (Index k : members)
    if (k != k0 && !contains_index(fixed, k)) bystanders.push_back(k);

  bool stash = false;
  std::optional<Corridor> corridor;
  {
    auto blocked = obstacles;
    for (Index k : bystanders) blocked.push_back(r.cube(k));
    try {
      corridor = polygonal_corridor(r.cube(k0), s.cube(k0), blocked);
    } catch (const GeometryError&) {
      stash = true;
    }
  }
  if (stash) {
    auto blocked = obstacles;
    for (Index k : bystanders) blocked.push_back(r.cube(k).scaled_about_center(Rational(1, 2)));
    try {
      corridor = polygonal_corridor(r.cube(k0), s.cube(k0), blocked);
    } catch (const GeometryError& e) {
      throw ShuffleError(std::string("two_cycle_swap: no corridor: ") + e.what());
    }
  }
  const Rational side = corridor->clearance / 2;
  const auto& cells = corridor->cells;
  std::vector<Keyframe> mover{{Rational(0), r.cube(k0)}};
  const long steps = static_cast<long>(cells.size());
  for (long i = 0; i < steps; ++i) {
    const Rational t = steps == 1 ? Rational(1, 3) : Rational(1, 3) + Rational(i, 3 * (steps - 1));
    mover.push_back({t, centred_cube(cells[i].center(), side)});
  }
  if (steps == 1) mover.push_back({Rational(2, 3), mover.back().cube});
  mover.push_back({Rational(1), s.cube(k0)});

  std::map<Index, CubePath> paths;
  paths.emplace(k0, CubePath(std::move(mover)).simplified());
  for (Index k : members) {
    if (k == k0) continue;
    const Cube c = r.cube(k);
    if (stash && !contains_index(fixed, k)) {
      const Cube small = c.scaled_about_center(Rational(1, 2));
      paths.emplace(k, CubePath({{Rational(0), c}, {Rational(1, 3), small}, {Rational(2, 3), small}, {Rational(1), c}}));
    } else {
      paths.emplace(k, CubePath::constant(c));
    }
  }
  Json cell_json = Json::array();
  for (const auto& c : cells) cell_json.push_back(to_json(c));
  return plan_of(CubeSchedule::from_paths(r, s, std::move(paths), fixed,
                                          {{"two-cycle: shrink", Rational(0), Rational(1, 3)},
                                           {"two-cycle: transit", Rational(1, 3), Rational(2, 3)},
                                           {"two-cycle: grow", Rational(2, 3), Rational(1)}}),
                 "two_cycle_swap",
                 {{"k0", k0},
                  {"corridor", cell_json},
                  {"clearance", to_json(corridor->clearance)},
                  {"stashed_bystanders", stash ? Json(bystanders) : Json::array()}});
}

// --- finite case ------------------------------------------------------------------

ShufflePlan finite_shuffle(const NDomain& r, const NDomain& s, const std::vector<Index>& fixed_in) {
  require_same_shape(r, s);
  if (!r.is_finite()) throw ShuffleError("finite_shuffle needs finite domains");
  const auto fixed = sorted_unique(fixed_in);
  const auto& members = r.indices().members();
  const std::size_t n = r.dim();
  for (Index k : fixed) {
    if (!r.indices().contains(k)) throw ShuffleError("fixed index " + std::to_string(k) + " not in the index set");
    if (!(r.cube(k) == s.cube(k))) throw ShuffleError("fixed index " + std::to_string(k) + " moves");
  }
  if (r.same_as(s)) return plan_of(CubeSchedule::constant(r, fixed), "finite_shuffle", {{"constant", true}});

  if (fixed.empty()) {
    const auto id = Permutation::identity(members.size());
    return plan_sequence({eh_shuffle(r, id), plan_reverse(eh_shuffle(s, id))});
  }

  std::vector<Cube> obstacles;
  for (Index k : fixed) obstacles.push_back(r.cube(k));
  if (!complement_connected(n, obstacles)) throw ShuffleError("complement disconnected");

  std::vector<Index> moving;
  for (Index k : members)
    if (!contains_index(fixed, k)) moving.push_back(k);

  // Shrink moving cubes to opposite-corner half cells of a common grid so no R'_k meets any S'_k'.
  std::vector<Cube> faces;
  for (Index k : members) {
    faces.push_back(r.cube(k));
    faces.push_back(s.cube(k));
  }
  std::vector<const Cube*> gens;
  for (const auto& c : faces) gens.push_back(&c);
  const Grid grid(n, gens);
  auto corner_half = [&](const Cube& c, bool upper) {
    const Cube cell = grid.cell(grid.cells_inside(c).front());
    std::vector<Interval> axes;
    for (const auto& a : cell.axes())
      axes.push_back(upper ? Interval(a.midpoint(), a.hi()) : Interval(a.lo(), a.midpoint()));
    return Cube(std::move(axes));
  };
  std::vector<Cube> rs, ss;
  for (Index k : members) {
    const bool mv = !contains_index(fixed, k);
    rs.push_back(mv ? corner_half(r.cube(k), false) : r.cube(k));
    ss.push_back(mv ? corner_half(s.cube(k), true) : s.cube(k));
  }
  const NDomain r1 = NDomain::finite(n, members, rs);
  const NDomain s1 = NDomain::finite(n, members, ss);

  std::vector<ShufflePlan> parts;
  parts.push_back(plan_of(shrink_schedule(r, make_witness(r, r1)), "shrink", {{"to", "lower half cells"}}));
  std::vector<Cube> current = rs;
  for (Index k : moving) {
    const NDomain before = NDomain::finite(n, members, current);
    current[r.indices().rank(k) - 1] = ss[r.indices().rank(k) - 1];
    const NDomain after = NDomain::finite(n, members, current);
    parts.push_back(two_cycle_swap(before, after, k, fixed));
  }
  parts.push_back(
      plan_reverse(plan_of(shrink_schedule(s, make_witness(s, s1)), "shrink", {{"to", "upper half cells"}})));
  ShufflePlan out = plan_sequence(parts);
  out.schedule = out.schedule.with_fixed(fixed);
  return out;
}

// --- n-twist ------------------------------------------------------------------------

Permutation twist_permutation(std::size_t n) {
  std::size_t cells = 1;
  for (std::size_t i = 0; i < n; ++i) cells *= 3;
  const Index centre = (cells + 1) / 2;
  std::vector<Index> img(cells);
  for (Index j = 1; j <= cells; ++j) img[j - 1] = j == 1 ? centre : (j <= centre ? j - 1 : j);
  return Permutation(img);
}

namespace {

/// One n-twist about a pivot cube: refine, carry the 3^n cells through an EH shuffle, widen slot 1 to [0, rho].
class TwistStage {
 public:
  TwistStage(const Cube& pivot, Rational rho)
      : n_(pivot.dim()),
        rho_(std::move(rho)),
        pivot_(pivot),
        sub_(subdivide(pivot)),
        cells_(NDomain::finite(n_, sub_.cells)),
        plan_(eh_shuffle(cells_, twist_permutation(n_))) {
    slot_ = Rational(1) / Rational(static_cast<long>(sub_.cells.size()));
    for (std::size_t j = 1; j <= sub_.cells.size(); ++j) cell_paths_.push_back(plan_.schedule.path(j));
  }

  const Cube& pivot() const { return pivot_; }
  const Rational& rho() const { return rho_; }
  const ShufflePlan& cell_plan() const { return plan_; }

  /// Proper refinement with every kept cube pushed off its cell boundary.
  std::pair<std::size_t, Cube> refine(const Cube& x) const {
    for (std::size_t j = 1; j <= sub_.cells.size(); ++j) {
      const Cube& c = sub_.cell(j);
      if (c.contains(x)) return {j, c.strictly_contains(x) ? x : x.scaled_about_center(Rational(1, 2))};
    }
    for (std::size_t j = 1; j <= sub_.cells.size(); ++j)
      if (auto part = interior_intersection(x, sub_.cell(j))) return {j, part->scaled_about_center(Rational(1, 2))};
    throw ShuffleError("n-twist: cube lies outside the unit cube");
  }

  Cube widen(const Cube& c) const {
    std::vector<Interval> axes = c.axes();
    auto map = [&](const Rational& x) {
      if (x <= slot_) return x * rho_ / slot_;
      return rho_ + (x - slot_) * (Rational(1) - rho_) / (Rational(1) - slot_);
    };
    axes[0] = Interval(map(c.axis(0).lo()), map(c.axis(0).hi()));
    return Cube(std::move(axes));
  }

  Cube residual(const Cube& c) const {
    std::vector<Interval> axes = c.axes();
    const Rational w = Rational(1) - rho_;
    axes[0] = Interval((c.axis(0).lo() - rho_) / w, (c.axis(0).hi() - rho_) / w);
    return Cube(std::move(axes));
  }

  CubePath path(const Cube& x, bool is_pivot) const {
    if (is_pivot) {
      const CubePath& p = cell_paths_[sub_.center_index - 1];
      return join({CubePath::constant(x), p, CubePath::linear(p.end(), widen(p.end()))}, breaks());
    }
    const auto [j, refined] = refine(x);
    const CubePath carried = carried_path(cell_paths_[j - 1], refined);
    return join({CubePath::linear(x, refined), carried, CubePath::linear(carried.end(), widen(carried.end()))},
                breaks());
  }

  /// Normalized cube at the start of the next stage.
  Cube advance(const Cube& x) const {
    const auto [j, refined] = refine(x);
    const Cube end = canonical_affine(sub_.cell(j), cells_slab(j)).apply(refined);
    return residual(widen(end));
  }

  Cube pivot_end() const { return Cube::slab(n_, Rational(0), rho_); }

 private:
  static std::vector<Rational> breaks() { return {Rational(0), Rational(1, 6), Rational(5, 6), Rational(1)}; }
  Cube cells_slab(std::size_t j) const { return plan_.schedule.target().cube(j); }

  std::size_t n_;
  Rational rho_;
  Cube pivot_;
  Subdivision sub_;
  NDomain cells_;
  ShufflePlan plan_;
  Rational slot_;
  std::vector<CubePath> cell_paths_;
};

Cube stage_block(std::size_t n, Index m) {
  return Cube::slab(n, Rational(1) - Rational(1, static_cast<long>(m)), Rational(1));
}

Interval stage_window(Index m) {
  const long mm = static_cast<long>(m);
  return Interval(Rational(1) - Rational(1, mm), Rational(1) - Rational(1, mm + 1));
}

Cube standard_slab(std::size_t n, Index m) {
  const long mm = static_cast<long>(m);
  return Cube::slab(n, Rational(mm - 1, mm), Rational(mm, mm + 1));
}

Json twist_params(const TwistStage& st) {
  return {{"rho", to_json(st.rho())},
          {"pivot", to_json(st.pivot())},
          {"phi", twist_permutation(st.pivot().dim()).images()},
          {"centre", (twist_permutation(st.pivot().dim())(1))}};
}

/// Shared lazily-grown state of an infinite gluing.
struct GluingState {
  std::size_t n;
  NDomain source;
  IndexSet idx;
  Rational shrink_scale{1, 2};
  std::mutex mutex;
  std::vector<std::shared_ptr<const TwistStage>> stages;

  GluingState(NDomain r) : n(r.dim()), source(r), idx(r.indices()) {}

  Cube normalized_start(Index k) const { return source.cube(k).scaled_about_center(shrink_scale); }

  std::vector<std::shared_ptr<const TwistStage>> ensure(std::size_t m) {
    std::lock_guard lock(mutex);
    while (stages.size() < m) {
      const std::size_t i = stages.size() + 1;
      Cube x = normalized_start(idx.nth(i));
      for (const auto& st : stages) x = st->advance(x);
      stages.push_back(std::make_shared<const TwistStage>(x, Rational(1, static_cast<long>(i + 1))));
    }
    return {stages.begin(), stages.begin() + static_cast<std::ptrdiff_t>(m)};
  }

  CubePath path(Index k) {
    const std::size_t r = idx.rank(k);
    const auto st = ensure(r);
    std::vector<CubePath> parts;
    std::vector<Rational> breaks{Rational(0)};
    Cube x = normalized_start(k);
    for (std::size_t i = 1; i <= r; ++i) {
      CubePath p = st[i - 1]->path(x, i == r);
      if (i == 1) p = join({CubePath::linear(source.cube(k), x), p}, {Rational(0), Rational(1, 7), Rational(1)});
      parts.push_back(p.mapped(canonical_affine(Cube::unit(n), stage_block(n, i))));
      breaks.push_back(stage_window(i).hi());
      if (i < r) x = st[i - 1]->advance(x);
    }
    parts.push_back(CubePath::constant(standard_slab(n, r)));
    breaks.push_back(Rational(1));
    return join(parts, breaks);
  }
};

}  // namespace

NTwist ntwist(const NDomain& r, const Rational& rho) {
  if (r.is_finite() && r.indices().members().empty()) throw ShuffleError("ntwist: empty domain");
  if (rho.sign() <= 0 || rho >= Rational(1)) throw ShuffleError("ntwist: rho must lie in (0,1)");
  const Index first = r.indices().nth(1);
  const Cube pivot = r.cube(first);
  if (!pivot.strictly_inside_unit()) throw ShuffleError("ntwist: first cube touches the boundary of I^n");
  auto st = std::make_shared<const TwistStage>(pivot, rho);
  const std::size_t n = r.dim();
  const NDomain target = lazy_domain(
      n, r.indices(), [st, r, first](Index k) { return st->path(r.cube(k), k == first).end(); },
      "n-twist image");
  const NDomain residual =
      lazy_domain(n, r.indices().without({first}), [st, r](Index k) { return st->advance(r.cube(k)); }, "n-twist residual");
  CubeSchedule sched(
      n, r.indices(), [st, r, first](Index k) { return st->path(r.cube(k), k == first); }, r, target, {},
      {{"n-twist: refine", Rational(0), Rational(1, 6)},
       {"n-twist: cell shuffle", Rational(1, 6), Rational(5, 6)},
       {"n-twist: widen", Rational(5, 6), Rational(1)}});
  return NTwist{plan_of(sched, "ntwist", twist_params(*st)), residual, twist_permutation(n)};
}

ShufflePlan infinite_to_standard(const NDomain& r) {
  if (r.is_finite()) throw ShuffleError("infinite_to_standard needs an infinite domain");
  const std::size_t n = r.dim();
  auto state = std::make_shared<GluingState>(r);
  CubeSchedule sched(
      n, r.indices(), [state](Index k) { return state->path(k); }, r, standard_domain_on(n, r.indices()), {},
      {{"infinite gluing", Rational(0), Rational(1)}});
  ShufflePlan plan = plan_of(sched, "infinite_to_standard",
                             {{"shrink_scale", to_json(state->shrink_scale)}, {"rho", "1/(m+1)"}});
  const ProvenanceEntry head = plan.provenance.front();
  plan.lazy_provenance = [state, head](Index bound) {
    std::vector<ProvenanceEntry> out{head};
    const auto st = state->ensure(bound);
    for (std::size_t m = 1; m <= st.size(); ++m) {
      Json p = twist_params(*st[m - 1]);
      p["stage"] = m;
      p["pivot_index"] = state->idx.nth(m);
      p["block"] = to_json(stage_block(state->n, m));
      p["window"] = interval_json(stage_window(m));
      out.push_back({"ntwist", p});
    }
    return out;
  };
  plan.lazy_stages = [](Index bound) {
    std::vector<StageNote> out;
    for (Index m = 1; m <= bound; ++m) {
      const Interval w = stage_window(m);
      out.push_back({(m == 1 ? "shrink + n-twist " : "n-twist ") + std::to_string(m), w.lo(), w.hi()});
    }
    return out;
  };
  plan.lazy_fragments = [state](Index bound) {
    std::vector<FragmentInfo> out;
    for (Index m = 1; m <= bound; ++m) {
      const Index p = state->idx.nth(m);
      out.push_back({"H_" + std::to_string(m), {stage_block(state->n, m), stage_window(m)}, p, false});
      out.push_back({"G_" + std::to_string(m),
                     {standard_slab(state->n, m), Interval(stage_window(m).hi(), Rational(1))},
                     p,
                     true});
    }
    return out;
  };
  return plan;
}

std::vector<FragmentInfo> gluing_blocks(std::size_t n, Index bound) {
  auto plan = infinite_to_standard(standard_domain(n));
  return plan.fragments_up_to(bound);
}

BlockTilingReport check_gluing_tiling(const std::vector<FragmentInfo>& blocks, Index bound) {
  BlockTilingReport rep;
  auto box = [](const FragmentInfo& f) {
    std::vector<Interval> axes = f.block.space.axes();
    axes.push_back(f.block.time);
    return Cube(std::move(axes));
  };
  std::vector<Cube> boxes;
  for (const auto& f : blocks) boxes.push_back(box(f));
  if (boxes.empty()) return rep;
  const std::size_t n = blocks.front().block.space.dim();
  const Rational edge = Rational(1) - Rational(1, static_cast<long>(bound + 1));
  std::vector<Interval> corner(n, Interval::unit());
  corner[0] = Interval(edge, Rational(1));
  corner.push_back(Interval(edge, Rational(1)));
  boxes.emplace_back(corner);
  Rational total = 0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    total += boxes[i].volume();
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      if (!interiors_disjoint(boxes[i], boxes[j])) {
        rep.ok = false;
        rep.message = "blocks " + std::to_string(i) + " and " + std::to_string(j) + " overlap";
        return rep;
      }
  }
  if (total != Rational(1)) {
    rep.ok = false;
    rep.message = "block volumes sum to " + total.str();
  }
  return rep;
}

ContinuityReport continuity_certificate(const ShufflePlan& plan, const KSequence& seq, const Rational& eps,
                                        Index bound) {
  ContinuityReport rep;
  rep.threshold = null_certificate(seq, eps);
  for (const auto& f : plan.fragments_up_to(std::max<Index>(bound, rep.threshold + 8))) {
    if (f.min_index < rep.threshold) continue;
    const Rational vb = f.single_index ? seq.bound(f.min_index) : seq.tail_bound(f.min_index - 1);
    ++rep.fragments_checked;
    rep.worst = max(rep.worst, vb);
    if (!(vb < eps)) rep.ok = false;
  }
  return rep;
}

// --- the full shuffle ----------------------------------------------------------------

namespace {

ShufflePlan unrestricted_infinite(const NDomain& r, const NDomain& s) {
  std::vector<ShufflePlan> parts;
  if (!is_standard(r)) parts.push_back(infinite_to_standard(r));
  if (!is_standard(s)) parts.push_back(plan_reverse(infinite_to_standard(s)));
  if (parts.empty()) return plan_of(CubeSchedule::constant(r), "constant");
  return plan_sequence(parts);
}

struct Auxiliary {
  Cube cube;
  std::optional<Index> k1;
  std::string method;
};

Auxiliary find_auxiliary(const NDomain& r, const NDomain& s, Index k0, const std::vector<Index>& fixed) {
  const Cube rk0 = r.cube(k0);
  const std::size_t n = r.dim();
  auto try_index = [&](Index k) -> std::optional<Auxiliary> {
    if (contains_index(fixed, k)) return std::nullopt;
    if (auto inter = interior_intersection(rk0, s.cube(k)))
      return Auxiliary{inter->scaled_about_center(Rational(1, 3)), k, ""};
    return std::nullopt;
  };
  if (s.has_locator()) {
    const std::vector<Rational> ticks{Rational(1, 2), Rational(1, 6), Rational(1, 3), Rational(2, 3), Rational(5, 6)};
    const auto to_r = canonical_affine(Cube::unit(n), rk0);
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= ticks.size();
    for (std::size_t code = 0; code < total; ++code) {
      Point p;
      for (std::size_t i = 0, c = code; i < n; ++i, c /= ticks.size()) p.push_back(ticks[c % ticks.size()]);
      for (Index k : s.locate(to_r.apply(p)))
        if (auto a = try_index(k)) {
          a->method = "probe";
          return *a;
        }
    }
  } else {
    for (Index k : s.indices().indices_up_to(64))
      if (auto a = try_index(k)) {
        a->method = "scan";
        return *a;
      }
  }
  return Auxiliary{rk0.scaled_about_center(Rational(1, 3)), std::nullopt, "fallback"};
}

ShufflePlan restricted_infinite(const NDomain& r, const NDomain& s, const std::vector<Index>& fixed) {
  const std::size_t n = r.dim();
  const IndexSet idx = r.indices();
  const IndexSet moving = idx.without(fixed);
  std::vector<Cube> fcubes;
  for (Index k : fixed) fcubes.push_back(r.cube(k));
  if (!complement_connected(n, fcubes)) throw ShuffleError("complement disconnected");

  const Index k0 = moving.nth(1);
  const Auxiliary aux = find_auxiliary(r, s, k0, fixed);
  const Cube a = aux.cube;
  std::vector<Cube> marked{a};
  marked.insert(marked.end(), fcubes.begin(), fcubes.end());
  const GridDecomposition dec = decomposition_with_marked_cubes(n, marked);
  auto gcells = std::make_shared<const std::vector<Cube>>(dec.elements.begin() + static_cast<std::ptrdiff_t>(dec.marked_count),
                                                           dec.elements.end());
  const std::size_t g = gcells->size();

  // Carrier: every free cell moves into its own first-axis slab of A; fixed cubes stay.
  std::vector<Index> cidx;
  std::vector<Cube> from, to;
  for (std::size_t j = 0; j < g; ++j) {
    cidx.push_back(j + 1);
    from.push_back((*gcells)[j]);
    std::vector<Interval> axes = a.axes();
    const Rational w = a.axis(0).length() / Rational(static_cast<long>(g));
    axes[0] = Interval(a.axis(0).lo() + w * Rational(static_cast<long>(j)),
                       a.axis(0).lo() + w * Rational(static_cast<long>(j + 1)));
    to.emplace_back(axes);
  }
  std::vector<Index> cfixed;
  for (std::size_t i = 0; i < fcubes.size(); ++i) {
    cidx.push_back(g + i + 1);
    cfixed.push_back(g + i + 1);
    from.push_back(fcubes[i]);
    to.push_back(fcubes[i]);
  }
  const ShufflePlan carrier =
      finite_shuffle(NDomain::finite(n, cidx, from), NDomain::finite(n, cidx, to), cfixed);
  std::vector<CubePath> carrier_paths;
  for (std::size_t j = 1; j <= g; ++j) carrier_paths.push_back(carrier.schedule.path(j));
  auto cpaths = std::make_shared<const std::vector<CubePath>>(std::move(carrier_paths));

  auto settle = [gcells](const Cube& c) -> std::pair<std::size_t, Cube> {
    for (std::size_t j = 0; j < gcells->size(); ++j)
      if (auto part = interior_intersection(c, (*gcells)[j])) return {j, *part};
    throw ShuffleError("restricted shuffle: a cube lies inside the auxiliary cube");
  };
  auto fixed_sorted = std::make_shared<const std::vector<Index>>(fixed);

  struct Side {
    NDomain original, shrunk, carried, normalized;
    CubeSchedule shrink, carry;
  };
  const AffineCubeMap to_unit = canonical_affine(a, Cube::unit(n));
  auto build_side = [&](const NDomain& d) {
    auto is_fixed = [fixed_sorted](Index k) { return contains_index(*fixed_sorted, k); };
    const NDomain shrunk = lazy_domain(
        n, idx, [d, settle, is_fixed](Index k) { return is_fixed(k) ? d.cube(k) : settle(d.cube(k)).second; },
        "restricted shrink");
    auto carry_path = [d, settle, cpaths, is_fixed](Index k) {
      if (is_fixed(k)) return CubePath::constant(d.cube(k));
      const auto [j, c] = settle(d.cube(k));
      return carried_path((*cpaths)[j], c);
    };
    const NDomain carried =
        lazy_domain(n, idx, [carry_path](Index k) { return carry_path(k).end(); }, "carried into auxiliary cube");
    const NDomain normalized = lazy_domain(
        n, moving, [carried, to_unit](Index k) { return to_unit.apply(carried.cube(k)); }, "auxiliary-normalized");
    CubeSchedule shrink(
        n, idx, [d, shrunk](Index k) { return CubePath::linear(d.cube(k), shrunk.cube(k)); }, d, shrunk,
        *fixed_sorted, {{"shrink", Rational(0), Rational(1)}});
    CubeSchedule carry(n, idx, carry_path, shrunk, carried, *fixed_sorted, {{"carry into A", Rational(0), Rational(1)}});
    return Side{d, shrunk, carried, normalized, shrink, carry};
  };
  const Side rs = build_side(r);
  const Side ss = build_side(s);

  ShufflePlan inner = plan_embed_space(unrestricted_infinite(rs.normalized, ss.normalized), a);
  const CubeSchedule inner_sched = inner.schedule;
  inner.schedule = CubeSchedule(
      n, idx,
      [inner_sched, fixed_sorted, r](Index k) {
        return contains_index(*fixed_sorted, k) ? CubePath::constant(r.cube(k)) : inner_sched.path(k);
      },
      rs.carried, ss.carried, fixed, inner_sched.stages());

  Json params{{"k0", k0},
              {"k1", aux.k1 ? Json(*aux.k1) : Json(nullptr)},
              {"auxiliary", to_json(a)},
              {"auxiliary_method", aux.method},
              {"fixed", fixed},
              {"decomposition_cells", dec.elements.size()}};
  ShufflePlan out = plan_sequence({plan_of(rs.shrink, "restricted: shrink", params), plan_of(rs.carry, "restricted: carry", {}),
                                   inner, plan_reverse(plan_of(ss.carry, "restricted: carry", {})),
                                   plan_reverse(plan_of(ss.shrink, "restricted: shrink", {}))});
  out.provenance.insert(out.provenance.begin() + 2, carrier.provenance.begin(), carrier.provenance.end());
  if (out.lazy_provenance) {
    auto lazy = out.lazy_provenance;
    out.lazy_provenance = [lazy, extra = carrier.provenance](Index b) {
      auto e = lazy(b);
      e.insert(e.begin() + 2, extra.begin(), extra.end());
      return e;
    };
  }
  out.schedule = out.schedule.with_fixed(fixed);
  return out;
}

}  // namespace

ShufflePlan shuffle(const NDomain& r, const NDomain& s, const std::vector<Index>& fixed_in) {
  require_same_shape(r, s);
  const auto fixed = sorted_unique(fixed_in);
  for (Index k : fixed) {
    if (!r.indices().contains(k)) throw ShuffleError("fixed index " + std::to_string(k) + " not in the index set");
    if (!(r.cube(k) == s.cube(k))) throw ShuffleError("fixed index " + std::to_string(k) + " moves");
  }
  ProvenanceEntry head{"shuffle",
                       {{"R", domain_to_json(r)}, {"S", domain_to_json(s)}, {"F", fixed}}};
  ShufflePlan plan = [&] {
    if (r.same_as(s)) return plan_of(CubeSchedule::constant(r, fixed), "constant");
    if (r.is_finite()) return finite_shuffle(r, s, fixed);
    if (fixed.empty()) return unrestricted_infinite(r, s);
    return restricted_infinite(r, s, fixed);
  }();
  plan.provenance.insert(plan.provenance.begin(), head);
  if (plan.lazy_provenance) {
    auto inner = plan.lazy_provenance;
    plan.lazy_provenance = [inner, head](Index b) {
      auto e = inner(b);
      e.insert(e.begin(), head);
      return e;
    };
  }
  return plan;
}

ShufflePlan permutation_plan(std::size_t n, const Permutation& phi) {
  return cubeshuffle::shuffle(standard_domain(n), permuted_standard_domain(n, phi));
}

ShufflePlan double_product_plan(std::size_t n) { return cubeshuffle::shuffle(interleaved_pair_domain(n), block_pair_domain(n)); }

ShufflePlan replay(const std::vector<ProvenanceEntry>& provenance) {
  if (provenance.empty() || provenance.front().lemma != "shuffle")
    throw ShuffleError("replay needs a leading shuffle entry");
  const Json& p = provenance.front().params;
  return cubeshuffle::shuffle(domain_from_json(p.at("R")), domain_from_json(p.at("S")), p.at("F").get<std::vector<Index>>());
}

}  // namespace cubeshuffle
