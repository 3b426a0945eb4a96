#include "cubeshuffle/domain.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <unordered_map>

namespace cubeshuffle {

// --- IndexSet ----------------------------------------------------------------

IndexSet::IndexSet(bool finite, std::vector<Index> list) : finite_(finite), list_(std::move(list)) {
  std::sort(list_.begin(), list_.end());
  if (std::adjacent_find(list_.begin(), list_.end()) != list_.end())
    throw DomainError("index set has duplicate entries");
  if (!list_.empty() && list_.front() == 0) throw DomainError("indices are 1-based");
}

IndexSet IndexSet::finite(std::vector<Index> members) { return IndexSet(true, std::move(members)); }

IndexSet IndexSet::range(Index first, Index last) {
  std::vector<Index> m;
  for (Index k = first; k <= last; ++k) m.push_back(k);
  return finite(std::move(m));
}

IndexSet IndexSet::naturals_except(std::vector<Index> excluded) { return IndexSet(false, std::move(excluded)); }

std::size_t IndexSet::size() const {
  if (!finite_) throw DomainError("size() of an infinite index set");
  return list_.size();
}

bool IndexSet::contains(Index k) const {
  if (k == 0) return false;
  const bool listed = std::binary_search(list_.begin(), list_.end(), k);
  return finite_ ? listed : !listed;
}

Index IndexSet::nth(std::size_t position) const {
  if (position == 0) throw DomainError("positions are 1-based");
  if (finite_) {
    if (position > list_.size()) throw DomainError("position beyond finite index set");
    return list_[position - 1];
  }
  Index candidate = position;
  for (Index e : list_)
    if (e <= candidate) ++candidate;
  return candidate;
}

std::size_t IndexSet::rank(Index k) const {
  if (!contains(k)) throw DomainError("index " + std::to_string(k) + " not in index set");
  if (finite_) return static_cast<std::size_t>(std::lower_bound(list_.begin(), list_.end(), k) - list_.begin()) + 1;
  const auto below = static_cast<std::size_t>(std::lower_bound(list_.begin(), list_.end(), k) - list_.begin());
  return k - below;
}

std::vector<Index> IndexSet::indices_up_to(Index bound) const {
  if (finite_) return list_;
  std::vector<Index> out;
  for (Index k = 1; k <= bound; ++k)
    if (contains(k)) out.push_back(k);
  return out;
}

std::vector<Index> IndexSet::first(std::size_t count) const {
  std::vector<Index> out;
  if (finite_) {
    out.assign(list_.begin(), list_.begin() + static_cast<std::ptrdiff_t>(std::min(count, list_.size())));
    return out;
  }
  for (Index k = 1; out.size() < count; ++k)
    if (contains(k)) out.push_back(k);
  return out;
}

IndexSet IndexSet::without(const std::vector<Index>& removed) const {
  if (finite_) {
    std::vector<Index> keep;
    for (Index k : list_)
      if (std::find(removed.begin(), removed.end(), k) == removed.end()) keep.push_back(k);
    return finite(std::move(keep));
  }
  std::vector<Index> ex = list_;
  for (Index k : removed)
    if (contains(k)) ex.push_back(k);
  return naturals_except(std::move(ex));
}

// --- Permutation ---------------------------------------------------------------

Permutation::Permutation(std::vector<Index> images) : images_(std::move(images)) {
  std::vector<Index> sorted = images_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] != i + 1) throw DomainError("not a permutation of 1.." + std::to_string(images_.size()));
}

Permutation Permutation::identity(std::size_t m) {
  std::vector<Index> im(m);
  std::iota(im.begin(), im.end(), Index{1});
  return Permutation(std::move(im));
}

Permutation Permutation::transposition(Index a, Index b) {
  auto p = identity(std::max(a, b));
  std::swap(p.images_[a - 1], p.images_[b - 1]);
  return p;
}

Permutation Permutation::inverse() const {
  std::vector<Index> inv(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) inv[images_[i] - 1] = i + 1;
  return Permutation(std::move(inv));
}

Permutation Permutation::after(const Permutation& other) const {
  const std::size_t m = std::max(size(), other.size());
  std::vector<Index> im(m);
  for (Index k = 1; k <= m; ++k) im[k - 1] = (*this)(other(k));
  return Permutation(std::move(im));
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < images_.size(); ++i)
    if (images_[i] != i + 1) return false;
  return true;
}

// --- NDomain -------------------------------------------------------------------

struct NDomain::Impl {
  Impl(std::size_t dim, IndexSet idx) : n(dim), indices(std::move(idx)) {}
  std::size_t n;
  IndexSet indices;
  std::map<Index, Cube> table;  // finite domains
  Accessor accessor;            // infinite domains
  std::optional<Locator> locator;
  std::string certificate;
  Json descriptor;
  mutable std::mutex memo_mutex;
  mutable std::unordered_map<Index, Cube> memo;
};

NDomain::NDomain(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

NDomain NDomain::finite(std::size_t n, std::vector<Cube> cubes) {
  std::vector<Index> idx(cubes.size());
  std::iota(idx.begin(), idx.end(), Index{1});
  return finite(n, std::move(idx), std::move(cubes));
}

NDomain NDomain::finite(std::size_t n, std::vector<Index> indices, std::vector<Cube> cubes) {
  if (n < 2) throw DomainError("n-domains need n >= 2");
  if (indices.size() != cubes.size()) throw DomainError("index/cube count mismatch");
  auto impl = std::make_shared<Impl>(n, IndexSet::finite(indices));
  impl->certificate = "exhaustive";
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (cubes[i].dim() != n) throw DomainError("cube dimension differs from domain dimension");
    impl->table.emplace(indices[i], std::move(cubes[i]));
  }
  return NDomain(std::move(impl));
}

NDomain NDomain::rule(std::size_t n, IndexSet indices, Accessor accessor, std::optional<Locator> locator,
                      std::string certificate, Json descriptor) {
  if (n < 2) throw DomainError("n-domains need n >= 2");
  if (indices.is_finite()) {
    std::vector<Cube> cubes;
    for (Index k : indices.members()) cubes.push_back(accessor(k));
    return finite(n, indices.members(), std::move(cubes));
  }
  auto impl = std::make_shared<Impl>(n, std::move(indices));
  impl->accessor = std::move(accessor);
  impl->locator = std::move(locator);
  impl->certificate = std::move(certificate);
  impl->descriptor = std::move(descriptor);
  return NDomain(std::move(impl));
}

std::size_t NDomain::dim() const { return impl_->n; }
const IndexSet& NDomain::indices() const { return impl_->indices; }
bool NDomain::has_locator() const { return is_finite() || impl_->locator.has_value(); }
const std::string& NDomain::certificate() const { return impl_->certificate; }
const Json& NDomain::descriptor() const { return impl_->descriptor; }

Cube NDomain::cube(Index k) const {
  if (!impl_->indices.contains(k)) throw DomainError("index " + std::to_string(k) + " not in domain");
  if (is_finite()) return impl_->table.at(k);
  {
    std::lock_guard lock(impl_->memo_mutex);
    if (auto it = impl_->memo.find(k); it != impl_->memo.end()) return it->second;
  }
  Cube c = impl_->accessor(k);
  if (c.dim() != impl_->n) throw DomainError("rule produced a cube of the wrong dimension");
  std::lock_guard lock(impl_->memo_mutex);
  return impl_->memo.emplace(k, std::move(c)).first->second;
}

std::vector<Index> NDomain::locate(const Point& p) const {
  if (is_finite()) {
    std::vector<Index> out;
    for (const auto& [k, c] : impl_->table)
      if (c.contains(p)) out.push_back(k);
    return out;
  }
  if (!impl_->locator) throw DomainError("infinite domain without a point locator");
  auto out = (*impl_->locator)(p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::pair<Index, Cube>> NDomain::cubes_up_to(Index bound) const {
  std::vector<std::pair<Index, Cube>> out;
  for (Index k : indices().indices_up_to(bound)) out.emplace_back(k, cube(k));
  return out;
}

bool NDomain::same_as(const NDomain& other) const {
  if (impl_ == other.impl_) return true;
  if (dim() != other.dim() || !(indices() == other.indices())) return false;
  if (is_finite()) {
    for (Index k : indices().members())
      if (!(cube(k) == other.cube(k))) return false;
    return true;
  }
  return !descriptor().is_null() && descriptor() == other.descriptor();
}

// --- validation ------------------------------------------------------------------

ValidationReport validate(const NDomain& domain, Index bound) {
  ValidationReport report;
  report.exhaustive = domain.is_finite();
  report.certificate = domain.certificate();
  const auto cubes = domain.cubes_up_to(bound);
  report.checked_indices = cubes.size();
  for (std::size_t i = 0; i < cubes.size(); ++i)
    for (std::size_t j = i + 1; j < cubes.size(); ++j)
      if (!interiors_disjoint(cubes[i].second, cubes[j].second)) {
        report.valid = false;
        report.offending = std::make_pair(cubes[i].first, cubes[j].first);
        return report;
      }
  return report;
}

std::optional<Index> SubdomainWitness::first_violation(Index bound) const {
  for (Index k : parent.indices().indices_up_to(bound))
    if (!parent.cube(k).contains(child.cube(k))) return k;
  return std::nullopt;
}

SubdomainWitness make_witness(NDomain parent, NDomain child) {
  if (parent.dim() != child.dim() || !(parent.indices() == child.indices()))
    throw DomainError("sub-domain witness needs equal dimensions and index sets");
  return SubdomainWitness{std::move(parent), std::move(child)};
}

// --- derived domains ---------------------------------------------------------------

namespace {

Json domain_header(std::size_t n, const IndexSet& indices, const std::string& rule) {
  Json j{{"n", n}, {"index_set", indices.is_finite() ? "finite" : "nat"}, {"rule", rule}};
  if (!indices.is_finite() && !indices.members().empty()) j["excluded"] = indices.members();
  return j;
}

// Sub-domain obtained by a per-index shrinking rule; the locator is inherited and filtered.
NDomain derive(const NDomain& parent, std::function<Cube(Index, const Cube&)> fn, std::string certificate,
               Json descriptor) {
  if (parent.is_finite()) {
    std::vector<Cube> cubes;
    for (Index k : parent.indices().members()) cubes.push_back(fn(k, parent.cube(k)));
    return NDomain::finite(parent.dim(), parent.indices().members(), std::move(cubes));
  }
  auto accessor = [parent, fn](Index k) { return fn(k, parent.cube(k)); };
  std::optional<NDomain::Locator> locator;
  if (parent.has_locator()) {
    locator = [parent, accessor](const Point& p) {
      std::vector<Index> out;
      for (Index k : parent.locate(p))
        if (accessor(k).contains(p)) out.push_back(k);
      return out;
    };
  }
  if (!parent.descriptor().is_null()) descriptor["params"]["parent"] = parent.descriptor();
  else descriptor = nullptr;
  return NDomain::rule(parent.dim(), parent.indices(), std::move(accessor), std::move(locator), std::move(certificate),
                       std::move(descriptor));
}

std::vector<Index> standard_locate(const Point& p) {
  const Rational& s = p[0];
  if (s >= 1 || s < 0) return {};
  for (std::size_t i = 1; i < p.size(); ++i)
    if (p[i] < 0 || p[i] > 1) return {};
  Index k0 = std::max<Index>(1, to_u64((s / (Rational(1) - s)).ceil()));
  std::vector<Index> out;
  for (Index k = (k0 > 1 ? k0 - 1 : 1); k <= k0 + 1; ++k) {
    const Rational lo(static_cast<long>(k - 1), static_cast<long>(k));
    const Rational hi(static_cast<long>(k), static_cast<long>(k + 1));
    if (lo <= s && s <= hi) out.push_back(k);
  }
  return out;
}

Cube standard_cube(std::size_t n, Index k) {
  return Cube::slab(n, Rational(static_cast<long>(k - 1), static_cast<long>(k)),
                    Rational(static_cast<long>(k), static_cast<long>(k + 1)));
}

}  // namespace

NDomain standard_domain(std::size_t n) {
  return NDomain::rule(
      n, IndexSet::naturals(), [n](Index k) { return standard_cube(n, k); }, NDomain::Locator(standard_locate),
      "slab-tiling", domain_header(n, IndexSet::naturals(), "standard"));
}

NDomain standard_domain_on(std::size_t n, const IndexSet& indices) {
  if (indices.is_finite()) throw DomainError("standard_domain_on needs an infinite index set");
  if (indices.members().empty()) return standard_domain(n);
  return NDomain::rule(
      n, indices, [n, indices](Index k) { return standard_cube(n, indices.rank(k)); },
      NDomain::Locator([indices](const Point& p) {
        std::vector<Index> out;
        for (Index m : standard_locate(p)) out.push_back(indices.nth(m));
        return out;
      }),
      "slab-tiling", domain_header(n, indices, "standard"));
}

SubdomainWitness proper_refine(const NDomain& domain, Index k0) {
  const Cube center = domain.cube(k0);
  if (!center.strictly_inside_unit())
    throw DomainError("proper_refine: cube " + std::to_string(k0) + " touches the boundary of I^n");
  auto sub = std::make_shared<const Subdivision>(subdivide(center));
  Json desc = domain_header(domain.dim(), domain.indices(), "proper_refine");
  desc["params"] = {{"k0", k0}};
  auto child = derive(
      domain,
      [k0, sub](Index k, const Cube& c) -> Cube {
        if (k == k0 || sub->containing_cell(c)) return c;
        const auto j = sub->first_overlapping_cell(c);
        return *interior_intersection(c, sub->cell(*j));
      },
      domain.certificate(), std::move(desc));
  return make_witness(domain, std::move(child));
}

bool is_proper_at(const NDomain& domain, Index k0, Index bound) {
  const Cube center = domain.cube(k0);
  if (!center.strictly_inside_unit()) return false;
  const auto sub = subdivide(center);
  for (Index k : domain.indices().indices_up_to(bound))
    if (k != k0 && !sub.containing_cell(domain.cube(k))) return false;
  return true;
}

SubdomainWitness shrink_to_interior(const NDomain& domain, const Rational& scale) {
  Json desc = domain_header(domain.dim(), domain.indices(), "shrink_to_interior");
  desc["params"] = {{"scale", to_json(scale)}};
  auto child = derive(
      domain, [scale](Index, const Cube& c) { return c.scaled_about_center(scale); }, domain.certificate(),
      std::move(desc));
  return make_witness(domain, std::move(child));
}

NDomain adversarial_dense_domain(unsigned depth) {
  if (depth < 1) throw DomainError("adversarial_dense_domain needs depth >= 1");
  const long lattice = 1L << depth;
  const Rational quarter(1, 4 * lattice);
  auto slot = [&](long j) {
    const Rational q(j, lattice);
    return Interval(max(Rational(0), q - quarter), min(Rational(1), q + quarter));
  };
  // Staircase: column j holds squares in rows j and j+1 (mod lattice+1).
  std::vector<Cube> cubes;
  for (long j = 0; j <= lattice; ++j) {
    cubes.push_back(Cube({slot(j), slot(j)}));
    cubes.push_back(Cube({slot(j), slot((j + 1) % (lattice + 1))}));
  }
  return NDomain::finite(2, std::move(cubes));
}

NDomain adversarial_with_tail(unsigned depth) {
  const auto head = adversarial_dense_domain(depth);
  const long lattice = 1L << depth;
  const Rational quarter(1, 4 * lattice);
  const Rational q(2, lattice);
  const Cube box({Interval(0, quarter), Interval(q - quarter, min(Rational(1), q + quarter))});
  std::vector<Cube> cubes;
  for (Index k : head.indices().members()) cubes.push_back(head.cube(k));
  auto out = finite_plus_tail(2, std::move(cubes), box, standard_domain(2));
  return out;
}

NDomain interleaved_pair_domain(std::size_t n) {
  auto cube_of = [n](Index k) {
    const Index m = (k + 1) / 2;
    const Rational lo(static_cast<long>(m - 1), static_cast<long>(m));
    const Rational hi(static_cast<long>(m), static_cast<long>(m + 1));
    const Rational mid = (lo + hi) / 2;
    return k % 2 == 1 ? Cube::slab(n, lo, mid) : Cube::slab(n, mid, hi);
  };
  auto locator = [cube_of](const Point& p) {
    std::vector<Index> out;
    for (Index m : standard_locate(p))
      for (Index k : {2 * m - 1, 2 * m})
        if (cube_of(k).contains(p)) out.push_back(k);
    return out;
  };
  return NDomain::rule(n, IndexSet::naturals(), cube_of, NDomain::Locator(locator), "slab-tiling",
                       domain_header(n, IndexSet::naturals(), "interleaved"));
}

NDomain block_pair_domain(std::size_t n) {
  const auto left = canonical_affine(Cube::unit(n), Cube::slab(n, 0, Rational(1, 2)));
  const auto right = canonical_affine(Cube::unit(n), Cube::slab(n, Rational(1, 2), 1));
  auto cube_of = [n, left, right](Index k) {
    const Index m = (k + 1) / 2;
    return (k % 2 == 1 ? left : right).apply(standard_cube(n, m));
  };
  auto locator = [left, right](const Point& p) {
    std::vector<Index> out;
    if (p[0] <= Rational(1, 2))
      for (Index m : standard_locate(left.inverse().apply(p))) out.push_back(2 * m - 1);
    if (p[0] >= Rational(1, 2))
      for (Index m : standard_locate(right.inverse().apply(p))) out.push_back(2 * m);
    return out;
  };
  return NDomain::rule(n, IndexSet::naturals(), cube_of, NDomain::Locator(locator), "slab-tiling",
                       domain_header(n, IndexSet::naturals(), "block"));
}

NDomain permuted_standard_domain(std::size_t n, const Permutation& phi) {
  if (phi.is_identity()) return standard_domain(n);
  const Permutation inv = phi.inverse();
  Json desc = domain_header(n, IndexSet::naturals(), "permuted_standard");
  desc["params"] = {{"phi", phi.images()}};
  return NDomain::rule(
      n, IndexSet::naturals(), [n, phi](Index k) { return standard_cube(n, phi(k)); },
      NDomain::Locator([inv](const Point& p) {
        std::vector<Index> out;
        for (Index j : standard_locate(p)) out.push_back(inv(j));
        return out;
      }),
      "slab-tiling", std::move(desc));
}

NDomain image_domain(const NDomain& inner, const Cube& block) {
  const auto map = canonical_affine(Cube::unit(inner.dim()), block);
  if (inner.is_finite()) {
    std::vector<Cube> cubes;
    for (Index k : inner.indices().members()) cubes.push_back(map.apply(inner.cube(k)));
    return NDomain::finite(inner.dim(), inner.indices().members(), std::move(cubes));
  }
  std::optional<NDomain::Locator> locator;
  if (inner.has_locator())
    locator = [inner, map, block](const Point& p) {
      if (!block.contains(p)) return std::vector<Index>{};
      return inner.locate(map.inverse().apply(p));
    };
  Json desc = nullptr;
  if (!inner.descriptor().is_null()) {
    desc = domain_header(inner.dim(), inner.indices(), "image");
    desc["params"] = {{"block", to_json(block)}, {"inner", inner.descriptor()}};
  }
  return NDomain::rule(
      inner.dim(), inner.indices(), [inner, map](Index k) { return map.apply(inner.cube(k)); }, std::move(locator),
      inner.certificate(), std::move(desc));
}

NDomain finite_plus_tail(std::size_t n, std::vector<Cube> head, const Cube& tail_box, const NDomain& tail) {
  if (tail.is_finite() || !tail.indices().members().empty())
    throw DomainError("finite_plus_tail needs a tail indexed by N");
  for (std::size_t i = 0; i < head.size(); ++i)
    if (!interiors_disjoint(head[i], tail_box))
      throw DomainError("finite_plus_tail: head cube " + std::to_string(i + 1) + " meets the tail box");
  const Index m = head.size();
  const auto map = canonical_affine(Cube::unit(n), tail_box);
  auto shared_head = std::make_shared<const std::vector<Cube>>(head);
  auto accessor = [shared_head, m, map, tail](Index k) {
    return k <= m ? (*shared_head)[k - 1] : map.apply(tail.cube(k - m));
  };
  std::optional<NDomain::Locator> locator;
  if (tail.has_locator())
    locator = [shared_head, m, map, tail, tail_box](const Point& p) {
      std::vector<Index> out;
      for (Index k = 1; k <= m; ++k)
        if ((*shared_head)[k - 1].contains(p)) out.push_back(k);
      if (tail_box.contains(p))
        for (Index j : tail.locate(map.inverse().apply(p))) out.push_back(j + m);
      return out;
    };
  Json desc = nullptr;
  if (!tail.descriptor().is_null()) {
    desc = domain_header(n, IndexSet::naturals(), "finite_plus_tail");
    Json cubes = Json::array();
    for (const auto& c : head) cubes.push_back(to_json(c));
    desc["params"] = {{"head", cubes}, {"tail_box", to_json(tail_box)}, {"tail", tail.descriptor()}};
  }
  return NDomain::rule(n, IndexSet::naturals(), std::move(accessor), std::move(locator),
                       "head-exhaustive+tail:" + tail.certificate(), std::move(desc));
}

NDomain restrict_to(const NDomain& domain, const IndexSet& indices) {
  if (indices.is_finite()) {
    std::vector<Cube> cubes;
    for (Index k : indices.members()) cubes.push_back(domain.cube(k));
    return NDomain::finite(domain.dim(), indices.members(), std::move(cubes));
  }
  std::optional<NDomain::Locator> locator;
  if (domain.has_locator())
    locator = [domain, indices](const Point& p) {
      std::vector<Index> out;
      for (Index k : domain.locate(p))
        if (indices.contains(k)) out.push_back(k);
      return out;
    };
  Json desc = nullptr;
  if (!domain.descriptor().is_null()) {
    desc = domain_header(domain.dim(), indices, "restrict");
    desc["params"] = {{"inner", domain.descriptor()}};
  }
  return NDomain::rule(
      domain.dim(), indices, [domain](Index k) { return domain.cube(k); }, std::move(locator), domain.certificate(),
      std::move(desc));
}

}  // namespace cubeshuffle

namespace cubeshuffle {

Json domain_to_json(const NDomain& domain, Index bound) {
  if (domain.is_finite()) {
    Json cubes = Json::array();
    for (Index k : domain.indices().members()) cubes.push_back(to_json(domain.cube(k)));
    return Json{{"n", domain.dim()}, {"index_set", "finite"}, {"indices", domain.indices().members()}, {"cubes", cubes}};
  }
  if (!domain.descriptor().is_null()) return domain.descriptor();
  Json j{{"n", domain.dim()}, {"index_set", "nat"}, {"rule", "table"}, {"materialized_bound", bound}};
  if (!domain.indices().members().empty()) j["excluded"] = domain.indices().members();
  Json cubes = Json::object();
  for (const auto& [k, c] : domain.cubes_up_to(bound)) cubes[std::to_string(k)] = to_json(c);
  j["cubes"] = cubes;
  j["certificate"] = domain.certificate();
  return j;
}

NDomain domain_from_json(const Json& j) {
  if (!j.is_object()) throw DomainError("domain must be a JSON object");
  const std::size_t n = j.at("n").get<std::size_t>();
  const std::string index_set = j.value("index_set", std::string("finite"));
  const Json params = j.value("params", Json::object());
  if (index_set == "finite") {
    if (j.contains("rule")) {
      const auto rule = j.at("rule").get<std::string>();
      if (rule == "adversarial") {
        if (n != 2) throw DomainError("adversarial domains are 2-dimensional");
        return adversarial_dense_domain(params.at("depth").get<unsigned>());
      }
      throw DomainError("unknown finite domain rule '" + rule + "'");
    }
    std::vector<Cube> cubes;
    for (const auto& c : j.at("cubes")) cubes.push_back(cube_from_json(c));
    if (j.contains("indices")) return NDomain::finite(n, j.at("indices").get<std::vector<Index>>(), std::move(cubes));
    return NDomain::finite(n, std::move(cubes));
  }
  if (index_set != "nat") throw DomainError("index_set must be \"finite\" or \"nat\"");
  const IndexSet indices = IndexSet::naturals_except(j.value("excluded", std::vector<Index>{}));
  const std::string rule = j.at("rule").get<std::string>();
  if (rule == "standard") return standard_domain_on(n, indices);
  if (rule == "interleaved") return interleaved_pair_domain(n);
  if (rule == "block") return block_pair_domain(n);
  if (rule == "permuted_standard") return permuted_standard_domain(n, Permutation(params.at("phi").get<std::vector<Index>>()));
  if (rule == "adversarial_tail") return adversarial_with_tail(params.at("depth").get<unsigned>());
  if (rule == "finite_plus_tail") {
    std::vector<Cube> head;
    for (const auto& c : params.at("head")) head.push_back(cube_from_json(c));
    return finite_plus_tail(n, std::move(head), cube_from_json(params.at("tail_box")), domain_from_json(params.at("tail")));
  }
  if (rule == "image") return image_domain(domain_from_json(params.at("inner")), cube_from_json(params.at("block")));
  if (rule == "restrict") return restrict_to(domain_from_json(params.at("inner")), indices);
  if (rule == "shrink_to_interior")
    return shrink_to_interior(domain_from_json(params.at("parent")), rational_from_json(params.at("scale"))).child;
  if (rule == "proper_refine")
    return proper_refine(domain_from_json(params.at("parent")), params.at("k0").get<Index>()).child;
  if (rule == "table") {
    auto table = std::make_shared<std::map<Index, Cube>>();
    for (const auto& [key, c] : j.at("cubes").items()) table->emplace(std::stoull(key), cube_from_json(c));
    const Index bound = j.value("materialized_bound", Index{0});
    return NDomain::rule(
        n, indices,
        [table, bound](Index k) -> Cube {
          auto it = table->find(k);
          if (it == table->end())
            throw DomainError("index " + std::to_string(k) + " beyond materialized bound " + std::to_string(bound));
          return it->second;
        },
        std::nullopt, j.value("certificate", std::string("materialized")), nullptr);
  }
  throw DomainError("unknown domain rule '" + rule + "'");
}

}  // namespace cubeshuffle
