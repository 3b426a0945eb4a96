#pragma once

#include "cubeshuffle/geometry.hpp"
#include "cubeshuffle/json_codec.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cubeshuffle {

using Index = std::uint64_t;

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Either a finite sorted set of positive indices, or N = {1,2,...} minus finitely many.
class IndexSet {
 public:
  static IndexSet finite(std::vector<Index> members);
  static IndexSet range(Index first, Index last);
  static IndexSet naturals() { return naturals_except({}); }
  static IndexSet naturals_except(std::vector<Index> excluded);

  bool is_finite() const { return finite_; }
  /// Finite sets only.
  std::size_t size() const;
  bool contains(Index k) const;
  /// 1-based position -> index.
  Index nth(std::size_t position) const;
  /// index -> 1-based position.
  std::size_t rank(Index k) const;
  /// Finite: every member.  Infinite: every member <= bound.
  std::vector<Index> indices_up_to(Index bound) const;
  std::vector<Index> first(std::size_t count) const;

  const std::vector<Index>& members() const { return list_; }  // finite members or excluded indices
  IndexSet without(const std::vector<Index>& removed) const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  IndexSet(bool finite, std::vector<Index> list);
  bool finite_;
  std::vector<Index> list_;
};

/// Permutation of {1..m}; as a permutation of N it fixes every k > m.
class Permutation {
 public:
  explicit Permutation(std::vector<Index> images);
  static Permutation identity(std::size_t m);
  static Permutation transposition(Index a, Index b);

  std::size_t size() const { return images_.size(); }
  Index operator()(Index k) const { return k >= 1 && k <= images_.size() ? images_[k - 1] : k; }
  Permutation inverse() const;
  /// (this o other)(k) = this(other(k))
  Permutation after(const Permutation& other) const;
  bool is_identity() const;
  const std::vector<Index>& images() const { return images_; }

 private:
  std::vector<Index> images_;
};

/// Indexed family of cubes in I^n with pairwise disjoint interiors.  Finite domains are
/// table-backed; infinite ones are rule-backed (memoised) and may carry a point locator.
class NDomain {
 public:
  using Accessor = std::function<Cube(Index)>;
  using Locator = std::function<std::vector<Index>(const Point&)>;

  static NDomain finite(std::size_t n, std::vector<Cube> cubes);
  static NDomain finite(std::size_t n, std::vector<Index> indices, std::vector<Cube> cubes);
  static NDomain rule(std::size_t n, IndexSet indices, Accessor accessor, std::optional<Locator> locator,
                      std::string certificate, Json descriptor = nullptr);

  std::size_t dim() const;
  const IndexSet& indices() const;
  bool is_finite() const { return indices().is_finite(); }
  Cube cube(Index k) const;
  bool has_locator() const;
  /// Indices whose (closed) cube contains `p`, ascending.
  std::vector<Index> locate(const Point& p) const;
  const std::string& certificate() const;
  /// Serializable description of the generating rule, or null.
  const Json& descriptor() const;
  /// Cubes for indices_up_to(bound).
  std::vector<std::pair<Index, Cube>> cubes_up_to(Index bound) const;

  /// True when both domains are known to be identical (exact for finite, by descriptor or identity otherwise).
  bool same_as(const NDomain& other) const;

 private:
  struct Impl;
  explicit NDomain(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

struct ValidationReport {
  bool valid = true;
  bool exhaustive = false;
  std::size_t checked_indices = 0;
  std::optional<std::pair<Index, Index>> offending;
  std::string certificate;
};

ValidationReport validate(const NDomain& domain, Index bound);

/// child(k) is contained in parent(k) for every k (checked on demand).
struct SubdomainWitness {
  NDomain parent;
  NDomain child;

  /// First index <= bound (all indices when finite) where containment fails.
  std::optional<Index> first_violation(Index bound) const;
};

SubdomainWitness make_witness(NDomain parent, NDomain child);

NDomain standard_domain(std::size_t n);
/// Standard slabs reindexed onto an infinite index set: the m-th member gets R_m.
NDomain standard_domain_on(std::size_t n, const IndexSet& indices);
/// Sub-domain that is proper at k0 (every other cube inside one cell of subdivide(domain(k0))).
SubdomainWitness proper_refine(const NDomain& domain, Index k0);
bool is_proper_at(const NDomain& domain, Index k0, Index bound);
SubdomainWitness shrink_to_interior(const NDomain& domain, const Rational& scale = Rational(1, 2));
/// Finite 2-domain whose projections come within 2^-depth of every dyadic j/2^d, d <= depth.
NDomain adversarial_dense_domain(unsigned depth);
NDomain interleaved_pair_domain(std::size_t n);
NDomain block_pair_domain(std::size_t n);
/// k -> R_{phi(k)} of the standard domain.
NDomain permuted_standard_domain(std::size_t n, const Permutation& phi);
/// Every cube mapped through L_{I^n, block}; locator preserved.
NDomain image_domain(const NDomain& inner, const Cube& block);
/// Finitely many explicit cubes (indices 1..m) followed by an infinite tail inside `tail_box`.
NDomain finite_plus_tail(std::size_t n, std::vector<Cube> head, const Cube& tail_box, const NDomain& tail);
/// The adversarial domain of `depth` with a standard-domain tail in an empty lattice slot.
NDomain adversarial_with_tail(unsigned depth);

/// Sub-domain on `indices` (a subset of the domain's indices); original indices are kept.
NDomain restrict_to(const NDomain& domain, const IndexSet& indices);

}  // namespace cubeshuffle

namespace cubeshuffle {

/// Domain file form: {"n", "index_set": "finite"|"nat", "cubes": [...]} or {..., "rule", "params"}.
/// Infinite domains without a rule descriptor are materialized as a "table" up to `bound`.
Json domain_to_json(const NDomain& domain, Index bound = 64);
NDomain domain_from_json(const Json& j);

}  // namespace cubeshuffle
