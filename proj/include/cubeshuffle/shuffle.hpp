#pragma once

#include "cubeshuffle/schedule.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cubeshuffle {

class ShuffleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ProvenanceEntry {
  std::string lemma;
  Json params;
};

/// Space-time block of one gluing piece; `single_index` marks a constant block carrying only min_index.
struct FragmentInfo {
  std::string label;
  BlockEmbedding block;
  Index min_index = 1;
  bool single_index = false;
};

struct ShufflePlan {
  CubeSchedule schedule;
  std::vector<ProvenanceEntry> provenance;
  std::function<std::vector<ProvenanceEntry>(Index)> lazy_provenance;
  std::function<std::vector<StageNote>(Index)> lazy_stages;
  std::function<std::vector<FragmentInfo>(Index)> lazy_fragments;

  std::vector<ProvenanceEntry> provenance_up_to(Index bound) const;
  std::vector<StageNote> stages_up_to(Index bound) const;
  std::vector<FragmentInfo> fragments_up_to(Index bound) const;
};

ShufflePlan plan_of(CubeSchedule schedule, std::string lemma, Json params = Json::object());
/// Plans run one after another on a uniform time partition.
ShufflePlan plan_sequence(const std::vector<ShufflePlan>& parts);
ShufflePlan plan_reverse(const ShufflePlan& plan);
ShufflePlan plan_embed_space(const ShufflePlan& plan, const Cube& block);

CubeSchedule shrink_schedule(const NDomain& parent, const SubdomainWitness& child);

/// Pairwise disjoint last-axis intervals [c_k, d_k] inside the last-axis sides of the cubes.
std::vector<Interval> eh_intervals(const NDomain& domain);
/// Pinch, widen, slot, grow: domain -> slabs D_k = [(phi^-1(p)-1)/m, phi^-1(p)/m] x I^{n-1}, p = position of k.
ShufflePlan eh_shuffle(const NDomain& domain, const Permutation& phi);
NDomain slab_domain(std::size_t n, const std::vector<Index>& indices, const Permutation& phi);

ShufflePlan two_cycle_swap(const NDomain& r, const NDomain& s, Index k0, const std::vector<Index>& fixed);
ShufflePlan finite_shuffle(const NDomain& r, const NDomain& s, const std::vector<Index>& fixed);

/// The permutation used by the n-twist: phi(1) = centre, phi(j) = j-1 for 2 <= j <= centre.
Permutation twist_permutation(std::size_t n);

struct NTwist {
  ShufflePlan stage;
  NDomain residual;  // over the index set minus its first member
  Permutation phi;
};

NTwist ntwist(const NDomain& r, const Rational& rho = Rational(1, 2));

ShufflePlan infinite_to_standard(const NDomain& r);

ShufflePlan shuffle(const NDomain& r, const NDomain& s, const std::vector<Index>& fixed = {});

ShufflePlan permutation_plan(std::size_t n, const Permutation& phi);
ShufflePlan double_product_plan(std::size_t n);

/// The gluing blocks A_m (stage windows) and B_m (constant tails) for m <= bound, as space x time boxes.
std::vector<FragmentInfo> gluing_blocks(std::size_t n, Index bound);

struct BlockTilingReport {
  bool ok = true;
  std::string message;
};

/// Pairwise interior-disjointness and exact volume balance against the uncovered corner box.
BlockTilingReport check_gluing_tiling(const std::vector<FragmentInfo>& blocks, Index bound);

struct ContinuityReport {
  bool ok = true;
  Index threshold = 0;
  std::size_t fragments_checked = 0;
  Rational worst = 0;
};

/// Every fragment whose least index is >= null_certificate(seq, eps) has value bound < eps.
ContinuityReport continuity_certificate(const ShufflePlan& plan, const KSequence& seq, const Rational& eps,
                                        Index bound = 64);

/// Rebuilds a plan from the leading "shuffle" provenance entry.
ShufflePlan replay(const std::vector<ProvenanceEntry>& provenance);

}  // namespace cubeshuffle
