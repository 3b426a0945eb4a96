#pragma once

#include "cubeshuffle/loops.hpp"

#include <optional>
#include <vector>

namespace cubeshuffle {

class OperadError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point of C_n(m) (domain over {1..m}) or of C_n(omega) (domain over N).
class OperadElement {
 public:
  explicit OperadElement(NDomain domain);

  static OperadElement unit(std::size_t n);

  const NDomain& domain() const { return domain_; }
  std::size_t dim() const { return domain_.dim(); }
  bool is_omega() const { return !domain_.is_finite(); }
  /// Finite arity; nullopt for omega.
  std::optional<std::size_t> arity() const;

 private:
  NDomain domain_;
};

/// Output cube for (outer i, inner k) is L_{I^n, outer_i}(inner_k).  Finite arity results are
/// outer-major; with an omega inner, the finite cubes come first and the omega cubes follow.
OperadElement compose(const OperadElement& outer, const std::vector<OperadElement>& inners);

/// k -> R_{phi(k)}.  On an omega element phi acts on its finite support.
OperadElement symmetric_action(const OperadElement& element, const Permutation& phi);

ConcatenatedLoop act_on_loops(const OperadElement& element, const KSequence& seq, Index truncation = 64);

}  // namespace cubeshuffle
