#pragma once

#include "cubeshuffle/domain.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cubeshuffle {

class LoopError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value in R^d.  Built-in loops produce exact rationals; user loops may be float-only.
struct LoopValue {
  bool exact = true;
  std::vector<Rational> q;
  std::vector<double> f;

  static LoopValue zero(std::size_t d, bool exact = true);
  std::vector<double> to_doubles() const;
  bool is_zero() const;
  friend bool operator==(const LoopValue& a, const LoopValue& b);
};

/// Basepoint-relative map I^n -> R^d, basepoint at the origin.
class NLoop {
 public:
  using ExactFn = std::function<std::vector<Rational>(const Point&)>;
  using FloatFn = std::function<std::vector<double>(std::span<const double>)>;

  static NLoop exact(std::size_t n, std::size_t d, Rational image_bound, ExactFn fn, FloatFn float_fn = nullptr);
  static NLoop approximate(std::size_t n, std::size_t d, Rational image_bound, FloatFn fn);
  static NLoop constant_basepoint(std::size_t n, std::size_t d);

  std::size_t dim() const { return n_; }
  std::size_t target_dim() const { return d_; }
  const Rational& image_bound() const { return image_bound_; }
  bool is_exact() const { return static_cast<bool>(exact_); }
  bool boundary_compliant() const { return boundary_compliant_; }

  LoopValue operator()(const Point& s) const;
  std::vector<double> eval_float(std::span<const double> s) const;

 private:
  std::size_t n_ = 2, d_ = 1;
  Rational image_bound_;
  ExactFn exact_;
  FloatFn float_;
  bool boundary_compliant_ = true;
};

Rational tent(const Rational& u);
/// amplitude * prod tent(s_i) in target coordinate `coordinate` (1-based).
NLoop bump_loop(const Rational& amplitude, std::size_t coordinate, std::size_t n, std::size_t d = 1);

/// Nonincreasing sequence tending to 0 that dominates every image bound.
struct Dominating {
  enum class Kind { Harmonic, Geometric, Custom };
  Kind kind = Kind::Harmonic;
  Rational c = 1;
  Rational r = Rational(1, 2);  // geometric ratio
  std::function<Rational(Index)> custom_value;
  std::function<Index(const Rational&)> custom_threshold;

  static Dominating harmonic(Rational c) { return {Kind::Harmonic, std::move(c), Rational(1, 2), {}, {}}; }
  static Dominating geometric(Rational c, Rational r) { return {Kind::Geometric, std::move(c), std::move(r), {}, {}}; }

  Rational value(Index k) const;
  /// Least M with value(k) < eps for all k >= M.
  Index threshold(const Rational& eps) const;
  Json to_json() const;
};

class KSequence {
 public:
  KSequence(std::size_t n, std::size_t d, IndexSet indices, std::function<NLoop(Index)> loop,
            std::function<Rational(Index)> bound, std::optional<Dominating> dominating, Json descriptor = nullptr);

  std::size_t dim() const { return n_; }
  std::size_t target_dim() const { return d_; }
  const IndexSet& indices() const { return indices_; }
  NLoop loop(Index k) const;
  Rational bound(Index k) const { return bound_(k); }
  const std::optional<Dominating>& dominating() const { return dominating_; }
  bool is_null() const { return indices_.is_finite() || dominating_.has_value(); }
  /// Upper bound for every image bound of an index > k.
  Rational tail_bound(Index k) const;
  const Json& descriptor() const { return descriptor_; }

 private:
  std::size_t n_, d_;
  IndexSet indices_;
  std::function<NLoop(Index)> loop_;
  std::function<Rational(Index)> bound_;
  std::optional<Dominating> dominating_;
  Json descriptor_;
};

Index null_certificate(const KSequence& seq, const Rational& epsilon);

enum class Decay { Harmonic, Geometric, Constant };
/// f_k = bump with amplitude scale/k, scale/2^k or scale, in target coordinate ((k-1) mod d)+1.
KSequence bump_sequence(std::size_t n, const IndexSet& indices, Decay decay, const Rational& scale, std::size_t d = 1);
/// (f_1, g_1, f_2, g_2, ...) over N.
KSequence interleave(const KSequence& f, const KSequence& g);
/// k -> seq(phi(k)).
KSequence reindexed(const KSequence& seq, const Permutation& phi);

Json sequence_to_json(const KSequence& seq);
KSequence sequence_from_json(const Json& j, std::size_t n, const IndexSet& indices);

struct EvalResult {
  LoopValue value;
  Rational error_bound = 0;
  std::optional<Index> index;  // cube the point was resolved to
};

/// The R-concatenation of a K-sequence: f_k o L_{R_k, I^n} on R_k, basepoint elsewhere.
class ConcatenatedLoop {
 public:
  ConcatenatedLoop(NDomain domain, KSequence sequence, Index truncation);

  const NDomain& domain() const { return domain_; }
  const KSequence& sequence() const { return sequence_; }
  Index truncation() const { return truncation_; }
  EvalResult operator()(const Point& s) const;

 private:
  NDomain domain_;
  KSequence sequence_;
  Index truncation_;
};

ConcatenatedLoop concatenate(const NDomain& domain, const KSequence& seq, Index truncation = 64);

/// Shared evaluation rule: loop k at the point s of cube c, ties already resolved by the caller.
LoopValue evaluate_in_cube(const NLoop& loop, const Cube& c, const Point& s);
bool on_unit_boundary(const Point& s);

}  // namespace cubeshuffle
