#include "cubeshuffle/loops.hpp"

#include <algorithm>
#include <cmath>

namespace cubeshuffle {

LoopValue LoopValue::zero(std::size_t d, bool exact) {
  LoopValue v;
  v.exact = exact;
  if (exact) v.q.assign(d, Rational(0));
  else v.f.assign(d, 0.0);
  return v;
}

std::vector<double> LoopValue::to_doubles() const {
  if (!exact) return f;
  std::vector<double> out;
  out.reserve(q.size());
  for (const auto& x : q) out.push_back(x.to_double());
  return out;
}

bool LoopValue::is_zero() const {
  if (exact) return std::all_of(q.begin(), q.end(), [](const Rational& x) { return x.sign() == 0; });
  return std::all_of(f.begin(), f.end(), [](double x) { return x == 0.0; });
}

bool operator==(const LoopValue& a, const LoopValue& b) {
  if (a.exact && b.exact) return a.q == b.q;
  const auto x = a.to_doubles(), y = b.to_doubles();
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - y[i]) > 1e-9) return false;
  return true;
}

NLoop NLoop::exact(std::size_t n, std::size_t d, Rational image_bound, ExactFn fn, FloatFn float_fn) {
  if (image_bound.sign() < 0) throw LoopError("image bound must be nonnegative");
  NLoop l;
  l.n_ = n;
  l.d_ = d;
  l.image_bound_ = std::move(image_bound);
  l.exact_ = std::move(fn);
  l.float_ = std::move(float_fn);
  return l;
}

NLoop NLoop::approximate(std::size_t n, std::size_t d, Rational image_bound, FloatFn fn) {
  if (image_bound.sign() < 0) throw LoopError("image bound must be nonnegative");
  NLoop l;
  l.n_ = n;
  l.d_ = d;
  l.image_bound_ = std::move(image_bound);
  l.float_ = std::move(fn);
  return l;
}

NLoop NLoop::constant_basepoint(std::size_t n, std::size_t d) {
  return exact(n, d, Rational(0), [d](const Point&) { return std::vector<Rational>(d, Rational(0)); });
}

LoopValue NLoop::operator()(const Point& s) const {
  if (s.size() != n_) throw LoopError("point dimension mismatch");
  LoopValue v;
  if (exact_) {
    v.exact = true;
    v.q = exact_(s);
    return v;
  }
  std::vector<double> x;
  for (const auto& c : s) x.push_back(c.to_double());
  v.exact = false;
  v.f = float_(x);
  return v;
}

std::vector<double> NLoop::eval_float(std::span<const double> s) const {
  if (float_) return float_(s);
  Point p;
  for (double x : s) p.push_back(Rational(mpq_class(x)));
  LoopValue v = (*this)(p);
  return v.to_doubles();
}

Rational tent(const Rational& u) {
  if (u.sign() <= 0 || u >= Rational(1)) return Rational(0);
  return u <= Rational(1, 2) ? u * Rational(2) : (Rational(1) - u) * Rational(2);
}

NLoop bump_loop(const Rational& amplitude, std::size_t coordinate, std::size_t n, std::size_t d) {
  if (amplitude.sign() <= 0) throw LoopError("bump amplitude must be positive");
  if (coordinate < 1 || coordinate > d) throw LoopError("bump coordinate out of range");
  auto exact_fn = [amplitude, coordinate, d](const Point& s) {
    Rational v = amplitude;
    for (const auto& x : s) {
      v *= tent(x);
      if (v.sign() == 0) break;
    }
    std::vector<Rational> out(d, Rational(0));
    out[coordinate - 1] = v;
    return out;
  };
  const double a = amplitude.to_double();
  auto float_fn = [a, coordinate, d](std::span<const double> s) {
    double v = a;
    for (double x : s) v *= (x <= 0.0 || x >= 1.0) ? 0.0 : (x <= 0.5 ? 2 * x : 2 * (1 - x));
    std::vector<double> out(d, 0.0);
    out[coordinate - 1] = v;
    return out;
  };
  return NLoop::exact(n, d, amplitude, exact_fn, float_fn);
}

Rational Dominating::value(Index k) const {
  switch (kind) {
    case Kind::Harmonic:
      return c / Rational(static_cast<long>(k));
    case Kind::Geometric: {
      mpq_class p = 1;
      for (Index i = 0; i < k; ++i) p *= r.raw();
      return c * Rational(p);
    }
    case Kind::Custom:
      return custom_value(k);
  }
  return Rational(0);
}

Index Dominating::threshold(const Rational& eps) const {
  if (eps.sign() <= 0) throw LoopError("epsilon must be positive");
  switch (kind) {
    case Kind::Harmonic:
      return to_u64((c / eps).floor()) + 1;
    case Kind::Geometric: {
      if (r.sign() <= 0 || r >= Rational(1)) throw LoopError("geometric ratio must lie in (0,1)");
      Index k = 1;
      Rational v = c * r;
      while (v >= eps) {
        v *= r;
        ++k;
      }
      return k;
    }
    case Kind::Custom:
      return custom_threshold(eps);
  }
  return 1;
}

Json Dominating::to_json() const {
  switch (kind) {
    case Kind::Harmonic:
      return {{"kind", "harmonic"}, {"c", cubeshuffle::to_json(c)}};
    case Kind::Geometric:
      return {{"kind", "geometric"}, {"c", cubeshuffle::to_json(c)}, {"r", cubeshuffle::to_json(r)}};
    case Kind::Custom:
      break;
  }
  return {{"kind", "custom"}};
}

KSequence::KSequence(std::size_t n, std::size_t d, IndexSet indices, std::function<NLoop(Index)> loop,
                     std::function<Rational(Index)> bound, std::optional<Dominating> dominating, Json descriptor)
    : n_(n),
      d_(d),
      indices_(std::move(indices)),
      loop_(std::move(loop)),
      bound_(std::move(bound)),
      dominating_(std::move(dominating)),
      descriptor_(std::move(descriptor)) {}

NLoop KSequence::loop(Index k) const {
  if (!indices_.contains(k)) throw LoopError("index " + std::to_string(k) + " not in sequence index set");
  return loop_(k);
}

Rational KSequence::tail_bound(Index k) const {
  if (indices_.is_finite()) {
    Rational best = 0;
    for (Index j : indices_.members())
      if (j > k) best = max(best, bound_(j));
    return best;
  }
  if (!dominating_) throw LoopError("infinite sequence lacks a null certificate");
  return dominating_->value(k + 1);
}

Index null_certificate(const KSequence& seq, const Rational& epsilon) {
  if (epsilon.sign() <= 0) throw LoopError("epsilon must be positive");
  if (seq.indices().is_finite()) {
    const auto& m = seq.indices().members();
    return m.empty() ? 1 : m.back() + 1;
  }
  if (!seq.dominating()) throw LoopError("sequence lacks a null certificate");
  return seq.dominating()->threshold(epsilon);
}

namespace {

const char* decay_name(Decay d) {
  switch (d) {
    case Decay::Harmonic: return "harmonic";
    case Decay::Geometric: return "geometric";
    case Decay::Constant: return "constant";
  }
  return "constant";
}

Rational decayed(Decay decay, const Rational& scale, Index k) {
  switch (decay) {
    case Decay::Harmonic:
      return scale / Rational(static_cast<long>(k));
    case Decay::Geometric:
      return Dominating::geometric(scale, Rational(1, 2)).value(k);
    case Decay::Constant:
      return scale;
  }
  return scale;
}

}  // namespace

KSequence bump_sequence(std::size_t n, const IndexSet& indices, Decay decay, const Rational& scale, std::size_t d) {
  if (scale.sign() <= 0) throw LoopError("bump scale must be positive");
  std::optional<Dominating> dom;
  if (decay == Decay::Harmonic) dom = Dominating::harmonic(scale);
  if (decay == Decay::Geometric) dom = Dominating::geometric(scale, Rational(1, 2));
  Json desc{{"family", "bump"}, {"decay", decay_name(decay)}, {"scale", to_json(scale)}, {"target_dim", d}};
  return KSequence(
      n, d, indices,
      [=](Index k) { return bump_loop(decayed(decay, scale, k), (k - 1) % d + 1, n, d); },
      [=](Index k) { return decayed(decay, scale, k); }, dom, desc);
}

KSequence interleave(const KSequence& f, const KSequence& g) {
  if (f.dim() != g.dim() || f.target_dim() != g.target_dim()) throw LoopError("interleave: dimension mismatch");
  if (!f.dominating() || !g.dominating() || f.indices().is_finite() || g.indices().is_finite())
    throw LoopError("interleave needs two null sequences over N");
  const Dominating df = *f.dominating(), dg = *g.dominating();
  Dominating dom;
  dom.kind = Dominating::Kind::Custom;
  dom.custom_value = [df, dg](Index j) { return max(df.value((j + 1) / 2), dg.value((j + 1) / 2)); };
  dom.custom_threshold = [df, dg](const Rational& eps) {
    return 2 * std::max(df.threshold(eps), dg.threshold(eps)) - 1;
  };
  auto member = [](const IndexSet& s, Index j) { return s.nth((j + 1) / 2); };
  Json desc{{"family", "interleave"}, {"f", f.descriptor()}, {"g", g.descriptor()}};
  return KSequence(
      f.dim(), f.target_dim(), IndexSet::naturals(),
      [=](Index j) { return j % 2 == 1 ? f.loop(member(f.indices(), j)) : g.loop(member(g.indices(), j)); },
      [=](Index j) { return j % 2 == 1 ? f.bound(member(f.indices(), j)) : g.bound(member(g.indices(), j)); }, dom,
      desc);
}

KSequence reindexed(const KSequence& seq, const Permutation& phi) {
  std::optional<Dominating> dom;
  if (seq.dominating()) {
    const Dominating base = *seq.dominating();
    const Index m = phi.size();
    Dominating d;
    d.kind = Dominating::Kind::Custom;
    d.custom_value = [base, m](Index k) { return k <= m ? base.value(1) : base.value(k); };
    d.custom_threshold = [base, m](const Rational& eps) { return std::max<Index>(base.threshold(eps), m + 1); };
    dom = d;
  }
  Json desc = nullptr;
  if (!seq.descriptor().is_null())
    desc = Json{{"family", "reindexed"}, {"inner", seq.descriptor()}, {"phi", phi.images()}};
  return KSequence(
      seq.dim(), seq.target_dim(), seq.indices(), [seq, phi](Index k) { return seq.loop(phi(k)); },
      [seq, phi](Index k) { return seq.bound(phi(k)); }, dom, desc);
}

Json sequence_to_json(const KSequence& seq) {
  if (seq.descriptor().is_null()) throw LoopError("sequence has no serializable description");
  return seq.descriptor();
}

KSequence sequence_from_json(const Json& j, std::size_t n, const IndexSet& indices) {
  const std::string family = j.value("family", std::string("bump"));
  if (family == "bump") {
    const std::string decay = j.value("decay", std::string("harmonic"));
    Decay dk;
    if (decay == "harmonic") dk = Decay::Harmonic;
    else if (decay == "geometric") dk = Decay::Geometric;
    else if (decay == "constant") dk = Decay::Constant;
    else throw LoopError("unknown decay '" + decay + "'");
    const Rational scale = j.contains("scale") ? rational_from_json(j.at("scale")) : Rational(1);
    return bump_sequence(n, indices, dk, scale, j.value("target_dim", std::size_t{1}));
  }
  if (family == "interleave")
    return interleave(sequence_from_json(j.at("f"), n, IndexSet::naturals()),
                      sequence_from_json(j.at("g"), n, IndexSet::naturals()));
  if (family == "reindexed")
    return reindexed(sequence_from_json(j.at("inner"), n, indices), Permutation(j.at("phi").get<std::vector<Index>>()));
  throw LoopError("unknown sequence family '" + family + "'");
}

bool on_unit_boundary(const Point& s) {
  return std::any_of(s.begin(), s.end(), [](const Rational& x) { return x.sign() == 0 || x == Rational(1); });
}

LoopValue evaluate_in_cube(const NLoop& loop, const Cube& c, const Point& s) {
  return loop(canonical_affine(c, Cube::unit(c.dim())).apply(s));
}

ConcatenatedLoop::ConcatenatedLoop(NDomain domain, KSequence sequence, Index truncation)
    : domain_(std::move(domain)), sequence_(std::move(sequence)), truncation_(truncation) {}

EvalResult ConcatenatedLoop::operator()(const Point& s) const {
  const std::size_t d = sequence_.target_dim();
  EvalResult r;
  r.value = LoopValue::zero(d);
  if (s.size() != domain_.dim()) throw LoopError("point dimension mismatch");
  if (on_unit_boundary(s)) return r;
  if (domain_.is_finite() || domain_.has_locator()) {
    const auto hits = domain_.locate(s);
    if (!hits.empty()) {
      r.index = hits.front();
      r.value = evaluate_in_cube(sequence_.loop(hits.front()), domain_.cube(hits.front()), s);
    }
    return r;
  }
  for (Index k : domain_.indices().indices_up_to(truncation_)) {
    const Cube c = domain_.cube(k);
    if (c.contains(s)) {
      r.index = k;
      r.value = evaluate_in_cube(sequence_.loop(k), c, s);
      return r;
    }
  }
  r.error_bound = sequence_.tail_bound(truncation_);
  return r;
}

ConcatenatedLoop concatenate(const NDomain& domain, const KSequence& seq, Index truncation) {
  if (domain.dim() != seq.dim()) throw LoopError("concatenate: dimension mismatch");
  if (!(domain.indices() == seq.indices())) throw LoopError("concatenate: index sets differ");
  if (!seq.is_null()) throw LoopError("concatenate: infinite sequence is not null");
  return ConcatenatedLoop(domain, seq, truncation);
}

}  // namespace cubeshuffle
