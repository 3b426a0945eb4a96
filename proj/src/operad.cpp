#include "cubeshuffle/operad.hpp"

#include <algorithm>

namespace cubeshuffle {

OperadElement::OperadElement(NDomain domain) : domain_(std::move(domain)) {
  const IndexSet& idx = domain_.indices();
  if (idx.is_finite()) {
    const auto& m = idx.members();
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i] != i + 1) throw OperadError("operad elements of finite arity are indexed by 1..m");
  } else if (!idx.members().empty()) {
    throw OperadError("operad elements of arity omega are indexed by N");
  }
}

OperadElement OperadElement::unit(std::size_t n) { return OperadElement(NDomain::finite(n, {Cube::unit(n)})); }

std::optional<std::size_t> OperadElement::arity() const {
  if (is_omega()) return std::nullopt;
  return domain_.indices().size();
}

OperadElement compose(const OperadElement& outer, const std::vector<OperadElement>& inners) {
  if (outer.is_omega()) throw OperadError("compose: the outer element must have finite arity");
  const std::size_t m = *outer.arity();
  if (inners.size() != m)
    throw OperadError("compose: expected " + std::to_string(m) + " inner elements, got " + std::to_string(inners.size()));
  const std::size_t n = outer.dim();
  std::optional<std::size_t> omega;
  for (std::size_t i = 0; i < m; ++i) {
    if (inners[i].dim() != n) throw OperadError("compose: dimension mismatch");
    if (inners[i].is_omega()) {
      if (omega) throw OperadError("compose: at most one inner element may have arity omega");
      omega = i;
    }
  }
  std::vector<Cube> cubes;
  for (std::size_t i = 0; i < m; ++i) {
    if (omega == i) continue;
    const Cube a = outer.domain().cube(i + 1);
    const auto map = canonical_affine(Cube::unit(n), a);
    for (Index k : inners[i].domain().indices().members()) cubes.push_back(map.apply(inners[i].domain().cube(k)));
  }
  if (!omega) return OperadElement(NDomain::finite(n, std::move(cubes)));
  return OperadElement(finite_plus_tail(n, std::move(cubes), outer.domain().cube(*omega + 1), inners[*omega].domain()));
}

OperadElement symmetric_action(const OperadElement& element, const Permutation& phi) {
  const NDomain& d = element.domain();
  if (!element.is_omega()) {
    if (phi.size() != *element.arity()) throw OperadError("symmetric_action: permutation size differs from the arity");
    std::vector<Cube> cubes;
    for (Index k = 1; k <= phi.size(); ++k) cubes.push_back(d.cube(phi(k)));
    return OperadElement(NDomain::finite(d.dim(), std::move(cubes)));
  }
  if (phi.is_identity()) return element;
  const Permutation inv = phi.inverse();
  std::optional<NDomain::Locator> locator;
  if (d.has_locator())
    locator = [d, inv](const Point& p) {
      auto hits = d.locate(p);
      for (auto& k : hits) k = inv(k);
      std::sort(hits.begin(), hits.end());
      return hits;
    };
  return OperadElement(NDomain::rule(
      d.dim(), d.indices(), [d, phi](Index k) { return d.cube(phi(k)); }, std::move(locator), d.certificate()));
}

ConcatenatedLoop act_on_loops(const OperadElement& element, const KSequence& seq, Index truncation) {
  return concatenate(element.domain(), seq, truncation);
}

}  // namespace cubeshuffle
