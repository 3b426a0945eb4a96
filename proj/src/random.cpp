#include "cubeshuffle/random.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace cubeshuffle {

std::uint64_t seed_from_env(std::uint64_t fallback) {
  if (const char* s = std::getenv("CUBE_SHUFFLE_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
    }
  }
  return fallback;
}

namespace {

long uniform(Rng& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

}  // namespace

std::vector<Cube> random_partition(std::size_t n, std::size_t pieces, Rng& rng) {
  std::vector<Cube> boxes{Cube::unit(n)};
  while (boxes.size() < pieces) {
    // split the box with the largest volume so pieces stay comparable
    auto it = std::max_element(boxes.begin(), boxes.end(),
                               [](const Cube& a, const Cube& b) { return a.volume() < b.volume(); });
    const Cube box = *it;
    boxes.erase(it);
    std::size_t axis = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (box.axis(i).length() > box.axis(axis).length()) axis = i;
    if (uniform(rng, 0, 2) == 0) axis = static_cast<std::size_t>(uniform(rng, 0, static_cast<long>(n) - 1));
    const Interval a = box.axis(axis);
    const Rational cut = a.lo() + a.length() * Rational(uniform(rng, 1, 3), 4);
    std::vector<Interval> lo = box.axes(), hi = box.axes();
    lo[axis] = Interval(a.lo(), cut);
    hi[axis] = Interval(cut, a.hi());
    boxes.emplace_back(lo);
    boxes.emplace_back(hi);
  }
  std::shuffle(boxes.begin(), boxes.end(), rng);
  return boxes;
}

Cube random_subcube(const Cube& box, Rng& rng) {
  std::vector<Interval> axes;
  for (const auto& a : box.axes()) {
    const long lo = uniform(rng, 0, 5);
    const long hi = uniform(rng, 7, 12);
    axes.emplace_back(a.lo() + a.length() * Rational(lo, 12), a.lo() + a.length() * Rational(hi, 12));
  }
  return Cube(std::move(axes));
}

NDomain random_finite_domain(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<Cube> cubes;
  for (const auto& piece : random_partition(n, m, rng)) cubes.push_back(random_subcube(piece, rng));
  return NDomain::finite(n, std::move(cubes));
}

RandomScenario random_scenario(std::size_t n, std::size_t m, std::size_t fixed_count, Rng& rng) {
  fixed_count = std::min(fixed_count, m);
  const std::size_t moving = m - fixed_count;
  const auto pieces = random_partition(n, fixed_count + 2 * moving, rng);
  std::vector<Cube> r(m, Cube::unit(n)), s(m, Cube::unit(n));
  std::vector<Index> fixed;
  for (std::size_t i = 0; i < fixed_count; ++i) {
    // fixed cubes sit strictly inside their pieces so the complement stays connected
    const Cube f = random_subcube(pieces[i], rng).scaled_about_center(Rational(3, 4));
    r[i] = s[i] = f;
    fixed.push_back(i + 1);
  }
  std::vector<std::size_t> free_pieces;
  for (std::size_t i = fixed_count; i < pieces.size(); ++i) free_pieces.push_back(i);
  std::vector<std::size_t> order = free_pieces;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t j = 0; j < moving; ++j) {
    r[fixed_count + j] = random_subcube(pieces[free_pieces[j]], rng);
    s[fixed_count + j] = random_subcube(pieces[order[j]], rng);
  }
  // interleave fixed and moving indices
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Cube> rp, sp;
  std::vector<Index> fp;
  for (std::size_t i = 0; i < m; ++i) {
    rp.push_back(r[perm[i]]);
    sp.push_back(s[perm[i]]);
    if (perm[i] < fixed_count) fp.push_back(i + 1);
  }
  return {NDomain::finite(n, std::move(rp)), NDomain::finite(n, std::move(sp)), fp};
}

}  // namespace cubeshuffle
