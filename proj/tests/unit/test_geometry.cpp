#include <doctest.h>

#include "cubeshuffle/geometry.hpp"
#include "cubeshuffle/random.hpp"

#include <deque>

using namespace cubeshuffle;

namespace {

Rational q(long p, long d = 1) { return Rational(p, d); }
Cube box2(Rational a, Rational b, Rational c, Rational d) { return Cube({Interval(a, b), Interval(c, d)}); }

// x -> lo' + (x - lo) * (hi' - lo') / (hi - lo) via two-point interpolation
Rational interp_oracle(const Interval& s, const Interval& t, const Rational& x) {
  const Rational u = (x - s.lo()) / (s.hi() - s.lo());
  return (Rational(1) - u) * t.lo() + u * t.hi();
}

bool open_overlap_oracle(const Cube& a, const Cube& b) {
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const Rational lo = max(a.axis(i).lo(), b.axis(i).lo());
    const Rational hi = min(a.axis(i).hi(), b.axis(i).hi());
    if (!(lo < hi)) return false;
  }
  return true;
}

Cube random_cube(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<long> pick(0, 12);
  std::vector<Interval> axes;
  for (std::size_t i = 0; i < n; ++i) {
    long a = pick(rng), b = pick(rng);
    if (a == b) b = a == 12 ? 11 : a + 1;
    if (a > b) std::swap(a, b);
    axes.emplace_back(q(a, 12), q(b, 12));
  }
  return Cube(std::move(axes));
}

// flood fill over a uniform grid of spacing h; every breakpoint must be a multiple of h
bool flood_fill_oracle(std::size_t n, const std::vector<Cube>& obstacles, const Rational& h) {
  const long side = (Rational(1) / h).to_double() + 0.5;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= side;
  auto coords = [&](std::size_t flat) {
    std::vector<long> c(n);
    for (std::size_t i = n; i-- > 0;) {
      c[i] = flat % side;
      flat /= side;
    }
    return c;
  };
  std::vector<char> free(total, 1);
  std::size_t free_count = 0;
  for (std::size_t f = 0; f < total; ++f) {
    const auto c = coords(f);
    Point centre;
    for (long x : c) centre.push_back(h * Rational(2 * x + 1, 2));
    for (const auto& o : obstacles)
      if (o.contains(centre)) free[f] = 0;
    free_count += free[f];
  }
  if (free_count == 0) return false;
  std::vector<char> seen(total, 0);
  std::deque<std::size_t> queue;
  for (std::size_t f = 0; f < total; ++f)
    if (free[f]) {
      queue.push_back(f);
      seen[f] = 1;
      break;
    }
  std::size_t reached = 0;
  while (!queue.empty()) {
    const std::size_t f = queue.front();
    queue.pop_front();
    ++reached;
    std::size_t stride = 1;
    const auto c = coords(f);
    for (std::size_t i = n; i-- > 0;) {
      if (c[i] > 0 && free[f - stride] && !seen[f - stride]) seen[f - stride] = 1, queue.push_back(f - stride);
      if (c[i] + 1 < side && free[f + stride] && !seen[f + stride]) seen[f + stride] = 1, queue.push_back(f + stride);
      stride *= side;
    }
  }
  return reached == free_count;
}

}  // namespace

TEST_CASE("degenerate intervals are rejected") {
  CHECK_THROWS_AS(Interval(q(1, 2), q(1, 2)), GeometryError);
  CHECK_THROWS_AS(Interval(q(0), q(3, 2)), GeometryError);
}

TEST_CASE("canonical affine maps") {
  const Cube unit = Cube::unit(2);
  CHECK(canonical_affine(unit, unit) == AffineCubeMap::identity(2));

  const Cube t = box2(q(1, 4), q(1, 2), q(1, 3), q(2, 3));
  const auto m = canonical_affine(unit, t);
  CHECK(m.apply(Point{q(0), q(0)}) == Point{q(1, 4), q(1, 3)});
  CHECK(m.apply(Point{q(1), q(1)}) == Point{q(1, 2), q(2, 3)});

  const Cube s = box2(q(0), q(1, 2), q(0), q(1));
  const Cube u = box2(q(1, 2), q(2, 3), q(0), q(1));
  const Point p{q(1, 4), q(1, 2)};
  const Point image = canonical_affine(s, u).apply(p);
  CHECK(image == Point{q(7, 12), q(1, 2)});
  CHECK(image[0] == interp_oracle(s.axis(0), u.axis(0), p[0]));
}

TEST_CASE("affine maps invert exactly") {
  Rng rng(seed_from_env(3));
  for (int i = 0; i < 200; ++i) {
    const Cube a = random_cube(3, rng), b = random_cube(3, rng);
    const auto there = canonical_affine(a, b), back = canonical_affine(b, a);
    const Point p{q(i % 7, 7), q(1, 3), q(5, 11)};
    CHECK(back.apply(there.apply(p)) == p);
    CHECK(there.inverse() == back);
    CHECK(there.apply(a) == b);
  }
}

TEST_CASE("subdivision") {
  CHECK(subdivide(box2(q(1, 4), q(1, 2), q(1, 3), q(2, 3))).center_index == 5);
  const Cube r3({Interval(q(1, 5), q(2, 5)), Interval(q(1, 3), q(1, 2)), Interval(q(1, 2), q(3, 4))});
  const auto sub3 = subdivide(r3);
  CHECK(sub3.center_index == 14);
  CHECK(sub3.cells.size() == 27);
  CHECK(sub3.cell(14) == r3);

  const Cube r = box2(q(1, 4), q(1, 2), q(1, 3), q(2, 3));
  const auto sub = subdivide(r);
  // brute-force lexicographic enumeration of the interval products
  const std::vector<Interval> xs{Interval(q(0), q(1, 4)), Interval(q(1, 4), q(1, 2)), Interval(q(1, 2), q(1))};
  const std::vector<Interval> ys{Interval(q(0), q(1, 3)), Interval(q(1, 3), q(2, 3)), Interval(q(2, 3), q(1))};
  std::vector<Cube> expected;
  for (const auto& x : xs)
    for (const auto& y : ys) expected.emplace_back(std::vector<Interval>{x, y});
  CHECK(sub.cells == expected);
  CHECK(sub.cell(1) == box2(q(0), q(1, 4), q(0), q(1, 3)));
  CHECK(sub.cell(9) == box2(q(1, 2), q(1), q(2, 3), q(1)));
  CHECK(sub.cell(5) == r);

  Rational vol = 0;
  for (std::size_t i = 0; i < sub3.cells.size(); ++i) {
    vol += sub3.cells[i].volume();
    for (std::size_t j = i + 1; j < sub3.cells.size(); ++j) CHECK(interiors_disjoint(sub3.cells[i], sub3.cells[j]));
  }
  CHECK(vol == 1);
}

TEST_CASE("interior disjointness") {
  CHECK(interiors_disjoint(Cube::slab(2, q(0), q(1, 2)), Cube::slab(2, q(1, 2), q(1))));
  CHECK_FALSE(interiors_disjoint(Cube::unit(2), Cube::unit(2)));
  CHECK(interiors_disjoint(box2(q(0), q(1, 3), q(0), q(1, 3)), box2(q(1, 4), q(1, 2), q(1, 2), q(1))));

  Rng rng(seed_from_env(5));
  for (int i = 0; i < 1000; ++i) {
    const Cube a = random_cube(2 + i % 2, rng), b = random_cube(2 + i % 2, rng);
    CHECK(interiors_disjoint(a, b) == !open_overlap_oracle(a, b));
    CHECK(interior_intersection(a, b).has_value() == open_overlap_oracle(a, b));
  }
}

TEST_CASE("decomposition with marked cubes") {
  CHECK(decomposition_with_marked_cubes(2, {}).elements == std::vector<Cube>{Cube::unit(2)});
  const Cube half = Cube::slab(2, q(0), q(1, 2));
  const auto d1 = decomposition_with_marked_cubes(2, {half});
  CHECK(d1.elements == std::vector<Cube>{half, Cube::slab(2, q(1, 2), q(1))});

  const Cube m = box2(q(1, 4), q(1, 2), q(1, 4), q(1, 2));
  const auto d2 = decomposition_with_marked_cubes(2, {m});
  CHECK(d2.elements.size() == 9);
  CHECK(d2.marked_count == 1);
  CHECK(d2.elements.front() == m);

  Rng rng(seed_from_env(9));
  for (int trial = 0; trial < 20; ++trial) {
    auto pieces = random_partition(2, 4, rng);
    std::vector<Cube> marked;
    for (std::size_t i = 0; i < 2; ++i) marked.push_back(random_subcube(pieces[i], rng));
    const auto d = decomposition_with_marked_cubes(2, marked);
    Rational vol = 0;
    for (std::size_t i = 0; i < d.elements.size(); ++i) {
      vol += d.elements[i].volume();
      for (std::size_t j = i + 1; j < d.elements.size(); ++j) CHECK(interiors_disjoint(d.elements[i], d.elements[j]));
    }
    CHECK(vol == 1);
    CHECK(d.elements[0] == marked[0]);
    CHECK(d.elements[1] == marked[1]);
  }
}

TEST_CASE("complement connectivity") {
  CHECK(complement_connected(2, {}));
  CHECK_FALSE(complement_connected(2, {box2(q(0), q(1), q(1, 3), q(2, 3))}));
  CHECK(complement_connected(2, {box2(q(1, 4), q(3, 4), q(1, 4), q(3, 4))}));

  Rng rng(seed_from_env(13));
  for (int trial = 0; trial < 40; ++trial) {
    // obstacles on a 1/4 grid so a 1/8 flood fill resolves every gap
    std::vector<Cube> obstacles;
    std::uniform_int_distribution<long> pick(0, 3);
    for (int k = 0; k < 3; ++k) {
      const long x = pick(rng), y = pick(rng), w = 1 + pick(rng) % (4 - x), h = 1 + pick(rng) % (4 - y);
      const Cube c = box2(q(x, 4), q(x + w, 4), q(y, 4), q(y + h, 4));
      bool ok = true;
      for (const auto& o : obstacles) ok = ok && interiors_disjoint(o, c);
      if (ok) obstacles.push_back(c);
    }
    CAPTURE(trial);
    CHECK(complement_connected(2, obstacles) == flood_fill_oracle(2, obstacles, q(1, 8)));
  }
}

TEST_CASE("polygonal corridors") {
  const Cube start = box2(q(0), q(1, 4), q(0), q(1, 4));
  const Cube goal = box2(q(3, 4), q(1), q(3, 4), q(1));
  const auto c = polygonal_corridor(start, goal, {});
  CHECK(c.clearance >= q(1, 4));
  CHECK(start.contains(c.cells.front()));
  CHECK(goal.contains(c.cells.back()));

  const auto same = polygonal_corridor(start, start, {});
  CHECK(same.clearance == q(1, 4));

  const Cube wall = box2(q(1, 3), q(2, 3), q(0), q(2, 3));
  const Cube left = box2(q(0), q(1, 4), q(0), q(1, 4));
  const Cube right = box2(q(3, 4), q(1), q(0), q(1, 4));
  const auto around = polygonal_corridor(left, right, {wall});
  bool above = false;
  for (const auto& cell : around.cells) {
    CHECK(interiors_disjoint(cell, wall));
    above = above || cell.axis(1).lo() >= q(2, 3);
  }
  CHECK(above);
  for (std::size_t i = 1; i < around.cells.size(); ++i) {
    // consecutive cells share a facet
    std::size_t touching = 0;
    for (std::size_t a = 0; a < 2; ++a)
      touching += around.cells[i].axis(a).hi() == around.cells[i - 1].axis(a).lo() ||
                  around.cells[i].axis(a).lo() == around.cells[i - 1].axis(a).hi();
    CHECK(touching == 1);
  }

  CHECK_THROWS_AS(polygonal_corridor(left, right, {box2(q(1, 3), q(2, 3), q(0), q(1))}), GeometryError);
}
