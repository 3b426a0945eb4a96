#include "cubeshuffle/geometry.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace cubeshuffle {

Interval::Interval(Rational lo, Rational hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (!(lo_ < hi_))
    throw GeometryError("degenerate interval [" + lo_.str() + ", " + hi_.str() + "]");
  if (lo_ < 0 || hi_ > 1)
    throw GeometryError("interval [" + lo_.str() + ", " + hi_.str() + "] leaves [0,1]");
}

Cube::Cube(std::vector<Interval> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw GeometryError("cube needs at least one axis");
}

Cube Cube::unit(std::size_t n) { return Cube(std::vector<Interval>(n, Interval::unit())); }

Cube Cube::slab(std::size_t n, Rational lo, Rational hi) {
  std::vector<Interval> axes(n, Interval::unit());
  axes[0] = Interval(std::move(lo), std::move(hi));
  return Cube(std::move(axes));
}

Point Cube::center() const {
  Point p;
  p.reserve(dim());
  for (const auto& a : axes_) p.push_back(a.midpoint());
  return p;
}

Rational Cube::volume() const {
  Rational v = 1;
  for (const auto& a : axes_) v *= a.length();
  return v;
}

Rational Cube::min_side() const {
  Rational m = axes_[0].length();
  for (const auto& a : axes_) m = min(m, a.length());
  return m;
}

bool Cube::contains(const Cube& o) const {
  if (o.dim() != dim()) throw GeometryError("dimension mismatch");
  for (std::size_t i = 0; i < dim(); ++i)
    if (!axes_[i].contains(o.axes_[i])) return false;
  return true;
}

bool Cube::contains(const Point& p) const {
  if (p.size() != dim()) throw GeometryError("dimension mismatch");
  for (std::size_t i = 0; i < dim(); ++i)
    if (!axes_[i].contains(p[i])) return false;
  return true;
}

bool Cube::interior_contains(const Point& p) const {
  if (p.size() != dim()) throw GeometryError("dimension mismatch");
  for (std::size_t i = 0; i < dim(); ++i)
    if (!axes_[i].interior_contains(p[i])) return false;
  return true;
}

bool Cube::strictly_inside_unit() const {
  for (const auto& a : axes_)
    if (a.lo() == 0 || a.hi() == 1) return false;
  return true;
}

bool Cube::strictly_contains(const Cube& o) const {
  if (o.dim() != dim()) throw GeometryError("dimension mismatch");
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(axes_[i].lo() < o.axes_[i].lo() && o.axes_[i].hi() < axes_[i].hi())) return false;
  return true;
}

Cube Cube::scaled_about_center(const Rational& factor) const {
  if (factor <= 0 || factor > 1) throw GeometryError("scale factor must lie in (0,1]");
  std::vector<Interval> out;
  out.reserve(dim());
  for (const auto& a : axes_) {
    const Rational half = a.length() * factor / 2;
    const Rational mid = a.midpoint();
    out.emplace_back(mid - half, mid + half);
  }
  return Cube(std::move(out));
}

Cube Cube::interpolate(const Cube& a, const Cube& b, const Rational& t) {
  if (a.dim() != b.dim()) throw GeometryError("dimension mismatch");
  if (t == 0) return a;
  if (t == 1) return b;
  const Rational s = Rational(1) - t;
  std::vector<Interval> out;
  out.reserve(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    out.emplace_back(s * a.axes_[i].lo() + t * b.axes_[i].lo(), s * a.axes_[i].hi() + t * b.axes_[i].hi());
  return Cube(std::move(out));
}

std::string to_string(const Cube& c) {
  std::ostringstream os;
  for (std::size_t i = 0; i < c.dim(); ++i) {
    if (i) os << " x ";
    os << '[' << c.axis(i).lo() << ", " << c.axis(i).hi() << ']';
  }
  return os.str();
}

std::optional<Cube> interior_intersection(const Cube& a, const Cube& b) {
  if (a.dim() != b.dim()) throw GeometryError("dimension mismatch");
  std::vector<Interval> out;
  out.reserve(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (!a.axis(i).interiors_overlap(b.axis(i))) return std::nullopt;
    out.emplace_back(max(a.axis(i).lo(), b.axis(i).lo()), min(a.axis(i).hi(), b.axis(i).hi()));
  }
  return Cube(std::move(out));
}

bool interiors_disjoint(const Cube& a, const Cube& b) {
  if (a.dim() != b.dim()) throw GeometryError("dimension mismatch");
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (a.axis(i).hi() <= b.axis(i).lo() || b.axis(i).hi() <= a.axis(i).lo()) return true;
  return false;
}

// --- affine maps -----------------------------------------------------------

AffineCubeMap::AffineCubeMap(std::vector<Axis> axes) : axes_(std::move(axes)) {
  for (const auto& a : axes_)
    if (a.scale <= 0) throw GeometryError("affine cube map needs positive scales");
}

AffineCubeMap AffineCubeMap::identity(std::size_t n) {
  return AffineCubeMap(std::vector<Axis>(n, Axis{1, 0}));
}

Point AffineCubeMap::apply(const Point& p) const {
  if (p.size() != dim()) throw GeometryError("dimension mismatch");
  Point out;
  out.reserve(dim());
  for (std::size_t i = 0; i < dim(); ++i) out.push_back(axes_[i].scale * p[i] + axes_[i].offset);
  return out;
}

std::vector<double> AffineCubeMap::apply(std::span<const double> p) const {
  if (p.size() != dim()) throw GeometryError("dimension mismatch");
  std::vector<double> out;
  out.reserve(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    out.push_back(axes_[i].scale.to_double() * p[i] + axes_[i].offset.to_double());
  return out;
}

Cube AffineCubeMap::apply(const Cube& c) const {
  if (c.dim() != dim()) throw GeometryError("dimension mismatch");
  std::vector<Interval> out;
  out.reserve(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto& a = axes_[i];
    out.emplace_back(a.scale * c.axis(i).lo() + a.offset, a.scale * c.axis(i).hi() + a.offset);
  }
  return Cube(std::move(out));
}

AffineCubeMap AffineCubeMap::inverse() const {
  std::vector<Axis> inv;
  inv.reserve(dim());
  for (const auto& a : axes_) inv.push_back({Rational(1) / a.scale, -a.offset / a.scale});
  return AffineCubeMap(std::move(inv));
}

AffineCubeMap AffineCubeMap::after(const AffineCubeMap& inner) const {
  if (inner.dim() != dim()) throw GeometryError("dimension mismatch");
  std::vector<Axis> out;
  out.reserve(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    out.push_back({axes_[i].scale * inner.axes_[i].scale, axes_[i].scale * inner.axes_[i].offset + axes_[i].offset});
  return AffineCubeMap(std::move(out));
}

AffineCubeMap canonical_affine(const Cube& source, const Cube& target) {
  if (source.dim() != target.dim())
    throw GeometryError("canonical_affine: dimension mismatch (" + std::to_string(source.dim()) + " vs " +
                        std::to_string(target.dim()) + ")");
  std::vector<AffineCubeMap::Axis> axes;
  axes.reserve(source.dim());
  for (std::size_t i = 0; i < source.dim(); ++i) {
    const auto& s = source.axis(i);
    const auto& t = target.axis(i);
    Rational scale = t.length() / s.length();
    Rational offset = t.lo() - scale * s.lo();
    axes.push_back({std::move(scale), std::move(offset)});
  }
  return AffineCubeMap(std::move(axes));
}

// --- subdivision -----------------------------------------------------------

Subdivision subdivide(const Cube& r) {
  if (!r.strictly_inside_unit())
    throw GeometryError("subdivide: cube " + to_string(r) + " touches the boundary of I^n");
  const std::size_t n = r.dim();
  std::vector<std::vector<Interval>> choices(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = r.axis(i);
    choices[i] = {Interval(0, a.lo()), a, Interval(a.hi(), 1)};
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 3;
  Subdivision out;
  out.cells.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<Interval> axes;
    axes.reserve(n);
    std::size_t rem = flat, div = total;
    for (std::size_t i = 0; i < n; ++i) {
      div /= 3;
      axes.push_back(choices[i][rem / div]);
      rem %= div;
    }
    out.cells.emplace_back(std::move(axes));
  }
  out.center_index = (total + 1) / 2;
  return out;
}

std::optional<std::size_t> Subdivision::containing_cell(const Cube& c) const {
  for (std::size_t j = 0; j < cells.size(); ++j)
    if (cells[j].contains(c)) return j + 1;
  return std::nullopt;
}

std::optional<std::size_t> Subdivision::first_overlapping_cell(const Cube& c) const {
  for (std::size_t j = 0; j < cells.size(); ++j)
    if (!interiors_disjoint(cells[j], c)) return j + 1;
  return std::nullopt;
}

// --- grids -------------------------------------------------------------------

Grid::Grid(std::size_t n, const std::vector<const Cube*>& generators) : breaks_(n) {
  for (std::size_t i = 0; i < n; ++i) {
    auto& b = breaks_[i];
    b.push_back(0);
    b.push_back(1);
    for (const Cube* c : generators) {
      if (c->dim() != n) throw GeometryError("dimension mismatch");
      b.push_back(c->axis(i).lo());
      b.push_back(c->axis(i).hi());
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  stride_.assign(n, 1);
  for (std::size_t i = n; i-- > 0;) {
    stride_[i] = count_;
    count_ *= breaks_[i].size() - 1;
  }
}

std::vector<std::size_t> Grid::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    idx[i] = flat / stride_[i];
    flat %= stride_[i];
  }
  return idx;
}

std::size_t Grid::flatten(const std::vector<std::size_t>& idx) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < dim(); ++i) flat += idx[i] * stride_[i];
  return flat;
}

Cube Grid::cell(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::vector<Interval> axes;
  axes.reserve(dim());
  for (std::size_t i = 0; i < dim(); ++i) axes.emplace_back(breaks_[i][idx[i]], breaks_[i][idx[i] + 1]);
  return Cube(std::move(axes));
}

std::vector<std::size_t> Grid::cells_inside(const Cube& c) const {
  std::vector<std::pair<std::size_t, std::size_t>> ranges(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto& b = breaks_[i];
    const auto lo = std::lower_bound(b.begin(), b.end(), c.axis(i).lo());
    const auto hi = std::lower_bound(b.begin(), b.end(), c.axis(i).hi());
    ranges[i] = {static_cast<std::size_t>(lo - b.begin()), static_cast<std::size_t>(hi - b.begin())};
  }
  std::vector<std::size_t> out;
  std::vector<std::size_t> idx(dim());
  for (std::size_t i = 0; i < dim(); ++i) idx[i] = ranges[i].first;
  while (true) {
    out.push_back(flatten(idx));
    std::size_t i = dim();
    while (i-- > 0) {
      if (++idx[i] < ranges[i].second) break;
      idx[i] = ranges[i].first;
      if (i == 0) return out;
    }
  }
}

std::vector<std::size_t> Grid::neighbours(std::size_t flat) const {
  const auto idx = unflatten(flat);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (idx[i] > 0) out.push_back(flat - stride_[i]);
    if (idx[i] + 2 < breaks_[i].size()) out.push_back(flat + stride_[i]);
  }
  return out;
}

namespace {

std::vector<const Cube*> pointers(const std::vector<Cube>& cubes) {
  std::vector<const Cube*> out;
  out.reserve(cubes.size());
  for (const auto& c : cubes) out.push_back(&c);
  return out;
}

void require_pairwise_disjoint(const std::vector<Cube>& cubes, const char* what) {
  for (std::size_t i = 0; i < cubes.size(); ++i)
    for (std::size_t j = i + 1; j < cubes.size(); ++j)
      if (!interiors_disjoint(cubes[i], cubes[j]))
        throw GeometryError(std::string(what) + ": cubes " + std::to_string(i + 1) + " and " +
                            std::to_string(j + 1) + " overlap");
}

// Marks every grid cell covered by one of `obstacles`.
std::vector<char> covered_cells(const Grid& grid, const std::vector<Cube>& obstacles) {
  std::vector<char> covered(grid.cell_count(), 0);
  for (const auto& o : obstacles)
    for (std::size_t f : grid.cells_inside(o)) covered[f] = 1;
  return covered;
}

}  // namespace

GridDecomposition decomposition_with_marked_cubes(std::size_t n, const std::vector<Cube>& marked) {
  require_pairwise_disjoint(marked, "decomposition_with_marked_cubes");
  const Grid grid(n, pointers(marked));
  const auto covered = covered_cells(grid, marked);
  GridDecomposition out;
  out.breakpoints = grid.breakpoints();
  out.elements = marked;
  out.marked_count = marked.size();
  for (std::size_t f = 0; f < grid.cell_count(); ++f)
    if (!covered[f]) out.elements.push_back(grid.cell(f));
  return out;
}

bool complement_connected(std::size_t n, const std::vector<Cube>& obstacles) {
  const Grid grid(n, pointers(obstacles));
  const auto covered = covered_cells(grid, obstacles);
  std::size_t free_total = 0, start = grid.cell_count();
  for (std::size_t f = 0; f < grid.cell_count(); ++f)
    if (!covered[f]) {
      ++free_total;
      if (start == grid.cell_count()) start = f;
    }
  if (free_total == 0) return true;
  std::vector<char> seen(grid.cell_count(), 0);
  std::deque<std::size_t> queue{start};
  seen[start] = 1;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const std::size_t f = queue.front();
    queue.pop_front();
    ++reached;
    for (std::size_t g : grid.neighbours(f))
      if (!covered[g] && !seen[g]) {
        seen[g] = 1;
        queue.push_back(g);
      }
  }
  return reached == free_total;
}

Corridor polygonal_corridor(const Cube& start, const Cube& goal, const std::vector<Cube>& obstacles) {
  if (start == goal) return Corridor{{}, start.min_side()};
  std::vector<const Cube*> gens = pointers(obstacles);
  gens.push_back(&start);
  gens.push_back(&goal);
  const Grid grid(start.dim(), gens);
  const auto covered = covered_cells(grid, obstacles);

  std::vector<char> is_goal(grid.cell_count(), 0);
  for (std::size_t f : grid.cells_inside(goal))
    if (!covered[f]) is_goal[f] = 1;

  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(grid.cell_count(), none);
  std::vector<char> seen(grid.cell_count(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t f : grid.cells_inside(start))
    if (!covered[f]) {
      seen[f] = 1;
      queue.push_back(f);
    }
  std::size_t hit = none;
  while (!queue.empty() && hit == none) {
    const std::size_t f = queue.front();
    queue.pop_front();
    if (is_goal[f]) {
      hit = f;
      break;
    }
    for (std::size_t g : grid.neighbours(f))
      if (!covered[g] && !seen[g]) {
        seen[g] = 1;
        parent[g] = f;
        queue.push_back(g);
      }
  }
  if (hit == none) throw GeometryError("polygonal_corridor: no free path between " + to_string(start) +
                                       " and " + to_string(goal));
  Corridor out;
  for (std::size_t f = hit; f != none; f = parent[f]) out.cells.push_back(grid.cell(f));
  std::reverse(out.cells.begin(), out.cells.end());
  out.clearance = out.cells.front().min_side();
  for (const auto& c : out.cells) out.clearance = min(out.clearance, c.min_side());
  return out;
}

}  // namespace cubeshuffle
