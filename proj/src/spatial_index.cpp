#include "dforest/spatial_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace dforest {

namespace {

constexpr std::size_t kMaxCells = std::size_t{1} << 22;

std::int64_t floor_div(std::int64_t a, std::int64_t n) {
  std::int64_t q = a / n;
  if ((a % n != 0) && ((a < 0) != (n < 0))) --q;
  return q;
}

std::int64_t mod(std::int64_t a, std::int64_t n) { return a - floor_div(a, n) * n; }

double wrap_delta(double v, double side, double half) {
  v -= side * std::floor((v + half) / side);
  if (v >= half) v -= side;
  return v;
}

}  // namespace

GridIndex::GridIndex(const Window& w, double cell_size) : window_(w), cell_size_(cell_size) {
  if (!(cell_size > 0)) throw PreconditionError("cell size must be positive");
  const double ratio = w.side() / cell_size;
  const double rounded = std::round(ratio);
  if (rounded < 1 || std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw PreconditionError("L / cell_size must be an integer");
  }
  cells_per_side_ = static_cast<std::int64_t>(rounded);
  std::size_t total = 1;
  for (int j = 0; j < w.dim(); ++j) {
    if (total > kMaxCells / static_cast<std::size_t>(cells_per_side_)) {
      throw PreconditionError("grid index would exceed 2^22 cells; use a larger cell size");
    }
    total *= static_cast<std::size_t>(cells_per_side_);
  }
  buckets_.resize(total);
}

GridIndex GridIndex::build(std::span<const Point> points, double cell_size, const Window& w) {
  GridIndex idx(w, cell_size);
  idx.coords_.reserve(points.size() * static_cast<std::size_t>(w.dim()));
  for (const auto& p : points) idx.insert(p);
  return idx;
}

double GridIndex::default_cell_size(const Window& w, double finest_eps) {
  const double target = std::max(finest_eps, w.side() / 256.0);
  auto n = static_cast<std::int64_t>(std::floor(w.side() / target));
  n = std::max<std::int64_t>(n, 1);
  for (;;) {
    double total = 1;
    for (int j = 0; j < w.dim(); ++j) total *= static_cast<double>(n);
    if (total <= static_cast<double>(kMaxCells) || n == 1) break;
    --n;
  }
  return w.side() / static_cast<double>(n);
}

std::uint32_t GridIndex::insert(const Point& p) {
  if (!window_.contains(p)) throw PreconditionError("point outside the window");
  const std::size_t n = size();
  if (n >= std::numeric_limits<std::uint32_t>::max()) throw std::length_error("grid index is full");
  const auto id = static_cast<std::uint32_t>(n);
  for (int j = 0; j < dim(); ++j) coords_.push_back(p[j]);
  buckets_[linear_index(cell_of(p))].push_back(id);
  return id;
}

Point GridIndex::point(std::uint32_t id) const {
  Point p(dim());
  const double* c = coords(id);
  for (int j = 0; j < dim(); ++j) p[j] = c[j];
  return p;
}

CellCoord GridIndex::cell_of(const Point& p) const {
  CellCoord c{};
  for (int j = 0; j < dim(); ++j) {
    c[j] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(p[j] / cell_size_)), 0, cells_per_side_ - 1);
  }
  return c;
}

std::size_t GridIndex::linear_index(const CellCoord& cell) const {
  std::size_t linear = 0;
  for (int j = dim() - 1; j >= 0; --j) {
    linear = linear * static_cast<std::size_t>(cells_per_side_) + static_cast<std::size_t>(mod(cell[j], cells_per_side_));
  }
  return linear;
}

std::vector<std::uint32_t> GridIndex::query_ball(const Point& p, double r) const {
  if (r > window_.half()) throw PreconditionError("ball radius must be <= L/2");
  const int d = dim();
  const auto ring = static_cast<std::int64_t>(std::ceil(r / cell_size_));
  const CellCoord center = cell_of(p);
  CellCoord lo{}, hi{};
  for (int j = 0; j < d; ++j) {
    if (2 * ring + 1 >= cells_per_side_) {
      lo[j] = 0;
      hi[j] = cells_per_side_ - 1;
    } else {
      lo[j] = center[j] - ring;
      hi[j] = center[j] + ring;
    }
  }
  std::vector<std::uint32_t> out;
  const double r2 = r * r;
  const double side = window_.side();
  const double half = window_.half();
  CellCoord c = lo;
  for (;;) {
    for (const auto id : buckets_[linear_index(c)]) {
      const double* q = coords(id);
      double dist2 = 0;
      for (int j = 0; j < d; ++j) {
        const double delta = wrap_delta(q[j] - p[j], side, half);
        dist2 += delta * delta;
      }
      if (dist2 <= r2) out.push_back(id);
    }
    int j = 0;
    while (j < d && c[j] == hi[j]) {
      c[j] = lo[j];
      ++j;
    }
    if (j == d) break;
    ++c[j];
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool GridIndex::query_box_nonempty(const OrientedBox& b) const {
  const int d = dim();
  if (b.dim() != d) throw PreconditionError("box dimension mismatch");
  if (b.circumradius() > window_.half()) throw WindowTooSmall("box circumradius exceeds L/2");

  const Vec& he = b.half_extents();
  const Mat& frame = b.frame();
  const Point& center = b.center();
  const double side = window_.side();
  const double half = window_.half();
  const double h = cell_size_;

  auto contains = [&](std::uint32_t id) {
    const double* q = coords(id);
    double delta[kMaxDim];
    for (int j = 0; j < d; ++j) delta[j] = wrap_delta(q[j] - center[j], side, half);
    for (int a = 0; a < d; ++a) {
      double dot = 0;
      for (int j = 0; j < d; ++j) dot += frame(j, a) * delta[j];
      if (std::abs(dot) > he[a]) return false;
    }
    return true;
  };
  auto scan = [&](std::size_t linear) {
    for (const auto id : buckets_[linear]) {
      if (contains(id)) return true;
    }
    return false;
  };

  // March along the longest axis from the center outwards. Every point of the
  // box is within `reach` of some sample, hence in the ring around its cell.
  int axis = 0;
  for (int j = 1; j < d; ++j) {
    if (he[j] > he[axis]) axis = j;
  }
  double cross2 = 0;
  for (int j = 0; j < d; ++j) {
    if (j != axis) cross2 += he[j] * he[j];
  }
  const double step = h / 2;
  const double reach = std::sqrt(cross2) + step / 2;
  const auto ring = static_cast<std::int64_t>(std::ceil(reach / h));
  const auto samples = static_cast<std::int64_t>(std::ceil(he[axis] / step));

  std::vector<CellCoord> axis_cells;
  axis_cells.reserve(static_cast<std::size_t>(2 * samples + 1));
  CellCoord last_pos{}, last_neg{};
  bool have_pos = false, have_neg = false;
  for (std::int64_t i = 0; i <= samples; ++i) {
    for (int sign : {1, -1}) {
      if (i == 0 && sign < 0) continue;
      const double t = std::min(static_cast<double>(i) * step, he[axis]) * sign;
      CellCoord c{};
      for (int j = 0; j < d; ++j) {
        c[j] = static_cast<std::int64_t>(std::floor((center[j] + t * frame(j, axis)) / h));
      }
      CellCoord& last = sign > 0 ? last_pos : last_neg;
      bool& have = sign > 0 ? have_pos : have_neg;
      if (have && c == last) continue;
      if (i == 0) {
        last_neg = c;
        have_neg = true;
      }
      last = c;
      have = true;
      axis_cells.push_back(c);
      if (scan(linear_index(c))) return true;
    }
  }

  // Complete pass over the ring around every axis cell.
  if (ring == 0) return false;
  const std::int64_t width = 2 * ring + 1;
  std::int64_t ring_cells = 1;
  for (int j = 0; j < d; ++j) ring_cells *= width;
  for (const auto& base : axis_cells) {
    for (std::int64_t code = 0; code < ring_cells; ++code) {
      std::int64_t rem = code;
      bool is_center = true;
      CellCoord c = base;
      for (int j = 0; j < d; ++j) {
        const std::int64_t off = rem % width - ring;
        rem /= width;
        c[j] += off;
        if (off != 0) is_center = false;
      }
      if (is_center) continue;
      if (scan(linear_index(c))) return true;
    }
  }
  return false;
}

bool box_nonempty_bruteforce(std::span<const Point> points, const OrientedBox& b, const Window& w) {
  return std::any_of(points.begin(), points.end(), [&](const Point& p) { return box_contains_point(b, p, w); });
}

RayCellWalker::RayCellWalker(const GridIndex& index, const Segment& s)
    : index_(index), d_(index.dim()), length_(s.length) {
  if (s.length > index.window().side()) throw PreconditionError("segment longer than L");
  const double h = index.cell_size();
  const auto& v = s.direction.vec();
  for (int j = 0; j < d_; ++j) {
    const double o = s.origin[j];
    cur_[j] = static_cast<std::int64_t>(std::floor(o / h));
    if (v[j] > 0) {
      step_[j] = 1;
      t_max_[j] = (static_cast<double>(cur_[j] + 1) * h - o) / v[j];
      t_delta_[j] = h / v[j];
    } else if (v[j] < 0) {
      step_[j] = -1;
      t_max_[j] = (static_cast<double>(cur_[j]) * h - o) / v[j];
      t_delta_[j] = -h / v[j];
    } else {
      step_[j] = 0;
      t_max_[j] = std::numeric_limits<double>::infinity();
      t_delta_[j] = std::numeric_limits<double>::infinity();
    }
  }
  pending_.push_back({cur_, index_.linear_index(cur_), 0.0});
}

bool RayCellWalker::next(RayCell& out) {
  if (pending_pos_ < pending_.size()) {
    out = pending_[pending_pos_++];
    return true;
  }
  if (done_) return false;
  pending_.clear();
  pending_pos_ = 0;

  double t_min = std::numeric_limits<double>::infinity();
  for (int j = 0; j < d_; ++j) t_min = std::min(t_min, t_max_[j]);
  if (!(t_min <= length_)) {
    done_ = true;
    return false;
  }
  // Crossings closer than this are treated as simultaneous; this can only add cells.
  const double tie = 1e-10 * index_.cell_size();
  unsigned tied = 0;
  for (int j = 0; j < d_; ++j) {
    if (t_max_[j] <= t_min + tie) tied |= 1u << j;
  }
  // Every nonempty subset of the tied axes, smallest subsets first.
  std::vector<unsigned> subsets;
  for (unsigned sub = tied; sub != 0; sub = (sub - 1) & tied) subsets.push_back(sub);
  std::stable_sort(subsets.begin(), subsets.end(), [](unsigned a, unsigned b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });
  for (const unsigned sub : subsets) {
    CellCoord c = cur_;
    for (int j = 0; j < d_; ++j) {
      if (sub >> j & 1u) c[j] += step_[j];
    }
    pending_.push_back({c, index_.linear_index(c), t_min});
  }
  for (int j = 0; j < d_; ++j) {
    if (tied >> j & 1u) {
      cur_[j] += step_[j];
      t_max_[j] += t_delta_[j];
    }
  }
  out = pending_[pending_pos_++];
  return true;
}

std::vector<RayCell> ray_cells(const GridIndex& index, const Segment& s) {
  std::vector<RayCell> out;
  RayCellWalker walker(index, s);
  RayCell c;
  while (walker.next(c)) out.push_back(c);
  return out;
}

}  // namespace dforest
