#pragma once

#include "dforest/geometry.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dforest {

using CellCoord = std::array<std::int64_t, kMaxDim>;

/// Uniform bucket grid over the periodic window. Point identifiers are
/// insertion indices; buckets keep insertion order.
class GridIndex {
 public:
  GridIndex(const Window& w, double cell_size);

  static GridIndex build(std::span<const Point> points, double cell_size, const Window& w);

  /// max(finest_eps, L/256), rounded up so that L/h is an integer and the
  /// total cell count stays below 2^22.
  static double default_cell_size(const Window& w, double finest_eps);

  std::uint32_t insert(const Point& p);

  const Window& window() const { return window_; }
  double cell_size() const { return cell_size_; }
  std::int64_t cells_per_side() const { return cells_per_side_; }
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(window_.dim()); }
  Point point(std::uint32_t id) const;
  const double* coords(std::uint32_t id) const { return coords_.data() + static_cast<std::size_t>(id) * dim(); }
  int dim() const { return window_.dim(); }

  /// Wrapped cell coordinates of a point in the window.
  CellCoord cell_of(const Point& p) const;
  /// Linear bucket index of (unwrapped) cell coordinates, reduced modulo the grid.
  std::size_t linear_index(const CellCoord& cell) const;
  const std::vector<std::uint32_t>& bucket(std::size_t linear) const { return buckets_[linear]; }
  std::size_t bucket_count() const { return buckets_.size(); }

  /// Identifiers of all points at torus distance <= r from p, ascending. Requires r <= L/2.
  std::vector<std::uint32_t> query_ball(const Point& p, double r) const;

  /// Whether any point lies in the closed box. Requires circumradius <= L/2.
  bool query_box_nonempty(const OrientedBox& b) const;

 private:
  Window window_;
  double cell_size_;
  std::int64_t cells_per_side_;
  std::vector<double> coords_;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

/// Brute-force reference for query_box_nonempty.
bool box_nonempty_bruteforce(std::span<const Point> points, const OrientedBox& b, const Window& w);

struct RayCell {
  CellCoord cell;      // unwrapped coordinates along the ray (lift to R^d)
  std::size_t linear;  // wrapped bucket index
  double entry;        // segment parameter at which the ray enters the closed cell
};

/// Grid cells met by a segment, in nondecreasing entry order. Each cell of the
/// lift is yielded once; when the segment crosses several cell boundaries at
/// the same parameter, every cell incident to the crossing point is yielded.
class RayCellWalker {
 public:
  RayCellWalker(const GridIndex& index, const Segment& s);

  bool next(RayCell& out);

 private:
  const GridIndex& index_;
  int d_;
  double length_;
  CellCoord cur_{};
  std::array<int, kMaxDim> step_{};
  std::array<double, kMaxDim> t_max_{};
  std::array<double, kMaxDim> t_delta_{};
  std::vector<RayCell> pending_;
  std::size_t pending_pos_ = 0;
  bool done_ = false;
};

std::vector<RayCell> ray_cells(const GridIndex& index, const Segment& s);

}  // namespace dforest
