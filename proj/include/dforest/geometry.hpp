#pragma once

// Primitives on the periodic window [0, L)^d: points, directions, segments,
// oriented boxes and the containment / distance predicates built on them.
// Everything here is templated on the scalar type; the rest of the library
// instantiates it with double.

#include "dforest/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>

namespace dforest {

template <class Scalar>
class WindowT {
 public:
  WindowT(int dim, Scalar side) : dim_(dim), side_(side) {
    if (dim < 2 || dim > kMaxDim) {
      throw PreconditionError("window dimension must be in [2, " + std::to_string(kMaxDim) + "]");
    }
    if (!(side > 0) || side != std::floor(side)) {
      throw PreconditionError("window side length must be a positive integer");
    }
  }

  int dim() const { return dim_; }
  Scalar side() const { return side_; }
  Scalar half() const { return side_ / 2; }
  /// Number of unit cubes along one axis.
  std::int64_t cubes_per_side() const { return static_cast<std::int64_t>(side_); }

  Scalar wrap(Scalar x) const {
    Scalar r = x - side_ * std::floor(x / side_);
    return r >= side_ ? Scalar(0) : r;
  }

  VectorX<Scalar> wrap(const VectorX<Scalar>& p) const {
    VectorX<Scalar> out(dim_);
    for (int j = 0; j < dim_; ++j) out[j] = wrap(p[j]);
    return out;
  }

  bool contains(const VectorX<Scalar>& p) const {
    if (p.size() != dim_) return false;
    for (int j = 0; j < dim_; ++j) {
      if (!(p[j] >= 0 && p[j] < side_)) return false;
    }
    return true;
  }

 private:
  int dim_;
  Scalar side_;
};

using Window = WindowT<double>;

/// Minimal-image displacement from a to b; every component lands in [-L/2, L/2).
template <class Scalar>
VectorX<Scalar> torus_delta(const VectorX<Scalar>& a, const VectorX<Scalar>& b, const WindowT<Scalar>& w) {
  const Scalar side = w.side();
  const Scalar half = w.half();
  VectorX<Scalar> out(w.dim());
  for (int j = 0; j < w.dim(); ++j) {
    Scalar v = b[j] - a[j];
    v -= side * std::floor((v + half) / side);
    if (v >= half) v -= side;
    out[j] = v;
  }
  return out;
}

template <class Scalar>
Scalar torus_distance(const VectorX<Scalar>& a, const VectorX<Scalar>& b, const WindowT<Scalar>& w) {
  return torus_delta(a, b, w).norm();
}

template <class Scalar>
class UnitVectorT {
 public:
  explicit UnitVectorT(VectorX<Scalar> v) : v_(std::move(v)) {
    if (v_.size() < 2 || v_.size() > kMaxDim) throw PreconditionError("direction has unsupported dimension");
    if (std::abs(v_.norm() - Scalar(1)) > Scalar(1e-12)) throw PreconditionError("direction is not a unit vector");
  }

  /// Normalizes v; v must be nonzero.
  static UnitVectorT normalized(const VectorX<Scalar>& v) {
    const Scalar n = v.norm();
    if (!(n > 0)) throw PreconditionError("cannot normalize a zero vector");
    return UnitVectorT(VectorX<Scalar>(v / n));
  }

  const VectorX<Scalar>& vec() const { return v_; }
  Scalar operator[](int j) const { return v_[j]; }
  int dim() const { return static_cast<int>(v_.size()); }

 private:
  VectorX<Scalar> v_;
};

using UnitVector = UnitVectorT<double>;

template <class Scalar>
struct SegmentT {
  VectorX<Scalar> origin;
  UnitVectorT<Scalar> direction;
  Scalar length;

  SegmentT(VectorX<Scalar> o, UnitVectorT<Scalar> dir, Scalar len, const WindowT<Scalar>& w)
      : origin(std::move(o)), direction(std::move(dir)), length(len) {
    if (origin.size() != w.dim() || direction.dim() != w.dim()) throw PreconditionError("segment dimension mismatch");
    if (!w.contains(origin)) throw PreconditionError("segment origin outside the window");
    if (!(length > 0) || length > w.side()) throw PreconditionError("segment length must be in (0, L]");
  }

  VectorX<Scalar> at(Scalar t) const { return origin + t * direction.vec(); }
};

using Segment = SegmentT<double>;

/// Calls fn(shift) for every image offset m*L, m in {-1, 0, 1}^d.
template <class Scalar, class Fn>
void for_each_image_shift(const WindowT<Scalar>& w, Fn&& fn) {
  const int d = w.dim();
  int total = 1;
  for (int j = 0; j < d; ++j) total *= 3;
  VectorX<Scalar> shift(d);
  for (int code = 0; code < total; ++code) {
    int c = code;
    for (int j = 0; j < d; ++j) {
      shift[j] = static_cast<Scalar>(c % 3 - 1) * w.side();
      c /= 3;
    }
    fn(shift);
  }
}

template <class Scalar>
struct SegmentDistance {
  Scalar distance;
  Scalar t;  // segment parameter of the closest point
};

/// Torus distance from p to the segment, with the smallest minimizing parameter.
/// Segments up to length L can approach several images of p, so all 3^d
/// neighbouring images are considered.
template <class Scalar>
SegmentDistance<Scalar> dist_point_segment(const VectorX<Scalar>& p, const SegmentT<Scalar>& s,
                                           const WindowT<Scalar>& w) {
  const VectorX<Scalar> base = torus_delta(s.origin, p, w);
  const auto& v = s.direction.vec();
  SegmentDistance<Scalar> best{std::numeric_limits<Scalar>::infinity(), Scalar(0)};
  for_each_image_shift(w, [&](const VectorX<Scalar>& shift) {
    const VectorX<Scalar> rel = base + shift;
    const Scalar t = std::clamp(rel.dot(v), Scalar(0), s.length);
    const Scalar dist = (rel - t * v).norm();
    if (dist < best.distance || (dist == best.distance && t < best.t)) best = {dist, t};
  });
  return best;
}

/// Rotated rectangular box. Axis j of the box points along frame.col(j) and
/// extends half_extents[j] either way; index 0 is the long axis by convention.
template <class Scalar>
class OrientedBoxT {
 public:
  struct Unchecked {};

  OrientedBoxT(VectorX<Scalar> center, VectorX<Scalar> half_extents, MatrixX<Scalar> frame)
      : center_(std::move(center)), half_(std::move(half_extents)), frame_(std::move(frame)) {
    const auto d = center_.size();
    if (half_.size() != d || frame_.rows() != d || frame_.cols() != d) {
      throw PreconditionError("oriented box dimension mismatch");
    }
    if ((half_.array() <= 0).any()) throw PreconditionError("box half extents must be positive");
    const MatrixX<Scalar> gram = frame_.transpose() * frame_;
    const MatrixX<Scalar> eye = MatrixX<Scalar>::Identity(d, d);
    if ((gram - eye).cwiseAbs().maxCoeff() > Scalar(1e-10)) throw PreconditionError("box frame is not orthonormal");
  }

  /// For callers that construct frames known to be orthonormal (enumeration hot loop).
  OrientedBoxT(Unchecked, VectorX<Scalar> center, VectorX<Scalar> half_extents, MatrixX<Scalar> frame)
      : center_(std::move(center)), half_(std::move(half_extents)), frame_(std::move(frame)) {}

  const VectorX<Scalar>& center() const { return center_; }
  const VectorX<Scalar>& half_extents() const { return half_; }
  const MatrixX<Scalar>& frame() const { return frame_; }
  int dim() const { return static_cast<int>(center_.size()); }

  Scalar circumradius() const { return half_.norm(); }

  /// Corner for sign pattern `mask` (bit j set means -half_extents[j]), relative to the center.
  VectorX<Scalar> corner_offset(unsigned mask) const {
    VectorX<Scalar> local(dim());
    for (int j = 0; j < dim(); ++j) local[j] = (mask >> j & 1u) ? -half_[j] : half_[j];
    return frame_ * local;
  }

  /// Half widths of the axis-aligned bounding box.
  VectorX<Scalar> aabb_half() const { return frame_.cwiseAbs() * half_; }

 private:
  friend class TestBoxCursor;

  VectorX<Scalar> center_;
  VectorX<Scalar> half_;
  MatrixX<Scalar> frame_;
};

using OrientedBox = OrientedBoxT<double>;

/// Closed-box membership of the minimal image of p.
template <class Scalar>
bool box_contains_point(const OrientedBoxT<Scalar>& b, const VectorX<Scalar>& p, const WindowT<Scalar>& w) {
  const VectorX<Scalar> delta = torus_delta(b.center(), p, w);
  const int d = w.dim();
  for (int j = 0; j < d; ++j) {
    if (std::abs(b.frame().col(j).dot(delta)) > b.half_extents()[j]) return false;
  }
  return true;
}

/// Slack allowed on corner coordinates when testing box-in-box.
inline constexpr double kCornerSlack = 1e-12;

/// True iff every corner of inner lies in outer (exact by convexity).
template <class Scalar>
bool box_contains_box(const OrientedBoxT<Scalar>& outer, const OrientedBoxT<Scalar>& inner, const WindowT<Scalar>& w) {
  if (inner.circumradius() > w.half()) {
    throw WindowTooSmall("inner box circumradius exceeds L/2; corner images are ambiguous");
  }
  const int d = w.dim();
  const VectorX<Scalar> to_inner = torus_delta(outer.center(), inner.center(), w);
  const MatrixX<Scalar> outer_t = outer.frame().transpose();
  const unsigned corners = 1u << d;
  for (unsigned mask = 0; mask < corners; ++mask) {
    const VectorX<Scalar> local = outer_t * (to_inner + inner.corner_offset(mask));
    for (int j = 0; j < d; ++j) {
      if (std::abs(local[j]) > outer.half_extents()[j] + Scalar(kCornerSlack)) return false;
    }
  }
  return true;
}

/// Applies the rotation by angle (cos c, sin s) in the (e_1, e_j) plane to the rows of `frame`.
template <class Scalar>
void rotate_in_plane(MatrixX<Scalar>& frame, int j, Scalar c, Scalar s) {
  for (int col = 0; col < frame.cols(); ++col) {
    const Scalar a = frame(0, col);
    const Scalar b = frame(j, col);
    frame(0, col) = c * a - s * b;
    frame(j, col) = s * a + c * b;
  }
}

/// Frame R_d(k_{d-1} theta) ... R_2(k_1 theta) I, where R_j rotates the
/// (e_1, e_j) plane. Column 0 is the image of the long axis e_1.
template <class Scalar>
MatrixX<Scalar> frame_from_rotation_indices(int d, std::span<const std::int64_t> indices, Scalar theta) {
  if (d < 2 || d > kMaxDim) throw PreconditionError("unsupported dimension");
  if (static_cast<int>(indices.size()) != d - 1) throw PreconditionError("need d-1 rotation indices");
  MatrixX<Scalar> frame = MatrixX<Scalar>::Identity(d, d);
  for (int j = 1; j < d; ++j) {
    const auto k = indices[j - 1];
    const Scalar angle = static_cast<Scalar>(k) * theta;
    if (k < 0 || angle > std::numbers::pi_v<Scalar>) {
      std::ostringstream msg;
      msg << "rotation index " << k << " gives angle " << angle << " outside [0, pi]";
      throw PreconditionError(msg.str());
    }
    rotate_in_plane(frame, j, std::cos(angle), std::sin(angle));
  }
  return frame;
}

/// Angles a_1..a_{d-1} in [0, pi] such that R_d(a_{d-1})...R_2(a_1) e_1 = +-axis,
/// i.e. the frame built by frame_from_rotation_indices with k_j theta = a_j.
/// The first column of R_d(a_{d-1})...R_2(a_1) is
/// (prod cos a_i, sin a_1, sin a_2 cos a_1, ..., sin a_{d-1} prod_{i<d-1} cos a_i),
/// which is inverted from the last coordinate backwards.
template <class Scalar>
VectorX<Scalar> rotation_angles_for_axis(const VectorX<Scalar>& axis) {
  const int d = static_cast<int>(axis.size());
  VectorX<Scalar> b = axis / axis.norm();
  if (b[1] < 0) b = -b;
  VectorX<Scalar> angles(d - 1);
  Scalar lead = b[0];
  for (int j = d - 1; j >= 2; --j) {
    const Scalar norm = std::hypot(lead, b[j]);
    const Scalar prev = b[j] < 0 ? -norm : norm;
    if (prev == 0) {
      angles[j - 1] = 0;
    } else {
      angles[j - 1] = std::atan2(b[j] / prev, lead / prev);
    }
    lead = prev;
  }
  angles[0] = std::atan2(b[1], lead);
  return angles;
}

}  // namespace dforest
