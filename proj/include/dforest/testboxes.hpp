#pragma once

// Per-scale test-box families: the parameters of each dyadic scale, streaming
// enumeration of the boxes over a unit cube, counting, and a constructive
// search showing a given large box contains one of them.

#include "dforest/geometry.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dforest {

/// Error term E in the visibility bound V(eps) = eps^{-(d-1)} E(1/eps).
class ErrorTerm {
 public:
  enum class Kind { log, table };

  /// E(x) = ln x.
  static ErrorTerm log();
  /// E given at dyadic points x = 2^k; interpolated linearly in log2(x) between entries.
  static ErrorTerm table(std::map<int, double> values_at_log2);
  /// Parses "log" or "table:k1=v1,k2=v2,..." (v may be a hex float).
  static ErrorTerm parse(const std::string& text);

  Kind kind() const { return kind_; }
  double operator()(double x) const;
  /// Throws PreconditionError unless 2^{-k} <= E(2^k) <= 2^k.
  void check_admissible_at(int k) const;
  /// Round-trippable textual form accepted by parse().
  std::string to_string() const;

 private:
  ErrorTerm(Kind kind, std::map<int, double> values) : kind_(kind), values_(std::move(values)) {}

  Kind kind_;
  std::map<int, double> values_;
};

inline constexpr std::uint64_t kUnrepresentable = std::numeric_limits<std::uint64_t>::max();

struct ScaleParams {
  int d = 2;
  int k = 2;
  double eps = 0.25;
  double theta = 0;
  double grid_spacing = 0;
  double short_side = 0;
  double long_side = 0;
  /// ceil(4 sqrt(d) / eps); kUnrepresentable if it does not fit.
  std::uint64_t grid_points_per_side = 0;
  /// floor(pi / theta) + 1, index 0 being the unrotated copy; kUnrepresentable if it does not fit.
  std::uint64_t rotations_per_axis = 0;
  double nominal_cardinality = 0;
  /// E(1/eps), cached.
  double error_value = 0;

  /// V(eps) = eps^{-(d-1)} E(1/eps).
  double visibility_bound() const { return long_side * 4.0 * std::sqrt(static_cast<double>(d)); }
  double test_box_circumradius() const;
  /// Test-box volume, E(1/eps) / (4 sqrt d)^d independently of eps.
  double test_box_volume() const;
  /// Throws WindowTooSmall unless every test box fits in half the window.
  void require_fits(const Window& w) const;
};

/// V(eps) for an arbitrary eps.
double visibility_bound(int d, double eps, const ErrorTerm& e);

ScaleParams scale_params(int d, int k, const ErrorTerm& e);

/// Same as scale_params with theta multiplied by `factor`. Debug control for
/// probing how coarse the rotation step can get before covering fails.
ScaleParams scale_params_with_theta_scale(int d, int k, const ErrorTerm& e, double factor);

struct TestBoxId {
  int d = 0;
  std::array<std::int64_t, kMaxDim> cube{};
  std::array<std::int64_t, kMaxDim> grid{};
  std::array<std::int64_t, kMaxDim - 1> rot{};

  friend bool operator==(const TestBoxId&, const TestBoxId&) = default;
};

/// Materializes the test box named by id.
OrientedBox make_test_box(const TestBoxId& id, const ScaleParams& params, const Window& w);

/// Streams the test boxes of one unit cube in grid-major, rotation-minor
/// lexicographic order. The current box is updated in place.
class TestBoxCursor {
 public:
  TestBoxCursor(std::span<const std::int64_t> cube, const ScaleParams& params, const Window& w);

  /// Advances to the next box; false once the stream is exhausted.
  bool next();

  const TestBoxId& id() const { return id_; }
  const OrientedBox& box() const { return box_; }

 private:
  void update_center();
  void update_frame();

  const ScaleParams& params_;
  Window window_;
  TestBoxId id_;
  OrientedBox box_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  bool started_ = false;
  bool done_ = false;
};

/// Calls fn(id, box) for every test box of the cube; fn may return false to stop early.
template <class Fn>
void for_each_test_box(std::span<const std::int64_t> cube, const ScaleParams& params, const Window& w, Fn&& fn) {
  TestBoxCursor cursor(cube, params, w);
  while (cursor.next()) {
    if constexpr (std::is_same_v<decltype(fn(cursor.id(), cursor.box())), bool>) {
      if (!fn(cursor.id(), cursor.box())) return;
    } else {
      fn(cursor.id(), cursor.box());
    }
  }
}

/// Test boxes per unit cube; throws std::overflow_error if the count does not fit in 64 bits.
std::uint64_t count_test_boxes(const ScaleParams& params);

/// Large box of the scale: d-1 sides 2 eps and one side V(eps) along frame.col(0).
OrientedBox make_large_box(const Point& center, const Mat& frame, const ScaleParams& params);

struct ContainedTestBox {
  TestBoxId id;
  OrientedBox box;
};

/// Finds a test box inside `large`, searching grid points of the large box's
/// unit cube within eps/2 of its center and rotation indices within one step
/// of its orientation. nullopt means covering failed for this box.
std::optional<ContainedTestBox> find_contained_test_box(const OrientedBox& large, const ScaleParams& params,
                                                        const Window& w);

struct AngleMargin {
  double phi_lower;  // lower bound 2 eps^d / E(1/eps) on sin(phi)
  bool ok;           // phi_lower >= theta
};

AngleMargin angle_margin_check(const ScaleParams& params);

struct Seed;

struct LemmaVerification {
  int d = 0;
  int k = 0;
  double theta = 0;
  double window_side = 0;
  std::uint64_t samples = 0;
  std::uint64_t failures = 0;
  AngleMargin margin{};
};

/// Monte Carlo check of the covering claim: `samples` large boxes with
/// uniform center in the unit cube [0,1)^d and Haar-uniform orientation, each
/// of which must contain a test box. theta_scale != 1 is a debug control.
LemmaVerification verify_lemma(int d, int k, const ErrorTerm& e, std::uint64_t samples, const Seed& seed,
                               double theta_scale = 1.0);

}  // namespace dforest
