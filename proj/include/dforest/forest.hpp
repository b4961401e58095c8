#pragma once

// Dense-forest construction: a Poisson sample, then one gap-filling pass per
// dyadic scale that drops a point at the centre of every test box still empty
// when it is examined.

#include "dforest/sampling.hpp"
#include "dforest/spatial_index.hpp"
#include "dforest/testboxes.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace dforest {

/// Where a forest point came from: the Poisson sample, or the gap-filling pass at scale k.
struct Provenance {
  int scale = 0;  // 0 for Poisson points

  static Provenance poisson() { return {0}; }
  static Provenance added(int k) { return {k}; }
  bool is_poisson() const { return scale == 0; }

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

inline constexpr std::uint64_t kDefaultPointCap = 100'000'000;

struct BuildConfig {
  Window window{2, 4};
  double lambda = 161;
  int k_min = 2;
  int k_max = 3;
  ErrorTerm error_term = ErrorTerm::log();
  Seed seed{1, 0};
  std::uint64_t point_cap = kDefaultPointCap;
  /// Also count test boxes empty against the bare Poisson sample (doubles the probe work).
  bool count_poisson_empty = true;

  /// Throws PreconditionError / WindowTooSmall on any violated precondition.
  void validate() const;
  bool has_scales() const { return k_max >= k_min; }
  /// Scale that fixes the index cell size: the finest built one, or k_min if none are built.
  int finest_scale() const { return has_scales() ? k_max : k_min; }
};

class Forest {
 public:
  Forest(BuildConfig config, std::span<const Point> points, std::span<const Provenance> provenance);
  Forest(BuildConfig config, std::span<const Point> points, std::span<const Provenance> provenance,
         double cell_size);

  const BuildConfig& config() const { return config_; }
  const Window& window() const { return config_.window; }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<Provenance>& provenance() const { return provenance_; }
  const GridIndex& index() const { return index_; }
  std::size_t size() const { return points_.size(); }

  void add(const Point& p, Provenance prov);
  /// Copy of this forest with point `id` removed (identifiers above it shift down).
  Forest without_point(std::size_t id) const;
  std::uint64_t count_with(Provenance prov) const;

 private:
  BuildConfig config_;
  std::vector<Point> points_;
  std::vector<Provenance> provenance_;
  GridIndex index_;
};

struct ScaleReport {
  int k = 0;
  double eps = 0;
  std::uint64_t added = 0;
  /// N_k per unit cube, from the nominal cardinality.
  double expected_per_cube = 0;
  /// N_k L^d.
  double expected_window = 0;
  double nominal_cardinality = 0;
  std::uint64_t integer_count_per_cube = 0;
  std::uint64_t integer_count_window = 0;
  /// Test boxes empty against the bare Poisson sample, when requested.
  std::optional<std::uint64_t> poisson_empty;
  double wall_seconds = 0;
};

struct ConvergenceCheck {
  double threshold;     // (d^2 + d - 1) (4 sqrt d)^d
  bool converges;       // lambda > threshold
  int exponent;         // d^2 + d - 1
  int loose_exponent;   // 2 (d + 1)^2, the looser bound
};

struct BuildReport {
  std::uint64_t poisson_count = 0;
  std::uint64_t total_points = 0;
  ConvergenceCheck convergence{};
  std::vector<ScaleReport> scales;
};

std::pair<Forest, BuildReport> build(const BuildConfig& cfg);

/// Expected number of test boxes per unit cube empty of Poisson points at scale k.
double expected_added(int d, int k, double lambda, const ErrorTerm& e);

ConvergenceCheck convergence_check(int d, double lambda);

/// #(points in the torus ball B(center, T)) / T^d.
double density(const Forest& f, double radius, const Point& center);

/// Calls fn(cube) for every unit cube of the window, last coordinate fastest.
template <class Fn>
void for_each_cube(const Window& w, Fn&& fn) {
  const int d = w.dim();
  const std::int64_t n = w.cubes_per_side();
  std::array<std::int64_t, kMaxDim> cube{};
  for (;;) {
    fn(std::span<const std::int64_t>(cube.data(), static_cast<std::size_t>(d)));
    int j = d - 1;
    while (j >= 0 && cube[j] == n - 1) {
      cube[j] = 0;
      --j;
    }
    if (j < 0) return;
    ++cube[j];
  }
}

/// Number of test boxes of the scale, over the whole window, containing no indexed point.
/// Cubes are split across `threads` workers; the index is only read.
std::uint64_t count_empty_test_boxes(const GridIndex& index, const ScaleParams& params, unsigned threads = 1);

}  // namespace dforest
