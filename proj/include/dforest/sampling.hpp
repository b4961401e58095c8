#pragma once

#include "dforest/geometry.hpp"

#include <cstdint>
#include <vector>

namespace dforest {

/// Root of a reproducible random stream. Identical (value, stream) pairs give
/// identical draws on every platform.
struct Seed {
  std::uint64_t value = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Counter-based generator: draw i is a keyed 64-bit mix of i, so any
/// sub-stream can be addressed directly without sequential state.
class Rng {
 public:
  explicit Rng(Seed seed, std::uint64_t substream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }
  double normal();
  /// Poisson(mean) by inversion when mean <= 10, transformed rejection (PTRS) above.
  std::uint64_t poisson(double mean);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);

struct PoissonConfig {
  double lambda;
  Window window;

  PoissonConfig(double lambda_, Window w) : lambda(lambda_), window(w) {
    if (!(lambda_ >= 0)) throw PreconditionError("Poisson intensity must be nonnegative");
  }
};

/// Homogeneous Poisson process on the window. Sampled one unit cube at a time
/// (each cube on its own sub-stream), which is distributionally identical to
/// drawing N ~ Poisson(lambda L^d) and scattering N uniform points.
std::vector<Point> sample_poisson(const PoissonConfig& cfg, Seed seed);

/// Uniform direction on S^{d-1} (normalized isotropic Gaussian).
UnitVector uniform_direction(int d, Rng& rng);
UnitVector uniform_direction(int d, Seed seed);

/// Haar-distributed rotation matrix (Gram-Schmidt of a Gaussian matrix).
Mat uniform_rotation(int d, Rng& rng);

/// Uniform point in the window.
Point uniform_point(const Window& w, Rng& rng);

}  // namespace dforest
