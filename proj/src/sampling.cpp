#include "dforest/sampling.hpp"

#include <cmath>
#include <numbers>

namespace dforest {

std::uint64_t mix64(std::uint64_t x) {
  // SplitMix64 finalizer.
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(Seed seed, std::uint64_t substream)
    : key_(mix64(mix64(mix64(seed.value) ^ seed.stream) ^ (substream * 0xD1B54A32D192ED03ULL))) {}

std::uint64_t Rng::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(key_ ^ mix64(c));
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_open_low();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(phi);
  has_spare_normal_ = true;
  return r * std::cos(phi);
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0)) throw PreconditionError("Poisson mean must be nonnegative");
  if (mean == 0) return 0;
  if (mean <= 10.0) {
    // Inversion by sequential search.
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p == 0 && cdf < u) break;
    }
    return k;
  }
  // Hormann (1993), PTRS.
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - std::lgamma(k + 1)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

std::vector<Point> sample_poisson(const PoissonConfig& cfg, Seed seed) {
  const Window& w = cfg.window;
  const int d = w.dim();
  std::vector<Point> points;
  if (cfg.lambda == 0) return points;

  const std::int64_t per_side = w.cubes_per_side();
  std::int64_t cubes = 1;
  for (int j = 0; j < d; ++j) cubes *= per_side;
  points.reserve(static_cast<std::size_t>(cfg.lambda * static_cast<double>(cubes) * 1.05) + 16);

  Vec corner(d);
  for (std::int64_t c = 0; c < cubes; ++c) {
    std::int64_t rem = c;
    for (int j = 0; j < d; ++j) {
      corner[j] = static_cast<double>(rem % per_side);
      rem /= per_side;
    }
    Rng rng(seed, static_cast<std::uint64_t>(c));
    const std::uint64_t n = rng.poisson(cfg.lambda);
    for (std::uint64_t i = 0; i < n; ++i) {
      Point p(d);
      for (int j = 0; j < d; ++j) p[j] = w.wrap(corner[j] + rng.uniform());
      points.push_back(p);
    }
  }
  return points;
}

UnitVector uniform_direction(int d, Rng& rng) {
  if (d < 2 || d > kMaxDim) throw PreconditionError("unsupported dimension");
  for (;;) {
    Vec g(d);
    for (int j = 0; j < d; ++j) g[j] = rng.normal();
    const double n = g.norm();
    if (n > 1e-300) return UnitVector::normalized(g);
  }
}

UnitVector uniform_direction(int d, Seed seed) {
  Rng rng(seed);
  return uniform_direction(d, rng);
}

Mat uniform_rotation(int d, Rng& rng) {
  if (d < 2 || d > kMaxDim) throw PreconditionError("unsupported dimension");
  Mat q(d, d);
  for (int col = 0; col < d; ++col) {
    for (;;) {
      Vec g(d);
      for (int j = 0; j < d; ++j) g[j] = rng.normal();
      for (int prev = 0; prev < col; ++prev) g -= q.col(prev).dot(g) * q.col(prev);
      // Second pass keeps the columns orthonormal to rounding.
      for (int prev = 0; prev < col; ++prev) g -= q.col(prev).dot(g) * q.col(prev);
      const double n = g.norm();
      if (n > 1e-8) {
        q.col(col) = g / n;
        break;
      }
    }
  }
  return q;
}

Point uniform_point(const Window& w, Rng& rng) {
  Point p(w.dim());
  for (int j = 0; j < w.dim(); ++j) p[j] = w.wrap(rng.uniform() * w.side());
  return p;
}

}  // namespace dforest
