#include "dforest/forest.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace dforest {

void BuildConfig::validate() const {
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw PreconditionError("lambda must be a finite nonnegative number");
  if (k_min < 2) throw PreconditionError("k_min must be >= 2");
  if (point_cap == 0) throw PreconditionError("point cap must be positive");
  for (int k = k_min; k <= k_max; ++k) {
    const ScaleParams params = scale_params(window.dim(), k, error_term);
    params.require_fits(window);
    (void)count_test_boxes(params);
  }
  if (!has_scales()) (void)scale_params(window.dim(), k_min, error_term);
}

Forest::Forest(BuildConfig config, std::span<const Point> points, std::span<const Provenance> provenance)
    : Forest(config, points, provenance,
             GridIndex::default_cell_size(config.window,
                                          std::ldexp(1.0, -config.finest_scale()))) {}

Forest::Forest(BuildConfig config, std::span<const Point> points, std::span<const Provenance> provenance,
               double cell_size)
    : config_(std::move(config)), index_(config_.window, cell_size) {
  if (points.size() != provenance.size()) throw PreconditionError("points and provenance differ in length");
  points_.reserve(points.size());
  provenance_.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) add(points[i], provenance[i]);
}

void Forest::add(const Point& p, Provenance prov) {
  if (p.size() != config_.window.dim()) throw PreconditionError("point dimension mismatch");
  if (points_.size() >= config_.point_cap) {
    throw std::length_error("forest exceeds the point cap of " + std::to_string(config_.point_cap));
  }
  index_.insert(p);
  points_.push_back(p);
  provenance_.push_back(prov);
}

Forest Forest::without_point(std::size_t id) const {
  if (id >= points_.size()) throw PreconditionError("point id out of range");
  std::vector<Point> pts;
  std::vector<Provenance> prov;
  pts.reserve(points_.size() - 1);
  prov.reserve(points_.size() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (i == id) continue;
    pts.push_back(points_[i]);
    prov.push_back(provenance_[i]);
  }
  return Forest(config_, pts, prov, index_.cell_size());
}

std::uint64_t Forest::count_with(Provenance prov) const {
  std::uint64_t n = 0;
  for (const auto& p : provenance_) n += p == prov ? 1 : 0;
  return n;
}

std::uint64_t count_empty_test_boxes(const GridIndex& index, const ScaleParams& params, unsigned threads) {
  const Window& w = index.window();
  params.require_fits(w);
  std::vector<std::array<std::int64_t, kMaxDim>> cubes;
  for_each_cube(w, [&](std::span<const std::int64_t> c) {
    std::array<std::int64_t, kMaxDim> a{};
    std::copy(c.begin(), c.end(), a.begin());
    cubes.push_back(a);
  });
  const auto d = static_cast<std::size_t>(w.dim());
  auto work = [&](std::size_t begin, std::size_t stride) {
    std::uint64_t empty = 0;
    for (std::size_t i = begin; i < cubes.size(); i += stride) {
      for_each_test_box(std::span<const std::int64_t>(cubes[i].data(), d), params, w,
                        [&](const TestBoxId&, const OrientedBox& box) {
                          if (!index.query_box_nonempty(box)) ++empty;
                        });
    }
    return empty;
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cubes.size())));
  if (threads == 1) return work(0, 1);
  std::vector<std::uint64_t> partial(threads, 0);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] { partial[t] = work(t, threads); });
  }
  for (auto& th : pool) th.join();
  std::uint64_t total = 0;
  for (auto v : partial) total += v;
  return total;
}

std::pair<Forest, BuildReport> build(const BuildConfig& cfg) {
  cfg.validate();
  const Window& w = cfg.window;
  const int d = w.dim();

  const std::vector<Point> poisson = sample_poisson(PoissonConfig(cfg.lambda, w), cfg.seed);
  if (poisson.size() > cfg.point_cap) throw std::length_error("Poisson sample exceeds the point cap");
  const std::vector<Provenance> tags(poisson.size(), Provenance::poisson());
  Forest forest(cfg, poisson, tags);

  BuildReport report;
  report.poisson_count = poisson.size();
  report.convergence = convergence_check(d, cfg.lambda);

  double cube_count = 1;
  for (int j = 0; j < d; ++j) cube_count *= static_cast<double>(w.cubes_per_side());

  // Snapshot of the bare Poisson sample for the emptiness-against-Poisson counts.
  std::optional<GridIndex> poisson_index;
  if (cfg.count_poisson_empty && cfg.has_scales()) poisson_index = forest.index();

  for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
    const auto start = std::chrono::steady_clock::now();
    const ScaleParams params = scale_params(d, k, cfg.error_term);
    ScaleReport sr;
    sr.k = k;
    sr.eps = params.eps;
    sr.nominal_cardinality = params.nominal_cardinality;
    sr.integer_count_per_cube = count_test_boxes(params);
    sr.integer_count_window = sr.integer_count_per_cube * static_cast<std::uint64_t>(cube_count);
    sr.expected_per_cube = expected_added(d, k, cfg.lambda, cfg.error_term);
    sr.expected_window = sr.expected_per_cube * cube_count;
    if (poisson_index) sr.poisson_empty = count_empty_test_boxes(*poisson_index, params);

    for_each_cube(w, [&](std::span<const std::int64_t> cube) {
      for_each_test_box(cube, params, w, [&](const TestBoxId&, const OrientedBox& box) {
        if (!forest.index().query_box_nonempty(box)) {
          forest.add(box.center(), Provenance::added(k));
          ++sr.added;
        }
      });
    });
    sr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.scales.push_back(sr);
  }
  report.total_points = forest.size();
  return {std::move(forest), std::move(report)};
}

namespace {

// (4 sqrt d)^d, exact for even d.
double four_sqrt_d_pow_d(int d) { return std::ldexp(std::pow(static_cast<double>(d), d / 2.0), 2 * d); }

}  // namespace

double expected_added(int d, int k, double lambda, const ErrorTerm& e) {
  if (k < 2) throw PreconditionError("scale index k must be >= 2");
  const ScaleParams params = scale_params(d, k, e);
  const double exponent = lambda * e(std::ldexp(1.0, k)) / four_sqrt_d_pow_d(d);
  return params.nominal_cardinality * std::exp(-exponent);
}

ConvergenceCheck convergence_check(int d, double lambda) {
  if (d < 2) throw PreconditionError("dimension must be >= 2");
  const int exponent = d * d + d - 1;
  const double threshold = exponent * four_sqrt_d_pow_d(d);
  return {threshold, lambda > threshold, exponent, 2 * (d + 1) * (d + 1)};
}

double density(const Forest& f, double radius, const Point& center) {
  const Window& w = f.window();
  if (!(radius > 0) || radius > w.half()) throw PreconditionError("density radius must be in (0, L/2]");
  const auto count = f.index().query_ball(center, radius).size();
  return static_cast<double>(count) / std::pow(radius, w.dim());
}

}  // namespace dforest
