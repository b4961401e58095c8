#include "dforest/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace dforest {

namespace {

void check_query(const Window& w, const Point& x, const UnitVector& v, double eps, double t_max) {
  if (x.size() != w.dim() || v.dim() != w.dim()) throw PreconditionError("query dimension mismatch");
  if (!w.contains(x)) throw PreconditionError("query origin outside the window");
  if (!(eps > 0) || eps >= w.half()) throw PreconditionError("eps must be in (0, L/2)");
  if (!(t_max > 0) || t_max > w.side()) throw PreconditionError("t_max must be in (0, L]");
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  std::uint32_t id = std::numeric_limits<std::uint32_t>::max();

  void offer(double t_new, std::uint32_t id_new) {
    if (t_new < t || (t_new == t && id_new < id)) {
      t = t_new;
      id = id_new;
    }
  }
};

/// First touch of the eps-ball around rel (relative to the ray origin) by the ray on [0, t_max].
inline bool first_touch(const double* rel, const double* v, int d, double eps, double t_max, double& t) {
  double s = 0;
  for (int j = 0; j < d; ++j) s += rel[j] * v[j];
  double perp2 = 0;
  for (int j = 0; j < d; ++j) {
    const double c = rel[j] - s * v[j];
    perp2 += c * c;
  }
  const double eps2 = eps * eps;
  if (perp2 > eps2) return false;
  const double half_chord = std::sqrt(eps2 - perp2);
  if (s + half_chord < 0 || s - half_chord > t_max) return false;
  t = std::max(0.0, s - half_chord);
  return true;
}

VisibilityResult to_result(const Hit& hit, double t_max) {
  VisibilityResult r;
  r.horizon = t_max;
  if (std::isfinite(hit.t)) {
    r.t = hit.t;
    r.blocker = hit.id;
  }
  return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t n) {
  std::int64_t q = a / n;
  if ((a % n != 0) && ((a < 0) != (n < 0))) --q;
  return q;
}

}  // namespace

VisibilityResult visibility(const GridIndex& index, const Point& x, const UnitVector& v, double eps, double t_max) {
  const Window& w = index.window();
  check_query(w, x, v, eps, t_max);
  const int d = w.dim();
  const std::int64_t n = index.cells_per_side();
  const double side = w.side();
  const auto ring = static_cast<std::int64_t>(std::ceil(eps / index.cell_size()));
  const std::int64_t width = 2 * ring + 1;
  std::int64_t ring_cells = 1;
  for (int j = 0; j < d; ++j) ring_cells *= width;

  Hit hit;
  const Segment seg(x, v, t_max, w);
  RayCellWalker walker(index, seg);
  RayCell cell;
  const double* dir = v.vec().data();
  double rel[kMaxDim];
  double shift[kMaxDim];
  while (walker.next(cell)) {
    // Any point not yet seen first touches the ray inside a cell entered later.
    if (cell.entry > hit.t) break;
    for (std::int64_t code = 0; code < ring_cells; ++code) {
      std::int64_t rem = code;
      CellCoord c = cell.cell;
      for (int j = 0; j < d; ++j) {
        c[j] += rem % width - ring;
        rem /= width;
        shift[j] = static_cast<double>(floor_div(c[j], n)) * side;
      }
      for (const auto id : index.bucket(index.linear_index(c))) {
        const double* y = index.coords(id);
        for (int j = 0; j < d; ++j) rel[j] = (y[j] + shift[j]) - x[j];
        double t = 0;
        if (first_touch(rel, dir, d, eps, t_max, t)) hit.offer(t, id);
      }
    }
  }
  return to_result(hit, t_max);
}

VisibilityResult visibility(const Forest& f, const Point& x, const UnitVector& v, double eps, double t_max) {
  return visibility(f.index(), x, v, eps, t_max);
}

VisibilityResult visibility_bruteforce(std::span<const Point> points, const Point& x, const UnitVector& v, double eps,
                                       double t_max, const Window& w) {
  check_query(w, x, v, eps, t_max);
  const int d = w.dim();
  Hit hit;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec base = torus_delta(x, points[i], w);
    for_each_image_shift(w, [&](const Vec& shift) {
      const Vec rel = base + shift;
      double t = 0;
      if (first_touch(rel.data(), v.vec().data(), d, eps, t_max, t)) hit.offer(t, static_cast<std::uint32_t>(i));
    });
  }
  return to_result(hit, t_max);
}

SurveyReport survey(const Forest& f, double eps, std::uint64_t n, Seed seed, unsigned threads) {
  const BuildConfig& cfg = f.config();
  const Window& w = f.window();
  const int d = w.dim();
  if (n == 0) throw PreconditionError("survey needs at least one sample");
  if (!(eps > 0)) throw PreconditionError("survey eps must be positive");

  SurveyReport r;
  r.eps = eps;
  r.query_eps = d == 2 ? eps : eps * std::sqrt(static_cast<double>(d - 1));
  r.samples = n;
  r.V_eps = visibility_bound(d, eps, cfg.error_term);
  r.t_max = std::min(w.side(), 2 * r.V_eps);
  r.capped = r.t_max < r.V_eps;

  std::vector<double> ts(n);
  auto work = [&](std::uint64_t begin, std::uint64_t stride) {
    for (std::uint64_t i = begin; i < n; i += stride) {
      Rng rng(seed, i);
      const Point x = uniform_point(w, rng);
      const UnitVector v = uniform_direction(d, rng);
      const auto res = visibility(f, x, v, r.query_eps, r.t_max);
      ts[i] = res.t.value_or(std::numeric_limits<double>::infinity());
    }
  };
  threads = std::max(1u, static_cast<unsigned>(std::min<std::uint64_t>(threads, n)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }

  for (const double t : ts) {
    if (t > r.V_eps || !std::isfinite(t)) ++r.violations;
  }
  std::sort(ts.begin(), ts.end());
  auto quantile = [&](double q) {
    auto rank = static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<std::uint64_t>(rank, 1, n);
    return ts[rank - 1];
  };
  r.max_t = ts.back();
  r.p50 = quantile(0.50);
  r.p90 = quantile(0.90);
  r.p99 = quantile(0.99);
  return r;
}

bool certify(const Forest& f, int k, unsigned threads) {
  const BuildConfig& cfg = f.config();
  if (k < cfg.k_min || k > cfg.k_max) throw PreconditionError("scale k=" + std::to_string(k) + " was not built");
  const ScaleParams params = scale_params(f.window().dim(), k, cfg.error_term);
  return count_empty_test_boxes(f.index(), params, threads) == 0;
}

}  // namespace dforest
