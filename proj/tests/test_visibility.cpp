#include "dforest/visibility.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using namespace dforest;

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

BuildConfig config(double L, double lambda, int k_min, int k_max, int d = 2) {
  BuildConfig cfg;
  cfg.window = Window(d, L);
  cfg.lambda = lambda;
  cfg.k_min = k_min;
  cfg.k_max = k_max;
  cfg.count_poisson_empty = false;
  return cfg;
}

Forest forest_of(const BuildConfig& cfg, const std::vector<Point>& pts, double cell_size) {
  const std::vector<Provenance> tags(pts.size(), Provenance::poisson());
  return Forest(cfg, pts, tags, cell_size);
}

// Smallest t on [0, t_max] with |x + t v - p| <= eps, by bisection on the
// distance from p to the prefix segment [x, x + t v].
double first_touch_bisect(const Point& p, const Point& x, const UnitVector& v, double eps, double t_max,
                          const Window& w) {
  auto within = [&](double t) {
    if (t == 0) return torus_distance(p, x, w) <= eps;
    return dist_point_segment(p, Segment(x, v, t, w), w).distance <= eps;
  };
  if (within(0)) return 0;
  if (!within(t_max)) return std::numeric_limits<double>::infinity();
  double lo = 0, hi = t_max;
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    (within(mid) ? hi : lo) = mid;
  }
  return hi;
}

TEST(Visibility, Examples) {
  const BuildConfig cfg = config(100, 0, 2, 1);
  const UnitVector ex(vec2(1, 0));

  const Forest at_origin = forest_of(cfg, {vec2(10, 10)}, 1.0);
  auto r = visibility(at_origin, vec2(10, 10), ex, 0.5, 50);
  ASSERT_TRUE(r.t);
  EXPECT_EQ(*r.t, 0.0);

  const Forest ahead = forest_of(cfg, {vec2(1, 0)}, 1.0);
  r = visibility(ahead, vec2(0, 0), ex, 0.5, 50);
  ASSERT_TRUE(r.t);
  EXPECT_DOUBLE_EQ(*r.t, 0.5);
  EXPECT_EQ(*r.blocker, 0u);

  const Forest off_axis = forest_of(cfg, {vec2(1, 0.3)}, 1.0);
  r = visibility(off_axis, vec2(0, 0), ex, 0.5, 50);
  ASSERT_TRUE(r.t);
  EXPECT_NEAR(*r.t, 0.6, 1e-15);
}

TEST(Visibility, TieGoesToSmallerIdentifier) {
  const BuildConfig cfg = config(100, 0, 2, 1);
  const UnitVector ex(vec2(1, 0));
  const Forest f = forest_of(cfg, {vec2(1, 0.7), vec2(1, 1.3)}, 1.0);
  auto r = visibility(f, vec2(0, 1), ex, 0.5, 50);
  ASSERT_TRUE(r.t);
  EXPECT_EQ(*r.blocker, 0u);
  const std::vector<Point> pts{vec2(1, 1.3), vec2(1, 0.7)};
  r = visibility_bruteforce(pts, vec2(0, 1), ex, 0.5, 50, cfg.window);
  ASSERT_TRUE(r.t);
  EXPECT_NEAR(*r.t, 0.6, 1e-15);
  EXPECT_EQ(*r.blocker, 0u);
}

TEST(Visibility, EmptyForestIsBeyondHorizon) {
  const BuildConfig cfg = config(4, 0, 2, 1);
  const Forest f = forest_of(cfg, {}, 0.5);
  const auto r = visibility(f, vec2(1, 1), UnitVector(vec2(0, 1)), 0.25, 4);
  EXPECT_TRUE(r.beyond_horizon());
  EXPECT_EQ(r.horizon, 4);
  EXPECT_TRUE(visibility_bruteforce({}, vec2(1, 1), UnitVector(vec2(0, 1)), 0.25, 4, cfg.window).beyond_horizon());
}

TEST(Visibility, WrapsAroundTheWindow) {
  const BuildConfig cfg = config(4, 0, 2, 1);
  const Forest f = forest_of(cfg, {vec2(0.5, 2)}, 0.5);
  const auto r = visibility(f, vec2(3, 2), UnitVector(vec2(1, 0)), 0.25, 4);
  ASSERT_TRUE(r.t);
  EXPECT_NEAR(*r.t, 1.25, 1e-12);
}

TEST(Visibility, Preconditions) {
  const BuildConfig cfg = config(4, 0, 2, 1);
  const Forest f = forest_of(cfg, {}, 0.5);
  const UnitVector ex(vec2(1, 0));
  EXPECT_THROW(visibility(f, vec2(1, 1), ex, 0.0, 1), PreconditionError);
  EXPECT_THROW(visibility(f, vec2(1, 1), ex, 2.0, 1), PreconditionError);
  EXPECT_THROW(visibility(f, vec2(1, 1), ex, 0.1, 4.5), PreconditionError);
  EXPECT_THROW(visibility(f, vec2(4, 1), ex, 0.1, 1), PreconditionError);
}

TEST(Visibility, AgreesWithBruteForce) {
  for (int d : {2, 3}) {
    const double L = 4;
    const BuildConfig cfg = config(L, 0, 2, 1, d);
    Rng rng(Seed{61, static_cast<std::uint64_t>(d)});
    std::vector<Point> pts;
    for (int i = 0; i < 500; ++i) pts.push_back(uniform_point(cfg.window, rng));
    for (double h : {0.25, 1.0}) {
      const Forest f = forest_of(cfg, pts, h);
      for (int q = 0; q < 500; ++q) {
        const Point x = uniform_point(cfg.window, rng);
        const UnitVector v = uniform_direction(d, rng);
        const double eps = 0.02 + 0.3 * rng.uniform();
        const double t_max = L * (0.05 + 0.95 * rng.uniform());
        const auto fast = visibility(f, x, v, eps, t_max);
        const auto slow = visibility_bruteforce(pts, x, v, eps, t_max, cfg.window);
        ASSERT_EQ(fast.t.has_value(), slow.t.has_value());
        if (fast.t) {
          EXPECT_LE(std::abs(*fast.t - *slow.t), 1e-9);
          EXPECT_EQ(*fast.blocker, *slow.blocker);
        }
      }
    }
  }
}

TEST(Visibility, FirstTouchMatchesIndependentBisection) {
  const BuildConfig cfg = config(4, 0, 2, 1);
  Rng rng(Seed{62, 0});
  std::vector<Point> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(uniform_point(cfg.window, rng));
  const Forest f = forest_of(cfg, pts, 0.5);
  for (int q = 0; q < 300; ++q) {
    const Point x = uniform_point(cfg.window, rng);
    const UnitVector v = uniform_direction(2, rng);
    const double eps = 0.1;
    const auto r = visibility(f, x, v, eps, 4);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::min(best, first_touch_bisect(p, x, v, eps, 4, cfg.window));
    ASSERT_EQ(r.t.has_value(), std::isfinite(best));
    if (r.t) {
      EXPECT_NEAR(*r.t, best, 1e-9);
      if (*r.t > 0) {
        EXPECT_NEAR(torus_distance(cfg.window.wrap(x + *r.t * v.vec()), pts[*r.blocker], cfg.window), eps, 1e-9);
      }
    }
  }
}

TEST(Visibility, MonotoneInEps) {
  const BuildConfig cfg = config(4, 0, 2, 1);
  Rng rng(Seed{63, 0});
  std::vector<Point> pts;
  for (int i = 0; i < 300; ++i) pts.push_back(uniform_point(cfg.window, rng));
  const Forest f = forest_of(cfg, pts, 0.25);
  for (int q = 0; q < 300; ++q) {
    const Point x = uniform_point(cfg.window, rng);
    const UnitVector v = uniform_direction(2, rng);
    const auto a = visibility(f, x, v, 0.05, 4);
    const auto b = visibility(f, x, v, 0.1, 4);
    if (a.t) {
      ASSERT_TRUE(b.t);
      EXPECT_LE(*b.t, *a.t);
    }
  }
}

TEST(Visibility, TranslationEquivariant) {
  const BuildConfig cfg = config(4, 0, 2, 1);
  Rng rng(Seed{64, 0});
  std::vector<Point> pts, moved;
  const Vec shift = vec2(1.375, 2.625);
  for (int i = 0; i < 300; ++i) {
    pts.push_back(uniform_point(cfg.window, rng));
    moved.push_back(cfg.window.wrap(pts.back() + shift));
  }
  const Forest f = forest_of(cfg, pts, 0.25), g = forest_of(cfg, moved, 0.25);
  for (int q = 0; q < 300; ++q) {
    const Point x = uniform_point(cfg.window, rng);
    const UnitVector v = uniform_direction(2, rng);
    const auto a = visibility(f, x, v, 0.08, 4);
    const auto b = visibility(g, cfg.window.wrap(x + shift), v, 0.08, 4);
    ASSERT_EQ(a.t.has_value(), b.t.has_value());
    if (a.t) EXPECT_NEAR(*a.t, *b.t, 1e-9);
  }
}

TEST(Survey, SaturatedGridSeesNothingFar) {
  const BuildConfig cfg = config(4, 0, 2, 3);
  std::vector<Point> pts;
  const double spacing = 0.125;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) pts.push_back(vec2(i * spacing, j * spacing));
  const Forest f = forest_of(cfg, pts, 0.25);
  const auto r = survey(f, 0.125, 500, Seed{5, 0});
  EXPECT_EQ(r.max_t, 0.0);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_EQ(r.samples, 500u);
  EXPECT_TRUE(r.capped);
  EXPECT_EQ(r.t_max, 4.0);
  EXPECT_NEAR(r.V_eps, 8 * std::log(8.0), 1e-12);
}

TEST(Survey, PoissonForestShowsLongSightLines) {
  // lambda 0.2, eps 1/8: P(t > V) is about exp(-0.2 * 0.25 * 16.64) ~ 0.43.
  BuildConfig cfg = config(32, 0.2, 2, 1);
  const auto [f, report] = build(cfg);
  const auto r = survey(f, 0.125, 200, Seed{6, 0});
  EXPECT_FALSE(r.capped);
  EXPECT_GT(r.violations, 20u);
  EXPECT_GT(r.max_t, r.V_eps);
}

TEST(Survey, QueryRadiusGrowsWithDimension) {
  const BuildConfig cfg = config(4, 0, 2, 2, 3);
  const Forest f = forest_of(cfg, {}, 1.0);
  const auto r = survey(f, 0.25, 10, Seed{1, 0});
  EXPECT_NEAR(r.query_eps, 0.25 * std::sqrt(2.0), 1e-15);
  EXPECT_EQ(r.violations, 10u);
  EXPECT_TRUE(std::isinf(r.max_t));
}

TEST(Survey, DeterministicAndThreadIndependent) {
  const auto [f, report] = build(config(3, 60, 2, 2));
  const auto a = survey(f, 0.25, 400, Seed{7, 1}, 1);
  const auto b = survey(f, 0.25, 400, Seed{7, 1}, 3);
  EXPECT_EQ(a.max_t, b.max_t);
  EXPECT_EQ(a.p50, b.p50);
  EXPECT_EQ(a.p99, b.p99);
  EXPECT_EQ(a.violations, b.violations);
  EXPECT_LE(a.p50, a.p90);
  EXPECT_LE(a.p90, a.p99);
  EXPECT_LE(a.p99, a.max_t);
}

TEST(Certify, FreshBuildAndMutation) {
  const auto [f, report] = build(config(2, 0, 2, 2));
  EXPECT_TRUE(certify(f, 2));
  EXPECT_THROW(certify(f, 3), PreconditionError);

  // Remove an added point whose own test box then holds no other point.
  const ScaleParams p = scale_params(2, 2, ErrorTerm::log());
  bool mutated = false;
  for (std::size_t id = f.size(); id-- > 0 && !mutated;) {
    const Forest g = f.without_point(id);
    const Point& c = f.points()[id];
    TestBoxId box_id;
    box_id.d = 2;
    for (int j = 0; j < 2; ++j) {
      box_id.cube[j] = static_cast<std::int64_t>(std::floor(c[j]));
      box_id.grid[j] = std::llround((c[j] - box_id.cube[j]) / p.grid_spacing);
    }
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(p.rotations_per_axis) && !mutated; ++r) {
      box_id.rot[0] = r;
      const OrientedBox b = make_test_box(box_id, p, f.window());
      if (!box_nonempty_bruteforce(g.points(), b, g.window())) {
        mutated = true;
        EXPECT_FALSE(certify(g, 2));
      }
    }
  }
  EXPECT_TRUE(mutated);
}

TEST(Certify, DensePoissonNeedsNoFill) {
  const auto [f, report] = build(config(2, 3000, 2, 2));
  EXPECT_EQ(report.scales[0].added, 0u);
  EXPECT_TRUE(certify(f, 2));
}

}  // namespace
