#include "dforest/sampling.hpp"
#include "dforest/spatial_index.hpp"
#include "dforest/testboxes.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace {

using namespace dforest;

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::vector<Point> random_points(int d, double L, std::size_t n, std::uint64_t seed) {
  Rng rng(Seed{seed, 0});
  const Window w(d, L);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(uniform_point(w, rng));
  return pts;
}

std::vector<std::uint32_t> ball_bruteforce(const std::vector<Point>& pts, const Point& p, double r, const Window& w) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    if (torus_distance(pts[i], p, w) <= r) out.push_back(i);
  }
  return out;
}

TEST(GridIndex, Construction) {
  const Window w(2, 4);
  EXPECT_NO_THROW(GridIndex(w, 0.25));
  EXPECT_THROW(GridIndex(w, 0.3), PreconditionError);
  EXPECT_THROW(GridIndex(w, 0.0), PreconditionError);
  EXPECT_THROW(GridIndex(Window(2, 4096), 1.0 / 1024), PreconditionError);
  const GridIndex idx(w, 0.5);
  EXPECT_EQ(idx.cells_per_side(), 8);
  EXPECT_EQ(idx.bucket_count(), 64u);
}

TEST(GridIndex, DefaultCellSize) {
  const Window w(2, 4);
  const double h = GridIndex::default_cell_size(w, 0.125);
  EXPECT_GE(h, 0.125);
  EXPECT_DOUBLE_EQ(w.side() / h, std::round(w.side() / h));
  EXPECT_GE(GridIndex::default_cell_size(Window(2, 512), 1.0 / 64), 2.0);
  const double h8 = GridIndex::default_cell_size(Window(8, 8), 0.25);
  EXPECT_LE(std::pow(8 / h8, 8), 4194304.0);
}

TEST(GridIndex, EmptyInputHasEmptyBuckets) {
  const GridIndex idx = GridIndex::build({}, 0.5, Window(2, 4));
  for (std::size_t i = 0; i < idx.bucket_count(); ++i) EXPECT_TRUE(idx.bucket(i).empty());
  EXPECT_EQ(idx.size(), 0u);
}

TEST(GridIndex, OnePointPerCellCentre) {
  const Window w(2, 4);
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) pts.push_back(vec2(0.25 + 0.5 * i, 0.25 + 0.5 * j));
  const GridIndex idx = GridIndex::build(pts, 0.5, w);
  for (std::size_t i = 0; i < idx.bucket_count(); ++i) EXPECT_EQ(idx.bucket(i).size(), 1u);
  EXPECT_EQ(idx.point(9), pts[9]);
}

TEST(GridIndex, IncrementalEqualsBatch) {
  const Window w(3, 3);
  const auto pts = random_points(3, 3, 400, 5);
  const GridIndex batch = GridIndex::build(pts, 0.5, w);
  GridIndex inc(w, 0.5);
  for (const auto& p : pts) inc.insert(p);
  ASSERT_EQ(batch.bucket_count(), inc.bucket_count());
  for (std::size_t i = 0; i < batch.bucket_count(); ++i) EXPECT_EQ(batch.bucket(i), inc.bucket(i));
}

TEST(QueryBall, Examples) {
  const Window w(2, 4);
  const std::vector<Point> pts{vec2(1, 1), vec2(3.95, 2)};
  const GridIndex idx = GridIndex::build(pts, 0.5, w);
  EXPECT_TRUE(idx.query_ball(vec2(2, 2), 0.5).empty());
  EXPECT_EQ(idx.query_ball(vec2(0.05, 2), 0.2), std::vector<std::uint32_t>{1});
  EXPECT_EQ(idx.query_ball(vec2(1, 1), 0), std::vector<std::uint32_t>{0});
  EXPECT_THROW(idx.query_ball(vec2(1, 1), 2.1), PreconditionError);
}

TEST(QueryBall, MatchesBruteForce) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> rad(0.0, 1.9);
  for (int d : {2, 3}) {
    const Window w(d, 4);
    const auto pts = random_points(d, 4, 600, 6 + d);
    for (double h : {0.25, 0.5, 1.0}) {
      const GridIndex idx = GridIndex::build(pts, h, w);
      const auto queries = random_points(d, 4, 200, 100 + d);
      for (const auto& q : queries) {
        const double r = rad(gen);
        EXPECT_EQ(idx.query_ball(q, r), ball_bruteforce(pts, q, r, w));
      }
    }
  }
}

TEST(QueryBoxNonempty, Examples) {
  const Window w(2, 4);
  const std::vector<Point> pts{vec2(1, 1)};
  const GridIndex idx = GridIndex::build(pts, 0.25, w);
  EXPECT_TRUE(idx.query_box_nonempty(OrientedBox(vec2(1, 1), vec2(0.5, 0.01), Mat::Identity(2, 2))));
  EXPECT_FALSE(idx.query_box_nonempty(OrientedBox(vec2(3, 3), vec2(0.5, 0.5), Mat::Identity(2, 2))));
  EXPECT_TRUE(idx.query_box_nonempty(OrientedBox(vec2(1.5, 1), vec2(0.5, 0.01), Mat::Identity(2, 2))));
  EXPECT_FALSE(idx.query_box_nonempty(OrientedBox(vec2(1.5 + 1e-9, 1), vec2(0.5, 0.01), Mat::Identity(2, 2))));
}

TEST(QueryBoxNonempty, MatchesBruteForceOnRandomBoxes) {
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> longh(0.05, 1.4), shorth(0.002, 0.2);
  for (int d : {2, 3}) {
    const Window w(d, 4);
    const auto pts = random_points(d, 4, d == 2 ? 300 : 1500, 30 + d);
    for (double h : {0.125, 0.5}) {
      const GridIndex idx = GridIndex::build(pts, h, w);
      Rng rng(Seed{40, static_cast<std::uint64_t>(d)});
      int hits = 0;
      for (int i = 0; i < 3000; ++i) {
        Vec half = Vec::Constant(d, shorth(gen));
        half[0] = longh(gen);
        if (half.norm() > 2) continue;
        const OrientedBox b(uniform_point(w, rng), half, uniform_rotation(d, rng));
        const bool fast = idx.query_box_nonempty(b);
        EXPECT_EQ(fast, box_nonempty_bruteforce(pts, b, w));
        hits += fast;
      }
      EXPECT_GT(hits, 300);
      EXPECT_LT(hits, 2700);
    }
  }
}

TEST(QueryBoxNonempty, MatchesBruteForceOnTestBoxes) {
  const Window w(2, 4);
  const ScaleParams p = scale_params(2, 2, ErrorTerm::log());
  const auto pts = random_points(2, 4, 2560, 7);
  const GridIndex idx = GridIndex::build(pts, GridIndex::default_cell_size(w, p.eps), w);
  const std::int64_t cube[2] = {3, 3};
  std::uint64_t n = 0, empty = 0;
  for_each_test_box(cube, p, w, [&](const TestBoxId&, const OrientedBox& b) {
    if (n++ % 7 != 0) return;
    const bool fast = idx.query_box_nonempty(b);
    EXPECT_EQ(fast, box_nonempty_bruteforce(pts, b, w));
    empty += !fast;
  });
  EXPECT_GT(empty, 0u);
}

std::vector<RayCell> cells_of(const GridIndex& idx, const Vec& o, const Vec& dir, double len) {
  return ray_cells(idx, Segment(o, UnitVector::normalized(dir), len, idx.window()));
}

TEST(RayCells, AxisParallelFromCorner) {
  const GridIndex idx(Window(2, 4), 0.5);
  const auto cells = cells_of(idx, vec2(1, 1), vec2(1, 0), 1.5);
  ASSERT_EQ(cells.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(cells[i].cell[0], 2 + i);
    EXPECT_EQ(cells[i].cell[1], 2);
    EXPECT_DOUBLE_EQ(cells[i].entry, i == 0 ? 0.0 : 0.5 * i);
  }
}

TEST(RayCells, DiagonalThroughCornerYieldsAllIncidentCells) {
  const GridIndex idx(Window(2, 4), 0.5);
  const auto cells = cells_of(idx, vec2(0.25, 0.25), vec2(1, 1), 0.5);
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (const auto& c : cells) seen.insert({c.cell[0], c.cell[1]});
  const std::set<std::pair<std::int64_t, std::int64_t>> expected{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  EXPECT_EQ(seen, expected);
  EXPECT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells.front().cell[0], 0);
  EXPECT_NEAR(cells.back().entry, 0.25 * std::sqrt(2.0), 1e-12);
}

TEST(RayCells, WrapsAcrossTheSeam) {
  const GridIndex idx(Window(2, 4), 1.0);
  const auto cells = cells_of(idx, vec2(3.5, 0.5), vec2(1, 0), 1.0);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[1].cell[0], 4);
  EXPECT_EQ(cells[1].linear, idx.linear_index(CellCoord{0, 0}));
}

TEST(RayCells, OrderedUniqueAndCovering) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> len(0.05, 1.0);
  for (int d : {2, 3}) {
    const Window w(d, 4);
    const GridIndex idx(w, 0.25);
    Rng rng(Seed{50, static_cast<std::uint64_t>(d)});
    for (int i = 0; i < 300; ++i) {
      const Point o = uniform_point(w, rng);
      const UnitVector v = uniform_direction(d, rng);
      const double L = 4 * len(gen);
      const auto cells = ray_cells(idx, Segment(o, v, L, w));
      std::set<std::vector<std::int64_t>> lift;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (c > 0) EXPECT_GE(cells[c].entry, cells[c - 1].entry);
        EXPECT_TRUE(lift.insert(std::vector<std::int64_t>(cells[c].cell.begin(), cells[c].cell.begin() + d)).second);
      }
      // Every sampled point of the segment lies in a yielded cell.
      for (int s = 0; s <= 2000; ++s) {
        const Vec x = o + (L * s / 2000.0) * v.vec();
        std::vector<std::int64_t> key(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) key[j] = static_cast<std::int64_t>(std::floor(x[j] / 0.25));
        EXPECT_TRUE(lift.count(key)) << "segment " << i << " sample " << s;
      }
    }
  }
}

}  // namespace
