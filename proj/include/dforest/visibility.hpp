#pragma once

#include "dforest/forest.hpp"

#include <cstdint>
#include <optional>
#include <span>

namespace dforest {

/// First parameter t at which x + t v comes within eps of a forest point.
struct VisibilityResult {
  std::optional<double> t;  // empty: nothing within eps of the segment [0, horizon]
  std::optional<std::uint32_t> blocker;
  double horizon = 0;

  bool beyond_horizon() const { return !t.has_value(); }
};

/// Grid-walk visibility query: cells along the ray are visited in entry order
/// and the walk stops once the next entry parameter exceeds the best hit.
/// Ties in t go to the smallest point identifier. Requires 0 < t_max <= L and eps < L/2.
VisibilityResult visibility(const GridIndex& index, const Point& x, const UnitVector& v, double eps, double t_max);
VisibilityResult visibility(const Forest& f, const Point& x, const UnitVector& v, double eps, double t_max);

/// Linear-scan reference with the same semantics.
VisibilityResult visibility_bruteforce(std::span<const Point> points, const Point& x, const UnitVector& v, double eps,
                                       double t_max, const Window& w);

struct SurveyReport {
  double eps = 0;
  /// Tube radius actually queried: eps for d = 2, eps sqrt(d-1) above.
  double query_eps = 0;
  std::uint64_t samples = 0;
  double t_max = 0;
  double V_eps = 0;
  /// t_max < V_eps, so only "beyond horizon" can be observed as a violation.
  bool capped = false;
  double max_t = 0;  // +inf if any query saw nothing within the horizon
  double p50 = 0;
  double p90 = 0;
  double p99 = 0;
  std::uint64_t violations = 0;
};

/// n random (x, v) queries with t_max = min(L, 2 V(eps)); counts samples whose
/// visibility exceeds V(eps) or reaches the horizon unobstructed.
SurveyReport survey(const Forest& f, double eps, std::uint64_t n, Seed seed, unsigned threads = 1);

/// Full re-scan: true iff no scale-k test box in the window is empty of forest points.
bool certify(const Forest& f, int k, unsigned threads = 1);

}  // namespace dforest
