#include "dforest/testboxes.hpp"

#include "dforest/sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace dforest {

namespace {

double parse_double(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw PreconditionError("bad number '" + text + "'");
  return v;
}

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw std::overflow_error("test box count overflows 64 bits");
  }
  return a * b;
}

std::uint64_t to_count(double v) {
  // Counts above 2^62 are not representable for enumeration purposes.
  if (!(v < 0x1p62)) return kUnrepresentable;
  return static_cast<std::uint64_t>(v);
}

}  // namespace

ErrorTerm ErrorTerm::log() { return ErrorTerm(Kind::log, {}); }

ErrorTerm ErrorTerm::table(std::map<int, double> values_at_log2) {
  if (values_at_log2.empty()) throw PreconditionError("error term table is empty");
  if (values_at_log2.begin()->first < 1) throw PreconditionError("error term table keys must be >= 1 (x >= 2)");
  ErrorTerm e(Kind::table, std::move(values_at_log2));
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [k, v] : e.values_) {
    if (v < prev) throw PreconditionError("error term must be nondecreasing");
    prev = v;
    e.check_admissible_at(k);
  }
  return e;
}

ErrorTerm ErrorTerm::parse(const std::string& text) {
  if (text == "log") return log();
  const std::string prefix = "table:";
  if (text.rfind(prefix, 0) != 0) throw PreconditionError("unknown error term '" + text + "'");
  std::map<int, double> values;
  std::stringstream ss(text.substr(prefix.size()));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw PreconditionError("error term table entry needs k=value: '" + item + "'");
    int k = 0;
    const std::string key = item.substr(0, eq);
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), k);
    if (ec != std::errc() || ptr != key.data() + key.size()) throw PreconditionError("bad table key '" + key + "'");
    values[k] = parse_double(item.substr(eq + 1));
  }
  return table(std::move(values));
}

double ErrorTerm::operator()(double x) const {
  if (kind_ == Kind::log) return std::log(x);
  const double lx = std::log2(x);
  const double lo_key = values_.begin()->first;
  const double hi_key = values_.rbegin()->first;
  if (lx < lo_key - 1e-12 || lx > hi_key + 1e-12) {
    throw PreconditionError("error term table does not cover x = " + std::to_string(x));
  }
  const int k = static_cast<int>(std::lround(lx));
  if (std::abs(lx - k) < 1e-12) {
    if (auto it = values_.find(k); it != values_.end()) return it->second;
  }
  auto hi = values_.upper_bound(static_cast<int>(std::floor(lx)));
  if (hi == values_.end()) return values_.rbegin()->second;
  auto lo = std::prev(hi);
  const double f = (lx - lo->first) / (hi->first - lo->first);
  return lo->second + f * (hi->second - lo->second);
}

void ErrorTerm::check_admissible_at(int k) const {
  const double x = std::ldexp(1.0, k);
  const double e = (*this)(x);
  if (!(e <= x && e >= 1.0 / x)) {
    std::ostringstream msg;
    msg << "error term is not admissible at eps = 2^-" << k << ": need eps <= E(1/eps) <= 1/eps, got " << e;
    throw PreconditionError(msg.str());
  }
}

std::string ErrorTerm::to_string() const {
  if (kind_ == Kind::log) return "log";
  std::string out = "table:";
  bool first = true;
  for (const auto& [k, v] : values_) {
    if (!first) out += ',';
    first = false;
    out += std::to_string(k) + "=" + hex_double(v);
  }
  return out;
}

double ScaleParams::test_box_circumradius() const {
  const double half_long = long_side / 2;
  const double half_short = short_side / 2;
  return std::sqrt(half_long * half_long + (d - 1) * half_short * half_short);
}

double ScaleParams::test_box_volume() const { return std::pow(short_side, d - 1) * long_side; }

void ScaleParams::require_fits(const Window& w) const {
  if (w.dim() != d) throw PreconditionError("window dimension does not match scale parameters");
  if (test_box_circumradius() > w.half()) {
    std::ostringstream msg;
    msg << "window L=" << w.side() << " too small for scale k=" << k << ": test-box circumradius "
        << test_box_circumradius() << " exceeds L/2";
    throw WindowTooSmall(msg.str());
  }
}

double visibility_bound(int d, double eps, const ErrorTerm& e) { return std::pow(eps, -(d - 1)) * e(1.0 / eps); }

ScaleParams scale_params(int d, int k, const ErrorTerm& e) {
  return scale_params_with_theta_scale(d, k, e, 1.0);
}

ScaleParams scale_params_with_theta_scale(int d, int k, const ErrorTerm& e, double factor) {
  if (d < 2 || d > kMaxDim) throw PreconditionError("dimension must be in [2, " + std::to_string(kMaxDim) + "]");
  if (k < 2) throw PreconditionError("scale index k must be >= 2");
  if (k > 60) throw PreconditionError("scale index k must be <= 60");
  if (!(factor > 0)) throw PreconditionError("theta scale must be positive");
  e.check_admissible_at(k);

  const double root_d = std::sqrt(static_cast<double>(d));
  ScaleParams p;
  p.d = d;
  p.k = k;
  p.eps = std::ldexp(1.0, -k);
  p.theta = 2.0 * std::pow(p.eps, d + 1) * factor;
  p.grid_spacing = p.eps / (4.0 * root_d);
  p.short_side = p.grid_spacing;
  p.error_value = e(1.0 / p.eps);
  p.long_side = std::pow(p.eps, -(d - 1)) * p.error_value / (4.0 * root_d);
  p.grid_points_per_side = to_count(std::ceil(4.0 * root_d / p.eps));
  p.rotations_per_axis = to_count(std::floor(std::numbers::pi / p.theta) + 1.0);
  p.nominal_cardinality =
      std::pow(4.0 * root_d / p.eps, d) * std::pow(std::numbers::pi / (2.0 * std::pow(p.eps, d + 1)), d - 1);
  return p;
}

std::uint64_t count_test_boxes(const ScaleParams& params) {
  if (params.grid_points_per_side == kUnrepresentable || params.rotations_per_axis == kUnrepresentable) {
    throw std::overflow_error("test box count overflows 64 bits");
  }
  std::uint64_t count = 1;
  for (int j = 0; j < params.d; ++j) count = checked_mul(count, params.grid_points_per_side);
  for (int j = 1; j < params.d; ++j) count = checked_mul(count, params.rotations_per_axis);
  return count;
}

OrientedBox make_test_box(const TestBoxId& id, const ScaleParams& params, const Window& w) {
  const int d = params.d;
  Point center(d);
  for (int j = 0; j < d; ++j) {
    const double offset = std::min(static_cast<double>(id.grid[j]) * params.grid_spacing, 1.0);
    center[j] = w.wrap(static_cast<double>(id.cube[j]) + offset);
  }
  Vec half = Vec::Constant(d, params.short_side / 2);
  half[0] = params.long_side / 2;
  const std::span<const std::int64_t> rot(id.rot.data(), static_cast<std::size_t>(d - 1));
  return OrientedBox(OrientedBox::Unchecked{}, center, half, frame_from_rotation_indices(d, rot, params.theta));
}

TestBoxCursor::TestBoxCursor(std::span<const std::int64_t> cube, const ScaleParams& params, const Window& w)
    : params_(params),
      window_(w),
      box_(OrientedBox::Unchecked{}, Vec::Zero(params.d), Vec::Ones(params.d), Mat::Identity(params.d, params.d)) {
  const int d = params.d;
  params.require_fits(w);
  if (static_cast<int>(cube.size()) != d) throw PreconditionError("cube coordinates have wrong dimension");
  (void)count_test_boxes(params);
  id_.d = d;
  for (int j = 0; j < d; ++j) {
    if (cube[j] < 0 || cube[j] >= w.cubes_per_side()) throw PreconditionError("cube lies outside the window");
    id_.cube[j] = cube[j];
  }
  const auto rotations = static_cast<std::size_t>(params.rotations_per_axis);
  cos_.resize(rotations);
  sin_.resize(rotations);
  for (std::size_t r = 0; r < rotations; ++r) {
    const double angle = static_cast<double>(r) * params.theta;
    cos_[r] = std::cos(angle);
    sin_[r] = std::sin(angle);
  }
  box_.half_[0] = params.long_side / 2;
  for (int j = 1; j < d; ++j) box_.half_[j] = params.short_side / 2;
}

void TestBoxCursor::update_center() {
  for (int j = 0; j < params_.d; ++j) {
    const double offset = std::min(static_cast<double>(id_.grid[j]) * params_.grid_spacing, 1.0);
    box_.center_[j] = window_.wrap(static_cast<double>(id_.cube[j]) + offset);
  }
}

void TestBoxCursor::update_frame() {
  const int d = params_.d;
  Mat& f = box_.frame_;
  if (d == 2) {
    const auto r = static_cast<std::size_t>(id_.rot[0]);
    f(0, 0) = cos_[r];
    f(1, 0) = sin_[r];
    f(0, 1) = -sin_[r];
    f(1, 1) = cos_[r];
    return;
  }
  f.setIdentity(d, d);
  for (int j = 1; j < d; ++j) {
    const auto r = static_cast<std::size_t>(id_.rot[j - 1]);
    rotate_in_plane(f, j, cos_[r], sin_[r]);
  }
}

bool TestBoxCursor::next() {
  if (done_) return false;
  const int d = params_.d;
  if (!started_) {
    started_ = true;
    update_center();
    update_frame();
    return true;
  }
  const auto rotations = static_cast<std::int64_t>(params_.rotations_per_axis);
  for (int j = d - 2; j >= 0; --j) {
    if (++id_.rot[j] < rotations) {
      update_frame();
      return true;
    }
    id_.rot[j] = 0;
  }
  const auto grid = static_cast<std::int64_t>(params_.grid_points_per_side);
  for (int j = d - 1; j >= 0; --j) {
    if (++id_.grid[j] < grid) {
      update_center();
      update_frame();
      return true;
    }
    id_.grid[j] = 0;
  }
  done_ = true;
  return false;
}

OrientedBox make_large_box(const Point& center, const Mat& frame, const ScaleParams& params) {
  Vec half = Vec::Constant(params.d, params.eps);
  half[0] = params.visibility_bound() / 2;
  return OrientedBox(center, half, frame);
}

std::optional<ContainedTestBox> find_contained_test_box(const OrientedBox& large, const ScaleParams& params,
                                                        const Window& w) {
  const int d = params.d;
  if (large.dim() != d || w.dim() != d) throw PreconditionError("large box dimension does not match parameters");
  const Vec& he = large.half_extents();
  const double half_long = params.visibility_bound() / 2;
  if (std::abs(he[0] - half_long) > 1e-9 * half_long) {
    throw PreconditionError("large box long half-extent must be V(eps)/2");
  }
  for (int j = 1; j < d; ++j) {
    if (std::abs(he[j] - params.eps) > 1e-9 * params.eps) {
      throw PreconditionError("large box short half-extents must equal eps");
    }
  }
  if (!w.contains(large.center())) throw PreconditionError("large box center outside the window");
  params.require_fits(w);

  TestBoxId id;
  id.d = d;
  Vec local(d);
  for (int j = 0; j < d; ++j) {
    id.cube[j] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(large.center()[j])), 0,
                                          w.cubes_per_side() - 1);
    local[j] = large.center()[j] - static_cast<double>(id.cube[j]);
  }

  // Grid points of the cube within eps/2 of the center, nearest first.
  const double radius = params.eps / 2;
  const auto grid_max = static_cast<std::int64_t>(params.grid_points_per_side) - 1;
  std::array<std::int64_t, kMaxDim> lo{}, hi{};
  for (int j = 0; j < d; ++j) {
    lo[j] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((local[j] - radius) / params.grid_spacing)));
    hi[j] = std::min<std::int64_t>(grid_max,
                                   static_cast<std::int64_t>(std::floor((local[j] + radius) / params.grid_spacing)));
    if (lo[j] > hi[j]) return std::nullopt;
  }
  struct GridCandidate {
    double dist2;
    std::array<std::int64_t, kMaxDim> g;
  };
  std::vector<GridCandidate> grid_candidates;
  std::array<std::int64_t, kMaxDim> g = lo;
  for (;;) {
    double dist2 = 0;
    for (int j = 0; j < d; ++j) {
      const double diff = std::min(static_cast<double>(g[j]) * params.grid_spacing, 1.0) - local[j];
      dist2 += diff * diff;
    }
    if (dist2 <= radius * radius) grid_candidates.push_back({dist2, g});
    int j = d - 1;
    while (j >= 0 && g[j] == hi[j]) {
      g[j] = lo[j];
      --j;
    }
    if (j < 0) break;
    ++g[j];
  }
  std::stable_sort(grid_candidates.begin(), grid_candidates.end(),
                   [](const GridCandidate& a, const GridCandidate& b) { return a.dist2 < b.dist2; });

  // Rotation indices within one step of each orientation angle.
  const Vec angles = rotation_angles_for_axis<double>(large.frame().col(0));
  const auto rot_max = static_cast<std::int64_t>(params.rotations_per_axis) - 1;
  std::vector<std::vector<std::int64_t>> per_axis(static_cast<std::size_t>(d - 1));
  for (int a = 0; a < d - 1; ++a) {
    const auto base = static_cast<std::int64_t>(std::floor(angles[a] / params.theta));
    auto& c = per_axis[static_cast<std::size_t>(a)];
    for (std::int64_t r = base - 1; r <= base + 2; ++r) {
      if (r >= 0 && r <= rot_max) c.push_back(r);
    }
    std::stable_sort(c.begin(), c.end(), [&](std::int64_t x, std::int64_t y) {
      return std::abs(static_cast<double>(x) * params.theta - angles[a]) <
             std::abs(static_cast<double>(y) * params.theta - angles[a]);
    });
    if (c.empty()) return std::nullopt;
  }
  std::vector<std::array<std::int64_t, kMaxDim - 1>> rot_candidates;
  std::array<std::size_t, kMaxDim - 1> pick{};
  for (;;) {
    std::array<std::int64_t, kMaxDim - 1> rot{};
    for (int a = 0; a < d - 1; ++a) rot[a] = per_axis[a][pick[a]];
    rot_candidates.push_back(rot);
    int a = d - 2;
    while (a >= 0 && pick[a] + 1 == per_axis[a].size()) {
      pick[a] = 0;
      --a;
    }
    if (a < 0) break;
    ++pick[a];
  }

  for (const auto& gc : grid_candidates) {
    id.grid = gc.g;
    for (const auto& rot : rot_candidates) {
      id.rot = rot;
      OrientedBox box = make_test_box(id, params, w);
      if (box_contains_box(large, box, w)) return ContainedTestBox{id, std::move(box)};
    }
  }
  return std::nullopt;
}

AngleMargin angle_margin_check(const ScaleParams& params) {
  const double phi_lower = 2.0 * std::pow(params.eps, params.d) / params.error_value;
  return {phi_lower, phi_lower >= params.theta};
}

LemmaVerification verify_lemma(int d, int k, const ErrorTerm& e, std::uint64_t samples, const Seed& seed,
                               double theta_scale) {
  const ScaleParams params = scale_params_with_theta_scale(d, k, e, theta_scale);
  const Window w(d, std::max(2.0, std::ceil(2 * params.test_box_circumradius())));
  LemmaVerification out;
  out.d = d;
  out.k = k;
  out.theta = params.theta;
  out.window_side = w.side();
  out.samples = samples;
  out.margin = angle_margin_check(params);
  for (std::uint64_t i = 0; i < samples; ++i) {
    Rng rng(seed, i);
    Point center(d);
    for (int j = 0; j < d; ++j) center[j] = rng.uniform();
    const OrientedBox large = make_large_box(center, uniform_rotation(d, rng), params);
    if (!find_contained_test_box(large, params, w)) ++out.failures;
  }
  return out;
}

}  // namespace dforest
