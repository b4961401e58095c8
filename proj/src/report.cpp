#include "dforest/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace dforest {

namespace {

using json = nlohmann::ordered_json;

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string build_report_json(const BuildConfig& cfg, const BuildReport& report, bool include_timings) {
  json j;
  j["format"] = "dense-forest-build-report";
  j["version"] = 1;
  j["d"] = cfg.window.dim();
  j["L"] = cfg.window.side();
  j["lambda"] = cfg.lambda;
  j["seed"] = {{"value", cfg.seed.value}, {"stream", cfg.seed.stream}};
  j["k_min"] = cfg.k_min;
  j["k_max"] = cfg.k_max;
  j["error_term"] = cfg.error_term.to_string();
  j["convergence"] = {{"threshold", report.convergence.threshold},
                      {"converges", report.convergence.converges},
                      {"exponent", report.convergence.exponent},
                      {"loose_exponent", report.convergence.loose_exponent}};
  j["poisson_count"] = report.poisson_count;
  j["total_points"] = report.total_points;
  json scales = json::array();
  for (const auto& s : report.scales) {
    json row;
    row["k"] = s.k;
    row["eps"] = s.eps;
    row["added"] = s.added;
    row["expected_per_cube"] = s.expected_per_cube;
    row["expected_window"] = s.expected_window;
    row["poisson_empty"] = s.poisson_empty ? json(*s.poisson_empty) : json(nullptr);
    row["nominal_cardinality"] = s.nominal_cardinality;
    row["integer_count_per_cube"] = s.integer_count_per_cube;
    row["integer_count_window"] = s.integer_count_window;
    if (include_timings) row["wall_seconds"] = s.wall_seconds;
    scales.push_back(row);
  }
  j["scales"] = scales;
  return j.dump(2) + "\n";
}

std::string survey_report_json(const SurveyReport& r) {
  json j;
  j["eps"] = r.eps;
  j["query_eps"] = r.query_eps;
  j["n"] = r.samples;
  j["t_max"] = r.t_max;
  j["capped"] = r.capped;
  j["max_t"] = real_or_null(r.max_t);
  j["p50"] = real_or_null(r.p50);
  j["p90"] = real_or_null(r.p90);
  j["p99"] = real_or_null(r.p99);
  j["violations"] = r.violations;
  j["V_eps"] = r.V_eps;
  return j.dump();
}

std::string survey_csv_header() { return "eps,n,max_t,p50,p90,p99,violations,V_eps"; }

std::string survey_csv_row(const SurveyReport& r) {
  return csv_real(r.eps) + "," + std::to_string(r.samples) + "," + csv_real(r.max_t) + "," + csv_real(r.p50) + "," +
         csv_real(r.p90) + "," + csv_real(r.p99) + "," + std::to_string(r.violations) + "," + csv_real(r.V_eps);
}

std::string lemma_report_json(const LemmaVerification& v) {
  json j;
  j["d"] = v.d;
  j["k"] = v.k;
  j["theta"] = v.theta;
  j["window_L"] = v.window_side;
  j["samples"] = v.samples;
  j["failures"] = v.failures;
  j["phi_lower"] = v.margin.phi_lower;
  j["margin_ok"] = v.margin.ok;
  return j.dump();
}

}  // namespace dforest
