#pragma once

#include "dforest/forest.hpp"
#include "dforest/visibility.hpp"

#include <string>

namespace dforest {

/// Build report as pretty-printed JSON with a fixed key order. Wall times are
/// left out unless requested so that reruns are byte-identical.
std::string build_report_json(const BuildConfig& cfg, const BuildReport& report, bool include_timings = false);

/// Single-line JSON; infinities are written as null.
std::string survey_report_json(const SurveyReport& r);

/// Column order: eps,n,max_t,p50,p90,p99,violations,V_eps
std::string survey_csv_header();
std::string survey_csv_row(const SurveyReport& r);

std::string lemma_report_json(const LemmaVerification& v);

}  // namespace dforest
