// dforest: build dense forests, verify the covering construction, survey
// visibility and export figures.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error.

#include "dforest/forest.hpp"
#include "dforest/forest_io.hpp"
#include "dforest/report.hpp"
#include "dforest/run_config.hpp"
#include "dforest/svg.hpp"
#include "dforest/visibility.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace {

using namespace dforest;

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitConfig = 2;

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct BuildArgs {
  std::string config_file;
  std::map<std::string, std::string> overrides;
  bool timings = false;
};

int run_build(const BuildArgs& args) {
  RunConfig rc;
  if (!args.config_file.empty()) rc.load_file(args.config_file);
  for (const auto& [key, value] : args.overrides) rc.set(key, value);
  BuildConfig cfg = rc.to_build_config();

  const auto conv = convergence_check(cfg.window.dim(), cfg.lambda);
  if (!conv.converges) {
    std::cerr << "warning: lambda=" << cfg.lambda << " is not above the convergence threshold " << conv.threshold
              << "; expected additions grow with k\n";
  }

  const std::filesystem::path out_dir(rc.out);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "config.txt", rc.to_text());

  const auto [forest, report] = build(cfg);
  save_forest((out_dir / "forest.txt").string(), forest);
  write_file(out_dir / "build_report.json", build_report_json(cfg, report));

  std::cout << "poisson points: " << report.poisson_count << "\n";
  for (const auto& s : report.scales) {
    std::cout << "k=" << s.k << " added=" << s.added << " N_k*L^d=" << s.expected_window;
    if (s.poisson_empty) std::cout << " poisson_empty=" << *s.poisson_empty;
    std::cout << "\n";
    if (args.timings) std::cerr << "k=" << s.k << " wall_seconds=" << s.wall_seconds << "\n";
  }
  std::cout << "total points: " << report.total_points << "\nwrote " << out_dir.string() << "\n";
  return kExitOk;
}

int run_verify_lemma(int d, int k, std::uint64_t samples, Seed seed, double theta_scale, const std::string& e) {
  if (d != 2 && d != 3) throw PreconditionError("verify-lemma supports d = 2 or 3");
  const auto result = verify_lemma(d, k, ErrorTerm::parse(e), samples, seed, theta_scale);
  std::cout << lemma_report_json(result) << "\n";
  return result.failures == 0 && result.margin.ok ? kExitOk : kExitVerification;
}

int run_verify_build(const std::string& path, unsigned threads) {
  const Forest forest = load_forest(path);
  const auto& cfg = forest.config();
  nlohmann::ordered_json j;
  j["file"] = path;
  nlohmann::ordered_json scales = nlohmann::ordered_json::array();
  bool all = true;
  for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
    const bool ok = certify(forest, k, threads);
    all = all && ok;
    scales.push_back({{"k", k}, {"certified", ok}});
  }
  j["scales"] = scales;
  j["certified"] = all;
  std::cout << j.dump() << "\n";
  return all ? kExitOk : kExitVerification;
}

int run_survey(const std::string& path, const std::string& eps_text, std::uint64_t n, Seed seed, unsigned threads,
               const std::string& json_out, const std::string& csv_out) {
  const Forest forest = load_forest(path);
  const double eps = parse_real(eps_text);
  const SurveyReport r = survey(forest, eps, n, seed, threads);
  const std::string line = survey_report_json(r);
  std::cout << line << "\n" << survey_csv_row(r) << "\n";
  if (!json_out.empty()) write_file(json_out, line + "\n");
  if (!csv_out.empty()) write_file(csv_out, survey_csv_header() + "\n" + survey_csv_row(r) + "\n");
  return kExitOk;
}

int run_export_svg(const std::string& path, const std::string& out, const std::string& eps_text,
                   const std::string& sight_text) {
  const Forest forest = load_forest(path);
  if (forest.window().dim() != 2) throw PreconditionError("export-svg supports d = 2 only");
  std::optional<SightLine> sight;
  if (!sight_text.empty()) {
    std::vector<double> vals;
    std::stringstream ss(sight_text);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(parse_real(tok));
    if (vals.size() != 3) throw PreconditionError("--sight expects x,y,angle");
    const auto& cfg = forest.config();
    const double eps = eps_text.empty() ? std::ldexp(1.0, -cfg.finest_scale()) : parse_real(eps_text);
    const double V = visibility_bound(2, eps, cfg.error_term);
    Point origin(2);
    origin << vals[0], vals[1];
    sight = SightLine{forest.window().wrap(origin), vals[2], eps, std::min(V, forest.window().side())};
  }
  const std::string svg = forest_svg(forest, sight);
  if (out.empty()) {
    std::cout << svg;
  } else {
    write_file(out, svg);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dense forest construction and verification"};
  app.require_subcommand(1);

  BuildArgs build_args;
  auto* build_cmd = app.add_subcommand("build", "Build a forest and write forest.txt, build_report.json, config.txt");
  build_cmd->add_option("--config", build_args.config_file, "key=value config file (flags override it)");
  static const char* const kKeys[] = {"d",    "L",      "lambda", "k_min",     "k_max",   "error_term",
                                      "seed", "stream", "out",    "point_cap", "threads"};
  std::map<std::string, std::string> raw;
  for (const char* key : kKeys) {
    std::string flag = std::string("--") + key;
    for (auto& c : flag) c = c == '_' ? '-' : c;
    build_cmd->add_option(flag, raw[key], std::string("override config key ") + key);
  }
  build_cmd->add_flag("--timings", build_args.timings, "print per-scale wall times to stderr");

  int lemma_d = 2, lemma_k = 2;
  std::uint64_t lemma_samples = 10000, lemma_seed = 1, lemma_stream = 0;
  double theta_scale = 1.0;
  std::string lemma_e = "log";
  auto* lemma_cmd = app.add_subcommand("verify-lemma", "Monte Carlo check that large boxes contain test boxes");
  lemma_cmd->add_option("--d", lemma_d, "dimension (2 or 3)");
  lemma_cmd->add_option("--k", lemma_k, "scale index");
  lemma_cmd->add_option("--samples", lemma_samples, "number of random large boxes");
  lemma_cmd->add_option("--seed", lemma_seed, "seed value")->required();
  lemma_cmd->add_option("--stream", lemma_stream, "seed stream");
  lemma_cmd->add_option("--theta-scale", theta_scale, "debug: multiply the rotation step");
  lemma_cmd->add_option("--error-term", lemma_e, "log or table:k=v,...");

  std::string verify_file;
  unsigned verify_threads = 1;
  auto* verify_cmd = app.add_subcommand("verify-build", "Re-scan every built scale for empty test boxes");
  verify_cmd->add_option("forest", verify_file, "forest file")->required();
  verify_cmd->add_option("--threads", verify_threads, "worker threads");

  std::string survey_file, survey_eps, survey_json, survey_csv;
  std::uint64_t survey_n = 10000, survey_seed = 1, survey_stream = 0;
  unsigned survey_threads = 1;
  auto* survey_cmd = app.add_subcommand("survey", "Monte Carlo visibility survey");
  survey_cmd->add_option("forest", survey_file, "forest file")->required();
  survey_cmd->add_option("--eps", survey_eps, "scale (decimal or p/q)")->required();
  survey_cmd->add_option("--n", survey_n, "number of random queries");
  survey_cmd->add_option("--seed", survey_seed, "seed value")->required();
  survey_cmd->add_option("--stream", survey_stream, "seed stream");
  survey_cmd->add_option("--threads", survey_threads, "worker threads");
  survey_cmd->add_option("--json", survey_json, "write the JSON report here");
  survey_cmd->add_option("--csv", survey_csv, "write CSV header and row here");

  std::string svg_file, svg_out, svg_eps, svg_sight;
  auto* svg_cmd = app.add_subcommand("export-svg", "Draw a planar forest as SVG");
  svg_cmd->add_option("forest", svg_file, "forest file")->required();
  svg_cmd->add_option("--out", svg_out, "output path (default stdout)");
  svg_cmd->add_option("--eps", svg_eps, "tube radius for --sight");
  svg_cmd->add_option("--sight", svg_sight, "draw a sight segment: x,y,angle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*build_cmd) {
      for (const char* key : kKeys) {
        std::string flag = std::string("--") + key;
        for (auto& c : flag) c = c == '_' ? '-' : c;
        if (build_cmd->count(flag) > 0) build_args.overrides[key] = raw[key];
      }
      return run_build(build_args);
    }
    if (*lemma_cmd) {
      return run_verify_lemma(lemma_d, lemma_k, lemma_samples, Seed{lemma_seed, lemma_stream}, theta_scale, lemma_e);
    }
    if (*verify_cmd) return run_verify_build(verify_file, verify_threads);
    if (*survey_cmd) {
      return run_survey(survey_file, survey_eps, survey_n, Seed{survey_seed, survey_stream}, survey_threads,
                        survey_json, survey_csv);
    }
    if (*svg_cmd) return run_export_svg(svg_file, svg_out, svg_eps, svg_sight);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
