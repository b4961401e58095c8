#include "dforest/run_config.hpp"

#include "dforest/forest_io.hpp"

#include <fstream>
#include <istream>
#include <sstream>

namespace dforest {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  Int v{};
  if (!(ss >> v) || !ss.eof()) throw PreconditionError("config key '" + key + "': bad integer '" + value + "'");
  return v;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "d") {
    d = parse_integer<int>(key, value);
  } else if (key == "L") {
    (void)parse_real(value);
    L = value;
  } else if (key == "lambda") {
    (void)parse_real(value);
    lambda = value;
  } else if (key == "k_min") {
    k_min = parse_integer<int>(key, value);
  } else if (key == "k_max") {
    k_max = parse_integer<int>(key, value);
  } else if (key == "error_term") {
    error_term = value;
  } else if (key == "seed") {
    seed = parse_integer<std::uint64_t>(key, value);
  } else if (key == "stream") {
    stream = parse_integer<std::uint64_t>(key, value);
  } else if (key == "out") {
    out = value;
  } else if (key == "point_cap") {
    point_cap = parse_integer<std::uint64_t>(key, value);
  } else if (key == "samples") {
    samples = parse_integer<std::uint64_t>(key, value);
  } else if (key == "threads") {
    threads = parse_integer<unsigned>(key, value);
  } else {
    throw PreconditionError("unknown config key '" + key + "'");
  }
}

void RunConfig::load(std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw PreconditionError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config file " + path);
  load(in);
}

double RunConfig::lambda_value() const {
  if (lambda) return parse_real(*lambda);
  return convergence_check(d, 0).threshold + 1;
}

BuildConfig RunConfig::to_build_config() const {
  BuildConfig cfg;
  cfg.window = Window(d, parse_real(L));
  cfg.lambda = lambda_value();
  cfg.k_min = k_min;
  cfg.k_max = k_max;
  cfg.error_term = ErrorTerm::parse(error_term);
  cfg.seed = Seed{seed, stream};
  cfg.point_cap = point_cap;
  if (threads == 0) throw PreconditionError("threads must be >= 1");
  cfg.validate();
  return cfg;
}

std::string RunConfig::to_text() const {
  std::ostringstream ss;
  ss << "d=" << d << '\n';
  ss << "L=" << L << '\n';
  ss << "lambda=" << (lambda ? *lambda : hex_real(lambda_value())) << '\n';
  ss << "k_min=" << k_min << '\n';
  ss << "k_max=" << k_max << '\n';
  ss << "error_term=" << error_term << '\n';
  ss << "seed=" << seed << '\n';
  ss << "stream=" << stream << '\n';
  ss << "out=" << out << '\n';
  ss << "point_cap=" << point_cap << '\n';
  ss << "samples=" << samples << '\n';
  ss << "threads=" << threads << '\n';
  return ss.str();
}

}  // namespace dforest
