#include "dforest/forest_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dforest {

namespace {

constexpr const char* kMagic = "dense-forest";
constexpr int kVersion = 1;

std::string expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw PreconditionError("forest file truncated before '" + key + "'");
  const auto space = line.find(' ');
  if (space == std::string::npos || line.substr(0, space) != key) {
    throw PreconditionError("forest file: expected '" + key + "', got '" + line + "'");
  }
  return line.substr(space + 1);
}

template <class Int>
Int parse_int(const std::string& text) {
  std::istringstream ss(text);
  Int v{};
  if (!(ss >> v) || !ss.eof()) throw PreconditionError("bad integer '" + text + "'");
  return v;
}

}  // namespace

std::string hex_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_real(const std::string& text) {
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const double num = parse_real(text.substr(0, slash));
    const double den = parse_real(text.substr(slash + 1));
    if (den == 0) throw PreconditionError("zero denominator in '" + text + "'");
    return num / den;
  }
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw PreconditionError("bad real '" + text + "'");
  return v;
}

void write_forest(std::ostream& out, const Forest& f) {
  const BuildConfig& c = f.config();
  const int d = c.window.dim();
  out << kMagic << ' ' << kVersion << '\n';
  out << "d " << d << '\n';
  out << "L " << hex_real(c.window.side()) << '\n';
  out << "lambda " << hex_real(c.lambda) << '\n';
  out << "seed " << c.seed.value << ' ' << c.seed.stream << '\n';
  out << "k_min " << c.k_min << '\n';
  out << "k_max " << c.k_max << '\n';
  out << "error_term " << c.error_term.to_string() << '\n';
  out << "point_cap " << c.point_cap << '\n';
  out << "points " << f.size() << '\n';
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point& p = f.points()[i];
    for (int j = 0; j < d; ++j) out << hex_real(p[j]) << ' ';
    out << f.provenance()[i].scale << '\n';
  }
}

Forest read_forest(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw PreconditionError("empty forest file");
  if (header != std::string(kMagic) + " " + std::to_string(kVersion)) {
    throw PreconditionError("unsupported forest file header '" + header + "'");
  }
  const int d = parse_int<int>(expect_line(in, "d"));
  const double side = parse_real(expect_line(in, "L"));
  BuildConfig cfg;
  cfg.window = Window(d, side);
  cfg.lambda = parse_real(expect_line(in, "lambda"));
  {
    std::istringstream ss(expect_line(in, "seed"));
    if (!(ss >> cfg.seed.value >> cfg.seed.stream)) throw PreconditionError("bad seed line");
  }
  cfg.k_min = parse_int<int>(expect_line(in, "k_min"));
  cfg.k_max = parse_int<int>(expect_line(in, "k_max"));
  cfg.error_term = ErrorTerm::parse(expect_line(in, "error_term"));
  cfg.point_cap = parse_int<std::uint64_t>(expect_line(in, "point_cap"));
  const auto count = parse_int<std::uint64_t>(expect_line(in, "points"));
  cfg.validate();

  std::vector<Point> points;
  std::vector<Provenance> prov;
  points.reserve(count);
  prov.reserve(count);
  std::string line;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw PreconditionError("forest file truncated in point list");
    std::istringstream ss(line);
    Point p(d);
    std::string tok;
    for (int j = 0; j < d; ++j) {
      if (!(ss >> tok)) throw PreconditionError("forest file: short point line");
      p[j] = parse_real(tok);
    }
    int scale = 0;
    if (!(ss >> scale) || (scale != 0 && (scale < cfg.k_min || scale > cfg.k_max))) {
      throw PreconditionError("forest file: bad provenance on line '" + line + "'");
    }
    if (!cfg.window.contains(p)) throw PreconditionError("forest file: point outside the window");
    points.push_back(p);
    prov.push_back(Provenance{scale});
  }
  return Forest(cfg, points, prov);
}

void save_forest(const std::string& path, const Forest& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_forest(out, f);
  if (!out) throw std::runtime_error("error writing " + path);
}

Forest load_forest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open forest file " + path);
  return read_forest(in);
}

}  // namespace dforest
