#include "dforest/svg.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace dforest {

namespace {

constexpr double kPlot = 640;
constexpr double kMargin = 40;
constexpr double kLegendRow = 18;

const char* const kAddedColours[] = {"#c62828", "#1565c0", "#ef6c00", "#6a1b9a", "#00838f", "#ad1457"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string colour_for(Provenance p) {
  if (p.is_poisson()) return "#2e7d32";
  return kAddedColours[static_cast<std::size_t>(p.scale) % std::size(kAddedColours)];
}

}  // namespace

std::string forest_svg(const Forest& f, const std::optional<SightLine>& sight) {
  const Window& w = f.window();
  if (w.dim() != 2) throw PreconditionError("SVG export supports d = 2 only");
  const double scale = kPlot / w.side();
  auto sx = [&](double x) { return kMargin + x * scale; };
  auto sy = [&](double y) { return kMargin + kPlot - y * scale; };

  std::map<int, std::uint64_t> counts;
  counts[0] = 0;
  for (int k = f.config().k_min; k <= f.config().k_max; ++k) counts[k] = 0;
  for (const auto& p : f.provenance()) ++counts[p.scale];

  const double height = 2 * kMargin + kPlot + kLegendRow * static_cast<double>(counts.size() + 1);
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(2 * kMargin + kPlot)
      << "\" height=\"" << num(height) << "\">\n";
  out << "<defs><clipPath id=\"window\"><rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\""
      << num(kPlot) << "\" height=\"" << num(kPlot) << "\"/></clipPath></defs>\n";

  // Axes: window frame with corner labels.
  out << "<g id=\"axes\" stroke=\"#000\" fill=\"none\">\n";
  out << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(kPlot) << "\" height=\""
      << num(kPlot) << "\"/>\n";
  out << "</g>\n";
  out << "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << num(sx(0)) << "\" y=\"" << num(sy(0) + 16) << "\">0</text>\n";
  out << "<text x=\"" << num(sx(w.side()) - 8) << "\" y=\"" << num(sy(0) + 16) << "\">" << w.side() << "</text>\n";
  out << "<text x=\"" << num(sx(0) - 24) << "\" y=\"" << num(sy(w.side()) + 4) << "\">" << w.side() << "</text>\n";
  out << "</g>\n";

  if (sight) {
    const double x0 = sight->origin[0], y0 = sight->origin[1];
    const double x1 = x0 + sight->length * std::cos(sight->angle);
    const double y1 = y0 + sight->length * std::sin(sight->angle);
    out << "<g id=\"sight\" clip-path=\"url(#window)\">\n";
    out << "<line x1=\"" << num(sx(x0)) << "\" y1=\"" << num(sy(y0)) << "\" x2=\"" << num(sx(x1)) << "\" y2=\""
        << num(sy(y1)) << "\" stroke=\"#fbc02d\" stroke-opacity=\"0.35\" stroke-linecap=\"round\" stroke-width=\""
        << num(2 * sight->eps * scale) << "\"/>\n";
    out << "<line x1=\"" << num(sx(x0)) << "\" y1=\"" << num(sy(y0)) << "\" x2=\"" << num(sx(x1)) << "\" y2=\""
        << num(sy(y1)) << "\" stroke=\"#000\" stroke-width=\"1\"/>\n";
    out << "</g>\n";
  }

  out << "<g id=\"points\">\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point& p = f.points()[i];
    out << "<circle cx=\"" << num(sx(p[0])) << "\" cy=\"" << num(sy(p[1])) << "\" r=\"1.5\" fill=\""
        << colour_for(f.provenance()[i]) << "\"/>\n";
  }
  out << "</g>\n";

  out << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  double y = 2 * kMargin + kPlot;
  for (const auto& [scale_k, count] : counts) {
    const Provenance prov{scale_k};
    const std::string label =
        prov.is_poisson() ? "poisson: " + std::to_string(count)
                          : "added k=" + std::to_string(scale_k) + ": " + std::to_string(count);
    out << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(y - 9) << "\" width=\"10\" height=\"10\" fill=\""
        << colour_for(prov) << "\"/>";
    out << "<text x=\"" << num(kMargin + 16) << "\" y=\"" << num(y) << "\">" << label << "</text>\n";
    y += kLegendRow;
  }
  out << "</g>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace dforest
