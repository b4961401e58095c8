#pragma once

#include "dforest/forest.hpp"

#include <optional>
#include <string>

namespace dforest {

struct SightLine {
  Point origin;
  double angle;   // radians from the x axis
  double eps;     // tube radius drawn around the segment
  double length;
};

/// SVG 1.1 picture of a planar forest: one circle per point coloured by
/// provenance, a legend with per-provenance counts, and optionally one sight
/// segment with its eps-tube. Throws PreconditionError for d != 2.
std::string forest_svg(const Forest& f, const std::optional<SightLine>& sight = std::nullopt);

}  // namespace dforest
