#pragma once

#include "dforest/forest.hpp"

#include <iosfwd>
#include <string>

namespace dforest {

/// Text forest format, version 1. Reals are written as C hex floats so the
/// file round-trips bit-exactly:
///
///   dense-forest 1
///   d <int>
///   L <hex>
///   lambda <hex>
///   seed <value> <stream>
///   k_min <int>
///   k_max <int>
///   error_term <log | table:k=v,...>
///   point_cap <int>
///   points <N>
///   <x_1 hex> ... <x_d hex> <provenance>     (N lines; provenance 0 = Poisson, k = added at scale k)
void write_forest(std::ostream& out, const Forest& f);
Forest read_forest(std::istream& in);

void save_forest(const std::string& path, const Forest& f);
Forest load_forest(const std::string& path);

/// printf("%a") formatting.
std::string hex_real(double v);
/// strtod on the whole string; accepts decimal, hex float, and p/q rationals.
double parse_real(const std::string& text);

}  // namespace dforest
