#pragma once

#include "dforest/forest.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace dforest {

/// Flat key=value run configuration. Lines starting with '#' are comments.
/// Reals accept decimal, hex-float, or p/q rational literals.
///
///   d=2
///   L=4
///   lambda=161          # default: convergence threshold + 1
///   k_min=2
///   k_max=3
///   error_term=log
///   seed=1
///   stream=0
///   out=run
///   point_cap=100000000
///   samples=10000
///   threads=1
struct RunConfig {
  int d = 2;
  std::string L = "4";
  std::optional<std::string> lambda;
  int k_min = 2;
  int k_max = 3;
  std::string error_term = "log";
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::string out = "run";
  std::uint64_t point_cap = kDefaultPointCap;
  std::uint64_t samples = 10000;
  unsigned threads = 1;

  /// Applies one key=value assignment; throws PreconditionError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void load(std::istream& in);
  void load_file(const std::string& path);

  double lambda_value() const;
  /// Builds and fully validates the corresponding build configuration.
  BuildConfig to_build_config() const;
  /// Canonical key=value text (one key per line, fixed order).
  std::string to_text() const;
};

}  // namespace dforest
