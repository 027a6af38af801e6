#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mrwlab/rng.hpp"

namespace mrw {

enum class PathKind { fbm, field, cascade, mrw };
enum class SynthesisMode { disjoint, dependent };

std::string to_string(PathKind k);
std::string to_string(SynthesisMode m);
PathKind path_kind_from_string(const std::string& s);
SynthesisMode synthesis_mode_from_string(const std::string& s);

struct PathMeta {
  PathKind kind = PathKind::fbm;
  double H = std::numeric_limits<double>::quiet_NaN();
  double r = std::numeric_limits<double>::quiet_NaN();
  double c = std::numeric_limits<double>::quiet_NaN();
  core::SeedSpec seed{};
  std::optional<SynthesisMode> mode{};
  /// Field paths: Var w(t), the exact variance of the generator that produced them.
  double field_variance = std::numeric_limits<double>::quiet_NaN();
};

/// Sample path on the uniform grid t_i = i * dt, i = 0..steps().
struct Path {
  double dt = 1.0;
  std::vector<double> values;
  PathMeta meta;

  std::size_t steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
  double time(std::size_t i) const noexcept { return static_cast<double>(i) * dt; }
  double horizon() const noexcept { return time(steps()); }
};

}  // namespace mrw
