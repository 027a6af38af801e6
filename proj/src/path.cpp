#include "mrwlab/path.hpp"

#include "mrwlab/error.hpp"

namespace mrw {

std::string to_string(PathKind k) {
  switch (k) {
    case PathKind::fbm: return "fbm";
    case PathKind::field: return "field";
    case PathKind::cascade: return "cascade";
    case PathKind::mrw: return "mrw";
  }
  return "?";
}

std::string to_string(SynthesisMode m) {
  return m == SynthesisMode::disjoint ? "disjoint" : "dependent";
}

PathKind path_kind_from_string(const std::string& s) {
  if (s == "fbm") return PathKind::fbm;
  if (s == "field") return PathKind::field;
  if (s == "cascade") return PathKind::cascade;
  if (s == "mrw") return PathKind::mrw;
  throw ConfigError("unknown path kind '" + s + "'");
}

SynthesisMode synthesis_mode_from_string(const std::string& s) {
  if (s == "disjoint") return SynthesisMode::disjoint;
  if (s == "dependent") return SynthesisMode::dependent;
  throw ConfigError("unknown mode '" + s + "' (expected disjoint or dependent)");
}

}  // namespace mrw
