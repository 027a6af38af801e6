#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mrwlab/cascade.hpp"
#include "mrwlab/mrw.hpp"
#include "mrwlab/path.hpp"
#include "mrwlab/stats.hpp"

namespace mrw::config {

/// Everything a CLI run depends on.  Semantic fields feed the hash; out_dir and
/// threads only say where and how fast, so they are excluded.
struct RunConfig {
  // model
  double H = 0.62;
  double c = 0.1;
  double r = 1.0 / 256.0;
  std::optional<double> a_low{};
  SynthesisMode mode = SynthesisMode::disjoint;
  std::size_t n = 4096;
  double T = 8.0;
  walk::CorrectionSign sign = walk::CorrectionSign::minus;
  std::size_t refine = 0;
  bool allow_condition_violation = false;
  // estimators
  std::size_t tau = 1;
  std::size_t kmax = 100;
  double fit_lo = 1.0;
  double fit_hi = 100.0;
  std::size_t resamples = 500;
  std::size_t block = 0;
  bool center = false;

  std::uint64_t seed = 0;

  std::string out_dir = ".";
  int threads = 0;

  cascade::CascadeParams cascade_params() const;
  cascade::GridSpec grid() const;
  walk::SynthesisOptions synthesis() const;
  stats::LeverageOptions leverage() const;
};

/// Check every field against the module preconditions before any work starts.
/// Throws ConfigError, DomainError, ConditionViolated or ResolutionTooCoarse.
void validate(const RunConfig& cfg);

/// Canonical JSON of the semantic fields (sorted keys, shortest round-trip numbers).
std::string canonical_json(const RunConfig& cfg);
/// FNV-1a 64 over canonical_json, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// Overlay the keys present in a JSON object; unknown keys are a ConfigError.
void apply_json(RunConfig& cfg, const std::string& json_text);
RunConfig load(const std::filesystem::path& path);

/// Named parameter sets.  "paper": H = 0.62, c = 0.1, r = 1/256, n = 2^17, T = 256.
void apply_preset(RunConfig& cfg, const std::string& name);

}  // namespace mrw::config
