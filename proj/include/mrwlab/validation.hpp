#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mrw::validation {

/// Outcome of one quantitative check: pass iff the statistic is on the right
/// side of the threshold (the detail string says which side and why).
struct Verdict {
  std::string name;
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct CheckOptions {
  std::uint64_t seed = 0;
};

/// kernel-identity, overlap-measure, cascade-law, martingale, scaling,
/// convergence, mode-consistency, estimators.
const std::vector<std::string>& check_names();

/// Throws ConfigError for an unknown name.
Verdict run_check(const std::string& name, const CheckOptions& opt = {});

Verdict kernel_identity(const CheckOptions& opt);
Verdict overlap_measure(const CheckOptions& opt);
Verdict cascade_law(const CheckOptions& opt);
Verdict martingale(const CheckOptions& opt);
Verdict scaling(const CheckOptions& opt);
Verdict convergence(const CheckOptions& opt);
Verdict mode_consistency(const CheckOptions& opt);
Verdict estimators(const CheckOptions& opt);

}  // namespace mrw::validation
