#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrwlab/path.hpp"

namespace mrw::stats {

/// delta_tau X(t) for a log-price series X.
struct ReturnSeries {
  std::vector<double> values;
  std::size_t lag = 1;  // tau in grid steps
  std::string source;
  bool centered = false;
};

/// values[i] = ln p[i + tau] - ln p[i]; throws NonPositivePrice on p <= 0.
ReturnSeries log_returns(std::span<const double> prices, std::size_t tau = 1, bool center = false,
                         std::string source = {});
/// Returns of a simulated log-price path: values[i] = X[i + tau] - X[i].
ReturnSeries path_returns(const Path& log_price, std::size_t tau = 1, bool center = false);

enum class EstimatorKind { acf, abs_acf, sq_acf, leverage, hurst, powerlaw };
enum class Transform { identity, abs, square };

std::string to_string(EstimatorKind k);
std::string to_string(Transform t);
Transform transform_from_string(const std::string& s);

struct PowerLawFit {
  double alpha = 0.0;      // C(k) ~ exp(intercept) k^-alpha
  double intercept = 0.0;
  double mse = 0.0;        // mean squared residual in the original scale
  double k_lo = 0.0;
  double k_hi = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;  // non-positive estimates skipped inside the range
};

struct EstimatorReport {
  EstimatorKind kind = EstimatorKind::acf;
  std::vector<double> k;
  std::vector<double> estimate;
  std::vector<double> stderr_;
  std::vector<double> lo;  // confidence band
  std::vector<double> hi;
  std::size_t n = 0;       // sample size behind the estimates
  std::optional<PowerLawFit> fit;
};

/// Pearson correlation between y[0..n-k) and y[k..n) of the transformed series
/// for k = 1..kmax; band +-1.96/sqrt(n) under the white-noise null.
/// Throws ConfigError unless kmax < n/4, DegenerateVariance on a constant input.
EstimatorReport acf(const ReturnSeries& x, std::size_t kmax, Transform t = Transform::identity);

/// Least squares of ln C(k) on ln k over k_lo <= k <= k_hi, skipping C(k) <= 0.
/// Throws TooFewPoints with fewer than five usable lags.
PowerLawFit powerlaw_fit(const EstimatorReport& report, double k_lo, double k_hi);

struct LeverageOptions {
  std::size_t resamples = 500;
  std::size_t block = 0;  // 0 = round(sqrt(n))
  std::uint64_t seed = 0;
};

/// L(k) = <x(t) x(t+k)^2> / <x(t)^2>^2 for k = -kmax..kmax with moving-block
/// bootstrap standard errors; band is estimate +- 1.96 se.  Sums are taken
/// symmetrically so reversing the input maps L(k) to L(-k) bit for bit.
EstimatorReport leverage(const ReturnSeries& x, std::size_t kmax, const LeverageOptions& opt = {});

struct HurstEstimate {
  double H = 0.0;
  double se = 0.0;           // OLS slope standard error
  std::vector<double> window;
  std::vector<double> rs;    // mean rescaled range per window
};

/// Classical R/S: for each window size w, the mean over non-overlapping blocks
/// of range(cumulative deviations) / std; H is the log-log slope.  An empty
/// ladder means dyadic windows 64, 128, ..., <= n/4.  Throws TooShort below 512.
HurstEstimate hurst_rs(std::span<const double> x, std::vector<std::size_t> windows = {});

namespace serial {
EstimatorReport acf(const ReturnSeries& x, std::size_t kmax, Transform t = Transform::identity);
HurstEstimate hurst_rs(std::span<const double> x, std::vector<std::size_t> windows = {});
}  // namespace serial

}  // namespace mrw::stats
