#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mrwlab/cascade.hpp"
#include "mrwlab/fbm.hpp"
#include "mrwlab/path.hpp"
#include "mrwlab/rng.hpp"

namespace mrw::walk {

using cascade::CascadeParams;
using cascade::GridSpec;

/// How the deterministic correction enters Z.  `minus` is the divergence
/// integration-by-parts rule delta(F u) = F delta(u) - <DF, u>, which keeps E Z = 0;
/// `plus` reproduces the opposite sign convention for comparison.
enum class CorrectionSign { minus, plus, none };

std::string to_string(CorrectionSign s);
CorrectionSign correction_sign_from_string(const std::string& s);

/// Deterministic coefficients a_i = <D w(t_i), kernel transfer of 1_[t_i, t_{i+1})>.
struct CorrectionTable {
  std::vector<double> a;
  double rel_tol = 1e-6;
  CascadeParams params;
  GridSpec grid;
};

/// a_i = int_0^{t_{i+1}} kappa_i(s) mu_i(s) ds with
///   kappa_i(s) = K(t_{i+1}, s) - K(t_i, s)
///   mu_i(s)    = c (1 / max(r, a_low, 2|s - t_i|) - 1)^+ 1{|s - t_i| <= 1/2}.
/// All zero when a_low >= 1.  OpenMP-parallel over i.
CorrectionTable correction_coeffs(const GridSpec& grid, const CascadeParams& p, double rel_tol = 1e-6);
/// Single coefficient, exposed for refinement tests.
double correction_coeff(std::size_t i, const GridSpec& grid, const CascadeParams& p, double rel_tol = 1e-6);

namespace serial {
CorrectionTable correction_coeffs(const GridSpec& grid, const CascadeParams& p, double rel_tol = 1e-6);
}

struct SynthesisOptions {
  CorrectionSign sign = CorrectionSign::minus;
  /// Field cells per path step (dependent route); 0 = automatic.
  std::size_t refine = 0;
};

/// Everything one draw produces, for diagnostics and tests.
struct SynthesisParts {
  Path q;                  // Q(t_0..t_n)
  std::vector<double> dB;  // fBm increments
  Path z;                  // Z(t_0..t_n)
};

/// Reusable MRW generator: spectra, kernels, field grid and correction table are
/// built once; sample() is then cheap and thread-safe.
///
/// disjoint:  Q from a spectral field, B^H from spectral fGn on an independent
///            stream, Z(t_k) = sum_{i<k} Q(t_i) dB_i.
/// dependent: one FieldGrid supplies the cone masses and the strip increments
///            dW1; B^H is the Volterra transform of dW1; the correction term
///            -/+ a_i Q(t_i) is added per step.
class Synthesizer {
 public:
  Synthesizer(const CascadeParams& p, const GridSpec& grid, SynthesisMode mode, SynthesisOptions opt = {});
  ~Synthesizer();
  Synthesizer(Synthesizer&&) noexcept;

  const CascadeParams& params() const noexcept { return params_; }
  const GridSpec& grid() const noexcept { return grid_; }
  SynthesisMode mode() const noexcept { return mode_; }
  const CorrectionTable& corrections() const noexcept { return table_; }

  Path sample(const core::SeedSpec& seed) const;
  SynthesisParts sample_parts(const core::SeedSpec& seed) const;

 private:
  struct Engines;
  CascadeParams params_;
  GridSpec grid_;
  SynthesisMode mode_;
  SynthesisOptions opt_;
  CorrectionTable table_;
  std::unique_ptr<Engines> eng_;
};

Path synthesize(const CascadeParams& p, std::size_t n, double T, SynthesisMode mode, const core::SeedSpec& seed,
                SynthesisOptions opt = {});

/// E (Z(t + h) - Z(t))^2 in the continuum disjoint model:
/// 2 int_0^h (h - u) H(2H-1) u^(2H-2) exp(m_r(u)) du.
double disjoint_second_moment(double h, const CascadeParams& p);
/// The same moment for the discrete disjoint scheme over k grid steps of size dt
/// (exact: sum over lags of fGn covariance times cascade covariance).
double disjoint_second_moment_discrete(std::size_t k, double dt, const CascadeParams& p);

/// Coupled cutoff ladder: Z_{r_j}(t) for all cutoffs from one FieldGrid.
struct ConvergenceReport {
  std::vector<double> ladder;    // r_1 >= r_2 >= ... (repeats give identically zero gaps)
  std::vector<double> msd;       // E|Z_{r_j}(t) - Z_{r_{j+1}}(t)|^2
  std::vector<double> msd_se;
  std::vector<double> drop;      // msd_j - msd_{j+1}
  std::vector<double> drop_se;   // paired standard error of each drop
  double total_drop = 0.0;       // msd_first - msd_last
  double total_drop_se = 0.0;
  bool cauchy = false;           // every drop exceeds 5 se: strictly decreasing at 5 se resolution
  bool trend = false;            // weaker: every drop positive and the total drop > 5 se
};

struct ConvergenceOptions {
  std::size_t n = 256;
  double T = 1.0;
  double t = 1.0;
  std::size_t replications = 2000;
  std::size_t refine = 0;
  std::uint64_t seed = 0;
  CorrectionSign sign = CorrectionSign::minus;
};

ConvergenceReport convergence_check(const CascadeParams& p, std::vector<double> ladder,
                                    const ConvergenceOptions& opt);

/// Second-moment scaling ladder and fitted exponent.
struct ScalingReport {
  std::vector<double> h;
  std::vector<double> moment;
  std::vector<double> moment_se;
  double exponent = 0.0;
  double exponent_se = 0.0;    // jackknife over replications
  double model_exponent = 0.0; // same fit applied to the exact discrete-scheme moments (disjoint)
  double target = 0.0;         // 2H + c phi(2)
  bool exact_scaling = true;   // false in dependent mode
};

struct ScalingOptions {
  std::size_t n = 1 << 14;
  double T = 1.0;
  double p = 2.0;
  std::vector<double> h;  // lags in time units, each a multiple of dt
  std::size_t replications = 200;
  std::uint64_t seed = 0;
  SynthesisOptions synthesis{};
};

ScalingReport scaling_exponent(const CascadeParams& p, SynthesisMode mode, const ScalingOptions& opt);

/// Martingale check for nested cutoffs r < r': at each lag,
/// E Q_r(u) Q_{r'}(u + lag)  against  E Q_{r'}(u) Q_{r'}(u + lag)  and against
/// E Q_r(u) Q_r(u + lag), with standard errors of the paired differences.
struct MartingaleRow {
  double lag = 0.0;
  double fine_coarse = 0.0;    // E Q_r Q_r'
  double coarse_coarse = 0.0;  // E Q_r' Q_r'
  double fine_fine = 0.0;      // E Q_r Q_r
  double coarse_se = 0.0;      // se of coarse_coarse
  double diff_cc_se = 0.0;     // se of (fine_coarse - coarse_coarse)
  double diff_ff_se = 0.0;     // se of (fine_coarse - fine_fine)
  double exact = 0.0;          // exp(m_r'(lag))
};

struct MartingaleOptions {
  GridSpec grid{200, 2.0, 0};
  std::vector<std::size_t> lag_steps{0, 1, 3, 10, 40};
  std::size_t replications = 2000;
  std::uint64_t seed = 0;
};

std::vector<MartingaleRow> martingale_check(const CascadeParams& p, double r_prime, const MartingaleOptions& opt);

}  // namespace mrw::walk
