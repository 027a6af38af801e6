#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "mrwlab/path.hpp"
#include "mrwlab/rng.hpp"
#include "mrwlab/spectral.hpp"

namespace mrw::cascade {

/// Model parameters of the Gaussian cascade and its driving strip.
struct CascadeParams {
  double c = 0.1;          // intensity
  double r = 1.0 / 256.0;  // small-scale cutoff
  double H = 0.62;         // Hurst exponent of the integrator
  /// Lower bound of the strip band (a_low, inf); defaults to c so the strip has unit mass.
  std::optional<double> a_low{};
  /// Skip the c < 2H - 1 check (negative controls).
  bool allow_condition_violation = false;

  double strip_low() const noexcept { return a_low.value_or(c); }
  bool is_disjoint() const noexcept { return strip_low() >= 1.0; }
  SynthesisMode mode() const noexcept {
    return is_disjoint() ? SynthesisMode::disjoint : SynthesisMode::dependent;
  }
  /// Mass of the strip levels shared with the cones, per unit time: c (1/a_low - 1)^+.
  double shared_strip_mass() const noexcept;
  /// Throws DomainError / ConditionViolated / ConfigError on invalid combinations.
  void validate() const;
};

/// phi(q) = -q(q-1)/2
double phi(double q) noexcept;

/// m_r(u): control-measure mass of the intersection of the cones at 0 and u.
double overlap_measure(double u, double r, double c) noexcept;

/// The same mass by two-dimensional quadrature over the cone intersection.
double overlap_measure_numeric(double u, double r, double c, double rel_tol = 1e-10);

/// E Q_r(t) Q_r(s) = exp(-phi(2) m_r(|t - s|)).
double cascade_cov(double t, double s, const CascadeParams& p) noexcept;

/// Uniform path grid t_i = i T / n, i = 0..n.
struct GridSpec {
  std::size_t n = 1024;
  double T = 1.0;
  /// Field cells per path step; 0 picks the smallest value giving at least
  /// sixteen cells across the narrowest cone.
  std::size_t refine = 0;

  double dt() const noexcept { return T / static_cast<double>(n); }
};

/// Discretized white noise W on the time-scale half-plane.  Time is cut into
/// cells of width delta = dt / refine covering [-1/2, T + 1/2]; scale is cut at
/// geometric levels (ratio <= 2^(1/4)) that include every requested cutoff and
/// the strip bound.  Each (time cell, scale level) carries an independent
/// N(0, delta c (1/rho_k - 1/rho_{k+1})) mass.  A cell belongs to the cone at t
/// for level k when its center lies within half the level's mass-weighted width.
///
/// One draw returns, for every cutoff, the cone masses w(t_i) and (if a strip
/// is configured) the strip increments dW1_i built from the very same cells,
/// topped up with independent noise up to variance dt.
class FieldGrid {
 public:
  struct Sample {
    std::vector<std::vector<double>> w;  // per cutoff, n + 1 values
    std::vector<double> strip;           // n increments, empty without strip
  };

  FieldGrid(const GridSpec& grid, double c, std::vector<double> cutoffs,
            std::optional<double> strip_low = std::nullopt);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t refine() const noexcept { return refine_; }
  std::size_t time_cells() const noexcept { return cells_; }
  std::size_t levels() const noexcept { return level_var_.size(); }
  const std::vector<double>& level_bounds() const noexcept { return bounds_; }
  const std::vector<double>& cutoffs() const noexcept { return cutoffs_; }
  bool has_strip() const noexcept { return strip_low_.has_value(); }

  /// Exact Var w(t_i) for a cutoff (identical for every i).
  double cone_variance(std::size_t cutoff) const;
  /// Exact Cov(w_a(t_i), w_b(t_{i+lag})) of the discretized cones.
  double cone_covariance(std::size_t cutoff_a, std::size_t cutoff_b, std::size_t lag_steps) const;
  /// Variance of the shared (cell) part of a strip increment.
  double strip_shared_variance() const noexcept { return strip_shared_var_; }

  /// OpenMP-parallel over cells and path points; bit-identical to sample_serial.
  Sample sample(const core::SeedSpec& seed) const;
  Sample sample_serial(const core::SeedSpec& seed) const;

 private:
  template <bool Parallel>
  Sample sample_impl(const core::SeedSpec& seed) const;

  GridSpec grid_;
  double c_;
  std::vector<double> cutoffs_;
  std::optional<double> strip_low_;
  std::size_t refine_ = 1;
  std::size_t pad_ = 0;    // cells before t = 0
  std::size_t cells_ = 0;  // total time cells
  double delta_ = 0.0;
  std::vector<double> bounds_;             // rho_0 < ... < rho_m = 1
  std::vector<double> level_var_;          // per level, per cell
  std::vector<std::size_t> level_half_;    // half window in cells
  std::vector<std::size_t> first_level_;   // per cutoff: first level inside the cone
  std::size_t strip_first_level_ = 0;
  double strip_shared_var_ = 0.0;
};

/// Cascade field w(t_i) = W(C_r(t_i)) on the grid (kind = field).
Path sample_field(const GridSpec& grid, const CascadeParams& p, const core::SeedSpec& seed);

/// Cascade field drawn as a stationary Gaussian sequence with autocovariance
/// m_r(k dt) by circulant embedding; no strip, used by the disjoint route.
Path sample_field_spectral(const GridSpec& grid, const CascadeParams& p, const core::SeedSpec& seed);

/// Reusable spectral field generator (circulant spectrum computed once).  The
/// embedding covers at least one unit of time so that the compactly supported
/// autocovariance embeds with a nonnegative spectrum.
class SpectralFieldSampler {
 public:
  SpectralFieldSampler(const GridSpec& grid, const CascadeParams& p);
  Path sample(const core::SeedSpec& seed) const;

 private:
  GridSpec grid_;
  CascadeParams params_;
  core::StationaryGaussianSampler sampler_;
};

/// Q_r(t_i) = exp(w(t_i) - Var w / 2).  The variance comes from the field's
/// generator when recorded, else m_r(0).
Path q_from_field(const Path& field, const CascadeParams& p);

/// Cascades at cutoffs r and r' > r from one FieldGrid (nested cones).
std::pair<Path, Path> sample_joint_scales(const GridSpec& grid, const CascadeParams& p, double r_prime,
                                          const core::SeedSpec& seed);

}  // namespace mrw::cascade
