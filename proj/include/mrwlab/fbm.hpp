#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "mrwlab/path.hpp"
#include "mrwlab/rng.hpp"
#include "mrwlab/spectral.hpp"

namespace mrw::fbm {

/// Hurst exponent in (0, 1).  Kernel-level operations additionally need H > 1/2.
class Hurst {
 public:
  explicit Hurst(double h);
  double value() const noexcept { return h_; }
  operator double() const noexcept { return h_; }
  /// Throws DomainError unless H > 1/2.
  const Hurst& require_long_memory() const;

 private:
  double h_;
};

/// R^H(t, s) = (t^2H + s^2H - |t - s|^2H) / 2
double fbm_cov(double t, double s, double H);

/// c_H = sqrt(H(2H-1) / B(2-2H, H-1/2)), the Volterra kernel normalization.
double kernel_constant(double H);

/// H(2H-1): the constant in  int_0^{a^b} dK(a,u) dK(b,u) du = H(2H-1)|a-b|^(2H-2).
double identity_constant(double H);

/// Derivative of the Volterra kernel in its first argument,
/// c_H (s/a)^(1/2-H) (a-s)^(H-3/2) for 0 < s < a.
double kernel_dK(double a, double s, double H);
/// Same value with a - s passed separately, for quadrature near s = a where the
/// difference of the rounded arguments loses all precision.
double kernel_dK(double a, double s, double a_minus_s, double H);

/// Volterra kernel K^H(t, s) = c_H s^(1/2-H) int_s^t (u-s)^(H-3/2) u^(H-1/2) du for
/// H > 1/2.  Evaluated in O(1) through K = c_H s^(H-1/2) G(s/t), where G is
/// expanded in power series around v = 1 and v = 0.
class VolterraKernel {
 public:
  explicit VolterraKernel(double H);
  double H() const noexcept { return H_; }
  double operator()(double t, double s) const noexcept;
  /// Same value with t - s supplied exactly, for s within rounding of t.
  double operator()(double t, double s, double t_minus_s) const noexcept;
  /// G(x) = int_x^1 v^(-2H) (1-v)^(H-3/2) dv for x in (0, 1].
  double G(double x) const noexcept;
  /// G evaluated from y = 1 - x, accurate for tiny y.
  double G_from_gap(double y) const noexcept;

 private:
  static constexpr int kTerms = 72;
  double H_;
  double c_H_;
  double a_;  // 1 - 2H
  double b_;  // H - 1/2
  double lo_const_;
  std::array<double, kTerms> hi_coef_{};
  std::array<double, kTerms> lo_coef_{};
};

/// Autocovariance of fractional Gaussian noise with step dt at lags 0..n-1.
std::vector<double> fgn_autocov(std::size_t n, double H, double dt);

/// Spectral fBm sampler on n steps over [0, T]; the circulant spectrum is
/// computed once and reused across replications.
class FbmSampler {
 public:
  FbmSampler(std::size_t n, double T, double H);
  std::size_t steps() const noexcept { return n_; }
  double dt() const noexcept { return T_ / static_cast<double>(n_); }
  /// n fGn increments.
  std::vector<double> increments(const core::SeedSpec& seed) const;
  Path sample(const core::SeedSpec& seed) const;

 private:
  std::size_t n_;
  double T_;
  double H_;
  core::StationaryGaussianSampler fgn_;
};

Path sample_fbm(std::size_t n, double T, double H, const core::SeedSpec& seed);

/// fBm increments built from Brownian increments dW (one per grid cell) through
/// the Volterra representation B(t_k) = sum_{j<k} K(t_k, s_j) dW_j, s_j the cell
/// midpoint.  The diagonal cell is exact; off-diagonal cells freeze u^(H-1/2) at
/// its cell average, turning the rest into an FFT convolution (O(n log n)).
class VolterraFbm {
 public:
  VolterraFbm(std::size_t n, double T, double H);
  std::size_t steps() const noexcept { return n_; }
  std::vector<double> increments(std::span<const double> dW) const;

 private:
  std::size_t n_;
  double dt_;
  double H_;
  double c_H_;
  std::vector<double> diag_;        // K(t_{m+1}, s_m)
  std::vector<double> s_weight_;    // s_j^(1/2-H)
  std::vector<double> u_weight_;    // c_H * cell average of u^(H-1/2)
  core::CausalConvolver conv_;
};

/// Direct O(n^2) Volterra sum with the exact kernel at cell midpoints.
/// OpenMP-parallel over output points; returns B(t_0..t_n).
std::vector<double> volterra_direct(std::span<const double> dW, double dt, double H);

namespace serial {
std::vector<double> volterra_direct(std::span<const double> dW, double dt, double H);
}

}  // namespace mrw::fbm
