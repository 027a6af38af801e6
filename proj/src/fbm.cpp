#include "mrwlab/fbm.hpp"

#include <cmath>
#include <sstream>

#include "mrwlab/error.hpp"
#include "mrwlab/parallel.hpp"

namespace mrw::fbm {

Hurst::Hurst(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0)) {
    std::ostringstream os;
    os << "Hurst exponent " << h << " outside (0, 1)";
    throw DomainError(os.str());
  }
}

const Hurst& Hurst::require_long_memory() const {
  if (!(h_ > 0.5)) {
    std::ostringstream os;
    os << "operation requires H > 1/2, got " << h_;
    throw DomainError(os.str());
  }
  return *this;
}

double fbm_cov(double t, double s, double H) {
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double kernel_constant(double H) {
  Hurst(H).require_long_memory();
  return std::sqrt(H * (2.0 * H - 1.0) / std::beta(2.0 - 2.0 * H, H - 0.5));
}

double identity_constant(double H) { return H * (2.0 * H - 1.0); }

double kernel_dK(double a, double s, double H) { return kernel_dK(a, s, a - s, H); }

double kernel_dK(double a, double s, double a_minus_s, double H) {
  Hurst(H).require_long_memory();
  if (!(s > 0.0 && a_minus_s > 0.0)) {
    std::ostringstream os;
    os << "kernel derivative needs 0 < s < a, got a = " << a << ", s = " << s;
    throw DomainError(os.str());
  }
  return kernel_constant(H) * std::pow(s / a, 0.5 - H) * std::pow(a_minus_s, H - 1.5);
}

VolterraKernel::VolterraKernel(double H)
    : H_(H), c_H_(kernel_constant(H)), a_(1.0 - 2.0 * H), b_(H - 0.5) {
  // Around v = 1:  v^(a-1) = sum_n (1-a)_n / n! (1-v)^n.
  double p = 1.0;
  for (int n = 0; n < kTerms; ++n) {
    hi_coef_[n] = p / (b_ + n);
    p *= (1.0 - a_ + n) / (n + 1.0);
  }
  // Around v = 0:  (1-v)^(b-1) = sum_m (1-b)_m / m! v^m.
  double q = 1.0;
  for (int m = 0; m < kTerms; ++m) {
    lo_coef_[m] = q / (a_ + m);
    q *= (1.0 - b_ + m) / (m + 1.0);
  }
  double hi_half = 0.0;
  for (int n = kTerms - 1; n >= 0; --n) hi_half = hi_half * 0.5 + hi_coef_[n];
  const double g_half = std::pow(0.5, b_) * hi_half;
  double lo_half = 0.0;
  for (int m = kTerms - 1; m >= 0; --m) lo_half = lo_half * 0.5 + lo_coef_[m];
  lo_const_ = g_half + std::pow(0.5, a_) * lo_half;
}

double VolterraKernel::G(double x) const noexcept {
  if (x >= 1.0) return 0.0;
  if (x >= 0.5) return G_from_gap(1.0 - x);
  double acc = 0.0;
  for (int m = kTerms - 1; m >= 0; --m) acc = acc * x + lo_coef_[m];
  return lo_const_ - std::pow(x, a_) * acc;
}

double VolterraKernel::G_from_gap(double y) const noexcept {
  if (!(y > 0.0)) return 0.0;
  if (y > 0.5) return G(1.0 - y);
  double acc = 0.0;
  for (int n = kTerms - 1; n >= 0; --n) acc = acc * y + hi_coef_[n];
  return std::pow(y, b_) * acc;
}

double VolterraKernel::operator()(double t, double s, double t_minus_s) const noexcept {
  if (!(t_minus_s > 0.0)) return 0.0;
  if (!(s > 0.0)) return HUGE_VAL;
  const double y = t_minus_s / t;
  return c_H_ * std::pow(s, H_ - 0.5) * (y > 0.5 ? G(s / t) : G_from_gap(y));
}

double VolterraKernel::operator()(double t, double s) const noexcept {
  if (!(s < t)) return 0.0;
  if (!(s > 0.0)) return HUGE_VAL;
  return c_H_ * std::pow(s, H_ - 0.5) * G(s / t);
}

std::vector<double> fgn_autocov(std::size_t n, double H, double dt) {
  std::vector<double> g(n);
  const double h2 = 2.0 * H;
  const double scale = 0.5 * std::pow(dt, h2);
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    g[k] = scale * (std::pow(kk + 1.0, h2) + std::pow(std::abs(kk - 1.0), h2) - 2.0 * std::pow(kk, h2));
  }
  return g;
}

FbmSampler::FbmSampler(std::size_t n, double T, double H)
    : n_(n), T_(T), H_(Hurst(H).value()), fgn_(fgn_autocov(n, H, T / static_cast<double>(n))) {
  if (n < 1) throw ConfigError("fBm needs at least one step");
  if (!(T > 0.0)) throw ConfigError("fBm horizon must be positive");
}

std::vector<double> FbmSampler::increments(const core::SeedSpec& seed) const {
  return fgn_.sample(seed, core::Domain::fbm);
}

Path FbmSampler::sample(const core::SeedSpec& seed) const {
  const auto inc = increments(seed);
  Path p;
  p.dt = dt();
  p.values.resize(n_ + 1);
  p.values[0] = 0.0;
  for (std::size_t i = 0; i < n_; ++i) p.values[i + 1] = p.values[i] + inc[i];
  p.meta.kind = PathKind::fbm;
  p.meta.H = H_;
  p.meta.seed = seed;
  return p;
}

Path sample_fbm(std::size_t n, double T, double H, const core::SeedSpec& seed) {
  return FbmSampler(n, T, H).sample(seed);
}

namespace {

std::vector<double> offdiag_weights(std::size_t n, double dt, double H) {
  // D(l) = int over cell l of y^(H-3/2) dy, y measured from the source midpoint.
  std::vector<double> d(n, 0.0);
  const double b = H - 0.5;
  const double scale = std::pow(dt, b) / b;
  for (std::size_t l = 1; l < n; ++l) {
    const double ll = static_cast<double>(l);
    d[l] = scale * (std::pow(ll + 0.5, b) - std::pow(ll - 0.5, b));
  }
  return d;
}

}  // namespace

VolterraFbm::VolterraFbm(std::size_t n, double T, double H)
    : n_(n),
      dt_(T / static_cast<double>(n)),
      H_(Hurst(H).require_long_memory().value()),
      c_H_(kernel_constant(H)),
      conv_(offdiag_weights(n, T / static_cast<double>(n), H), n) {
  const VolterraKernel K(H);
  diag_.resize(n);
  s_weight_.resize(n);
  u_weight_.resize(n);
  const double hp = H + 0.5;
  for (std::size_t m = 0; m < n; ++m) {
    const double tm = static_cast<double>(m) * dt_;
    const double tm1 = static_cast<double>(m + 1) * dt_;
    const double sm = (static_cast<double>(m) + 0.5) * dt_;
    diag_[m] = K(tm1, sm);
    s_weight_[m] = std::pow(sm, 0.5 - H);
    u_weight_[m] = c_H_ * (std::pow(tm1, hp) - std::pow(tm, hp)) / (hp * dt_);
  }
}

std::vector<double> VolterraFbm::increments(std::span<const double> dW) const {
  if (dW.size() != n_) throw ConfigError("Brownian increment count does not match the grid");
  std::vector<double> y(n_);
  for (std::size_t j = 0; j < n_; ++j) y[j] = s_weight_[j] * dW[j];
  const auto conv = conv_.apply(y);
  std::vector<double> out(n_);
  for (std::size_t m = 0; m < n_; ++m) out[m] = diag_[m] * dW[m] + u_weight_[m] * conv[m];
  return out;
}

namespace {

double volterra_point(const VolterraKernel& K, std::span<const double> dW, double dt, std::size_t k) {
  const double t = static_cast<double>(k) * dt;
  double acc = 0.0;
  for (std::size_t j = 0; j < k; ++j) acc += K(t, (static_cast<double>(j) + 0.5) * dt) * dW[j];
  return acc;
}

}  // namespace

std::vector<double> volterra_direct(std::span<const double> dW, double dt, double H) {
  const VolterraKernel K(H);
  const std::size_t n = dW.size();
  std::vector<double> B(n + 1, 0.0);
  const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(par::max_threads())
  for (long long k = 1; k <= nn; ++k) B[k] = volterra_point(K, dW, dt, static_cast<std::size_t>(k));
  return B;
}

namespace serial {

std::vector<double> volterra_direct(std::span<const double> dW, double dt, double H) {
  const VolterraKernel K(H);
  const std::size_t n = dW.size();
  std::vector<double> B(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) B[k] = volterra_point(K, dW, dt, k);
  return B;
}

}  // namespace serial

}  // namespace mrw::fbm
