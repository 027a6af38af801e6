#include "mrwlab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "mrwlab/error.hpp"
#include "mrwlab/log.hpp"

namespace mrw::core {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::shared_ptr<const FftPlan> cached_plan(std::size_t size) {
  static std::mutex cache_mutex;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[size];
  if (!slot) slot = std::make_shared<const FftPlan>(size);
  return slot;
}

fftw_complex* as_fftw(std::span<std::complex<double>> d) {
  return reinterpret_cast<fftw_complex*>(d.data());
}

}  // namespace

FftPlan::FftPlan(std::size_t size) : size_(size) {
  std::lock_guard lock(planner_mutex());
  auto* buf = fftw_alloc_complex(size);
  const int n = static_cast<int>(size);
  // FFTW_UNALIGNED keeps the plan valid for std::vector storage of any alignment.
  fwd_ = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  bwd_ = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(data), as_fftw(data));
}

void FftPlan::backward(std::span<std::complex<double>> data) const {
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), as_fftw(data), as_fftw(data));
}

CausalConvolver::CausalConvolver(std::span<const double> kernel, std::size_t n) : n_(n) {
  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  plan_ = cached_plan(len);
  kernel_hat_.assign(len, {0.0, 0.0});
  for (std::size_t i = 0; i < std::min(n, kernel.size()); ++i) kernel_hat_[i] = kernel[i];
  plan_->forward(kernel_hat_);
}

std::vector<double> CausalConvolver::apply(std::span<const double> x) const {
  const std::size_t len = kernel_hat_.size();
  std::vector<std::complex<double>> buf(len, {0.0, 0.0});
  for (std::size_t i = 0; i < std::min(n_, x.size()); ++i) buf[i] = x[i];
  plan_->forward(buf);
  for (std::size_t k = 0; k < len; ++k) buf[k] *= kernel_hat_[k];
  plan_->backward(buf);
  std::vector<double> y(n_);
  const double scale = 1.0 / static_cast<double>(len);
  for (std::size_t i = 0; i < n_; ++i) y[i] = buf[i].real() * scale;
  return y;
}

StationaryGaussianSampler::StationaryGaussianSampler(std::vector<double> autocov)
    : autocov_(std::move(autocov)) {
  const std::size_t n = autocov_.size();
  if (n == 0) throw ConfigError("empty autocovariance");
  if (!(autocov_[0] >= 0.0)) throw ConfigError("autocovariance at lag 0 must be nonnegative");
  if (n == 1) {
    sqrt_eig_ = {std::sqrt(autocov_[0])};
    return;
  }

  const std::size_t m = 2 * (n - 1);
  std::vector<std::complex<double>> c(m);
  for (std::size_t k = 0; k < n; ++k) c[k] = autocov_[k];
  for (std::size_t k = n; k < m; ++k) c[k] = autocov_[m - k];
  plan_ = cached_plan(m);
  plan_->forward(c);

  double lmax = 0.0;
  double lmin = 0.0;
  for (const auto& v : c) {
    lmax = std::max(lmax, v.real());
    lmin = std::min(lmin, v.real());
  }
  if (lmin < -1e-9 * lmax) {
    if (n > kCholeskyFallbackLimit) {
      std::ostringstream os;
      os << "circulant embedding eigenvalue " << lmin << " (max " << lmax << ") for n = " << n;
      throw SpectrumNegative(os.str());
    }
    SymmetricMatrix sigma(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) sigma.set(i, j, autocov_[i - j]);
    factor_ = cholesky(sigma);
    plan_.reset();
    return;
  }

  sqrt_eig_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double lam = c[k].real();
    if (lam < 0.0) {
      lam = 0.0;
      ++clipped_;
    }
    sqrt_eig_[k] = std::sqrt(lam / static_cast<double>(m));
  }
  if (clipped_ > 0) {
    std::ostringstream os;
    os << "clipped " << clipped_ << " slightly negative circulant eigenvalues (min " << lmin << ")";
    warn(os.str());
  }
}

std::vector<double> StationaryGaussianSampler::sample(const SeedSpec& seed, Domain domain) const {
  const std::size_t n = autocov_.size();
  if (factor_) return sample_gaussian(*factor_, seed, domain);

  Rng rng(seed, domain);
  if (n == 1) return {sqrt_eig_[0] * rng.normal()};

  const std::size_t m = sqrt_eig_.size();
  std::vector<std::complex<double>> v(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = rng.normal();
    const double b = rng.normal();
    v[k] = {sqrt_eig_[k] * a, sqrt_eig_[k] * b};
  }
  plan_->forward(v);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i].real();
  return out;
}

std::vector<double> sample_stationary_gaussian(std::span<const double> autocov, std::size_t n,
                                               const SeedSpec& seed) {
  if (autocov.size() < n) throw ConfigError("autocovariance shorter than requested length");
  return StationaryGaussianSampler(std::vector<double>(autocov.begin(), autocov.begin() + n))
      .sample(seed);
}

}  // namespace mrw::core
