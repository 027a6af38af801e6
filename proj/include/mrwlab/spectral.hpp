#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mrwlab/linalg.hpp"
#include "mrwlab/rng.hpp"

namespace mrw::core {

/// In-place complex DFT of a fixed length, backed by FFTW.  Plans are created
/// under a global lock; execution is thread-safe.
class FftPlan {
 public:
  explicit FftPlan(std::size_t size);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const noexcept { return size_; }
  /// y_j = sum_k x_k exp(-2 pi i jk / N)
  void forward(std::span<std::complex<double>> data) const;
  /// y_j = sum_k x_k exp(+2 pi i jk / N), unnormalized
  void backward(std::span<std::complex<double>> data) const;

 private:
  std::size_t size_;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

/// Causal linear convolution y[m] = sum_{j<=m} kernel[m-j] x[j], m < n,
/// through a zero-padded FFT.
class CausalConvolver {
 public:
  CausalConvolver(std::span<const double> kernel, std::size_t n);
  std::size_t size() const noexcept { return n_; }
  std::vector<double> apply(std::span<const double> x) const;

 private:
  std::size_t n_;
  std::shared_ptr<const FftPlan> plan_;
  std::vector<std::complex<double>> kernel_hat_;
};

/// Sampler for a stationary Gaussian sequence with autocovariance gamma(0..n-1).
/// Circulant embedding of order 2(n-1) is the default route; when the embedding
/// has eigenvalues below -1e-9 * max the sampler falls back to a Cholesky factor
/// for n <= 4096 and throws SpectrumNegative otherwise.  Smaller negative
/// eigenvalues are clipped to zero with a warning.
class StationaryGaussianSampler {
 public:
  static constexpr std::size_t kCholeskyFallbackLimit = 4096;

  explicit StationaryGaussianSampler(std::vector<double> autocov);

  std::size_t size() const noexcept { return autocov_.size(); }
  const std::vector<double>& autocov() const noexcept { return autocov_; }
  bool uses_cholesky() const noexcept { return factor_.has_value(); }
  /// Number of negative embedding eigenvalues clipped to zero.
  std::size_t clipped() const noexcept { return clipped_; }

  std::vector<double> sample(const SeedSpec& seed, Domain domain = Domain::stationary) const;

 private:
  std::vector<double> autocov_;
  std::vector<double> sqrt_eig_;  // sqrt(lambda_k / M)
  std::shared_ptr<const FftPlan> plan_;
  std::optional<LowerTriangular> factor_;
  std::size_t clipped_ = 0;
};

/// One draw of length n from the stationary Gaussian law with the given
/// autocovariance (only the first n entries of autocov are used).
std::vector<double> sample_stationary_gaussian(std::span<const double> autocov, std::size_t n,
                                               const SeedSpec& seed);

}  // namespace mrw::core
