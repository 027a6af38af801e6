#include "mrwlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrwlab/error.hpp"

namespace mrw::core {

double SymmetricMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> LowerTriangular::apply(std::span<const double> z) const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += a_[i * n_ + j] * z[j];
    out[i] = s;
  }
  return out;
}

SymmetricMatrix LowerTriangular::reconstruct() const {
  SymmetricMatrix m(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= j; ++k) s += a_[i * n_ + k] * a_[j * n_ + k];
      m.set(i, j, s);
    }
  return m;
}

LowerTriangular cholesky(const SymmetricMatrix& sigma) {
  const std::size_t n = sigma.order();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, sigma(i, i));
  const double tol = 1e-12 * max_diag;

  LowerTriangular L(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = sigma(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > tol)) {
      std::ostringstream os;
      os << "pivot " << j << " = " << d << " below tolerance " << tol;
      throw NotPositiveDefinite(os.str());
    }
    const double ljj = std::sqrt(d);
    L.at(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = sigma(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L.at(i, j) = s / ljj;
    }
  }
  return L;
}

std::vector<double> sample_gaussian(const LowerTriangular& factor, const SeedSpec& seed, Domain domain) {
  Rng rng(seed, domain);
  std::vector<double> z(factor.order());
  for (double& v : z) v = rng.normal();
  return factor.apply(z);
}

}  // namespace mrw::core
