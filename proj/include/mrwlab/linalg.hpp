#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mrwlab/rng.hpp"

namespace mrw::core {

/// Dense symmetric matrix, row-major.  set() writes both triangles so the
/// symmetry is exact by construction.
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(std::size_t order = 0) : n_(order), a_(order * order, 0.0) {}

  std::size_t order() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = v;
  }
  double max_abs() const noexcept;

  template <class Cov>
  static SymmetricMatrix from_grid(std::span<const double> pts, Cov&& cov) {
    SymmetricMatrix m(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j <= i; ++j) m.set(i, j, cov(pts[i], pts[j]));
    return m;
  }

 private:
  std::size_t n_;
  std::vector<double> a_;
};

/// Lower-triangular factor, row-major with explicit zeros above the diagonal.
class LowerTriangular {
 public:
  explicit LowerTriangular(std::size_t order = 0) : n_(order), a_(order * order, 0.0) {}

  std::size_t order() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
  double& at(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }

  /// L * z for a vector z of length order().
  std::vector<double> apply(std::span<const double> z) const;
  /// L * L^T.
  SymmetricMatrix reconstruct() const;

 private:
  std::size_t n_;
  std::vector<double> a_;
};

/// Cholesky factor L with L L^T = sigma.  Throws NotPositiveDefinite when a
/// pivot falls below 1e-12 times the largest diagonal entry.
LowerTriangular cholesky(const SymmetricMatrix& sigma);

/// Draw from N(0, sigma) through its Cholesky factor.
std::vector<double> sample_gaussian(const LowerTriangular& factor, const SeedSpec& seed,
                                    Domain domain = Domain::stationary);

}  // namespace mrw::core
