#include <doctest.h>

#include <cmath>
#include <vector>

#include "mrwlab/error.hpp"
#include "mrwlab/fbm.hpp"
#include "mrwlab/linalg.hpp"
#include "mrwlab/parallel.hpp"
#include "mrwlab/quadrature.hpp"
#include "support.hpp"

using namespace mrw;
using namespace mrw::fbm;
using core::Interval;
using core::quad;
using mrw::testing::mean_se;
using mrw::testing::rel_err;

namespace {

// Beta function by quadrature, independent of std::beta.
double beta_quad(double x, double y) {
  return quad([&](core::QuadPoint p) { return std::pow(p.from_lo, x - 1) * std::pow(p.from_hi, y - 1); },
              {0, 1, x - 1, y - 1}, 1e-12);
}

double c_H_oracle(double H) { return std::sqrt(H * (2 * H - 1) / beta_quad(2 - 2 * H, H - 0.5)); }

}  // namespace

TEST_CASE("fbm covariance") {
  CHECK(fbm_cov(0.3, 0.3, 0.7) == doctest::Approx(std::pow(0.3, 1.4)).epsilon(1e-15));
  CHECK(fbm_cov(0.3, 0.8, 0.5) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(fbm_cov(1, 2, 0.7) == doctest::Approx(0.5 * std::pow(2.0, 1.4)).epsilon(1e-14));
  CHECK(fbm_cov(1, 2, 0.7) == doctest::Approx(1.31951).epsilon(1e-5));
  CHECK(fbm_cov(1, 2, 0.7) == fbm_cov(2, 1, 0.7));
}

TEST_CASE("property: fbm covariance factorizes on random grids") {
  core::Rng rng({12, 0}, core::Domain::generic);
  for (int t = 0; t < 20; ++t) {
    const double H = 0.05 + 0.9 * rng.uniform();
    std::vector<double> pts(64);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = (i + 1) / 64.0;
    const auto s = core::SymmetricMatrix::from_grid(pts, [&](double a, double b) { return fbm_cov(a, b, H); });
    CAPTURE(H);
    CHECK_NOTHROW(core::cholesky(s));
  }
}

TEST_CASE("hurst parameter validation") {
  CHECK_THROWS_AS(Hurst(0.0), DomainError);
  CHECK_THROWS_AS(Hurst(1.0), DomainError);
  CHECK_NOTHROW(Hurst(0.3));
  CHECK_THROWS_AS(Hurst(0.5).require_long_memory(), DomainError);
  CHECK_THROWS_AS(kernel_dK(1.0, 1.0, 0.7), DomainError);
  CHECK_THROWS_AS(kernel_dK(1.0, 0.5, 0.4), DomainError);
  CHECK_THROWS_AS(VolterraKernel(0.45), DomainError);
}

TEST_CASE("kernel constant matches a Beta quadrature") {
  for (double H : {0.55, 0.62, 0.7, 0.85, 0.95}) {
    CAPTURE(H);
    CHECK(rel_err(kernel_constant(H), c_H_oracle(H)) < 1e-9);
  }
  CHECK(rel_err(kernel_dK(1.0, 0.5, 0.7), 2.0 * c_H_oracle(0.7)) < 1e-9);
}

TEST_CASE("kernel derivative is positive") {
  core::Rng rng({13, 0}, core::Domain::generic);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform() * 3.0;
    const double s = a * rng.uniform();
    const double H = 0.5 + 0.5 * rng.uniform();
    if (!(s > 0 && s < a && H > 0.5 && H < 1)) continue;
    REQUIRE(kernel_dK(a, s, H) > 0.0);
  }
}

TEST_CASE("kernel identity against quadrature") {
  core::Rng rng({14, 0}, core::Domain::generic);
  for (double H : {0.6, 0.7, 0.85}) {
    for (int k = 0; k < 20;) {
      double a = rng.uniform(), b = rng.uniform();
      if (a < b) std::swap(a, b);
      if (a - b <= 0.01) continue;
      ++k;
      const double lhs = quad([&](core::QuadPoint p) {
                                return kernel_dK(a, p.x, (a - b) + p.from_hi, H) * kernel_dK(b, p.x, p.from_hi, H);
                              },
                              {0, b, 1 - 2 * H, H - 1.5}, 1e-9);
      const double rhs = identity_constant(H) * std::pow(a - b, 2 * H - 2);
      CAPTURE(H);
      CAPTURE(a);
      CAPTURE(b);
      CHECK(rel_err(lhs, rhs) < 1e-3);
    }
  }
}

TEST_CASE("series kernel matches integrating its derivative") {
  for (double H : {0.55, 0.62, 0.75, 0.9}) {
    const VolterraKernel K(H);
    for (double t : {0.3, 1.0, 2.5}) {
      for (double x : {1e-4, 0.02, 0.3, 0.49, 0.5, 0.51, 0.8, 0.999}) {
        const double s = x * t;
        const double want = quad([&](core::QuadPoint p) { return kernel_dK(p.x, s, p.from_lo, H); }, {s, t, H - 1.5}, 1e-11);
        CAPTURE(H);
        CAPTURE(t);
        CAPTURE(x);
        CHECK(rel_err(K(t, s), want) < 1e-9);
      }
    }
    CHECK(K(1.0, 1.0) == 0.0);
    CHECK(K(1.0, 1.5) == 0.0);
  }
}

TEST_CASE("kernel square integral reproduces the fbm variance") {
  for (double H : {0.6, 0.75}) {
    const VolterraKernel K(H);
    for (double t : {0.5, 1.0, 2.0}) {
      const double v = quad([&](double s) { const double k = K(t, s); return k * k; },
                            {0, t, 1 - 2 * H, 2 * H - 1}, 1e-11);
      CHECK(rel_err(v, std::pow(t, 2 * H)) < 1e-8);
    }
  }
}

TEST_CASE("spectral fbm: variance and self-similarity") {
  const double H = 0.7;
  const std::size_t n = 1 << 14;
  const FbmSampler sampler(n, 1.0, H);
  const int R = 200;
  std::vector<double> end2(R), half2(R);
  for (int rep = 0; rep < R; ++rep) {
    const auto p = sampler.sample({31, static_cast<std::uint64_t>(rep)});
    REQUIRE(p.values.size() == n + 1);
    REQUIRE(p.values[0] == 0.0);
    end2[rep] = p.values[n] * p.values[n];
    half2[rep] = p.values[n / 2] * p.values[n / 2];
  }
  const auto e = mean_se(end2);
  CHECK(std::abs(e.mean - 1.0) < 5 * e.se);
  const auto h = mean_se(half2);
  // ratio with a delta-method standard error
  double cov = 0.0;
  for (int i = 0; i < R; ++i) cov += (end2[i] - e.mean) * (half2[i] - h.mean);
  cov /= (R - 1.0) * R;
  const double ratio = e.mean / h.mean;
  const double se = std::sqrt(e.se * e.se / (h.mean * h.mean) + e.mean * e.mean * h.se * h.se / std::pow(h.mean, 4) -
                              2 * e.mean * cov / std::pow(h.mean, 3));
  CHECK(std::abs(ratio - std::pow(2.0, 2 * H)) < 5 * se);
}

TEST_CASE("spectral fbm: Brownian case has uncorrelated increments") {
  const std::size_t n = 1 << 14;
  const auto p = sample_fbm(n, 1.0, 0.5, {32, 0});
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = p.values[i + 1] - p.values[i];
  std::span<const double> ds(d);
  CHECK(std::abs(testing::pearson(ds.first(n - 1), ds.subspan(1))) < 5 / std::sqrt(double(n)));
}

TEST_CASE("spectral fbm: increments are stationary across windows") {
  const std::size_t n = 4096;
  const FbmSampler sampler(n, 1.0, 0.75);
  const int R = 300;
  std::vector<double> early(R), late(R);
  for (int rep = 0; rep < R; ++rep) {
    const auto p = sampler.sample({33, static_cast<std::uint64_t>(rep)});
    const double a = p.values[256] - p.values[0];
    const double b = p.values[n] - p.values[n - 256];
    early[rep] = a * a;
    late[rep] = b * b;
  }
  const auto ea = mean_se(early), la = mean_se(late);
  CHECK(std::abs(ea.mean - la.mean) < 5 * std::hypot(ea.se, la.se));
}

TEST_CASE("fast Volterra synthesis agrees with the direct sum") {
  const std::size_t n = 512;
  const double T = 1.0, H = 0.62, dt = T / n;
  core::Rng rng({34, 0}, core::Domain::generic);
  std::vector<double> dW(n);
  for (auto& v : dW) v = std::sqrt(dt) * rng.normal();
  const auto inc = VolterraFbm(n, T, H).increments(dW);
  const auto direct = volterra_direct(dW, dt, H);
  double B = 0.0, worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    B += inc[k];
    worst = std::max(worst, std::abs(B - direct[k + 1]));
    scale = std::max(scale, std::abs(direct[k + 1]));
  }
  CHECK(worst < 0.02 * scale);
}

TEST_CASE("fast Volterra synthesis has the fbm variance") {
  // Exact variance of the linear scheme from its impulse responses.
  const std::size_t n = 256;
  const double H = 0.62, dt = 1.0 / n;
  const VolterraFbm v(n, 1.0, H);
  std::vector<double> e(n, 0.0);
  double var_end = 0.0, var_mid = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    e.assign(n, 0.0);
    e[j] = 1.0;
    const auto inc = v.increments(e);
    double b_end = 0.0, b_mid = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      b_end += inc[m];
      if (m < n / 2) b_mid += inc[m];
    }
    var_end += b_end * b_end * dt;
    var_mid += b_mid * b_mid * dt;
  }
  CHECK(rel_err(var_end, 1.0) < 0.02);
  CHECK(rel_err(var_mid, std::pow(0.5, 2 * H)) < 0.02);
}

TEST_CASE("parallel and serial direct Volterra sums are bit-identical") {
  const std::size_t n = 700;
  core::Rng rng({35, 0}, core::Domain::generic);
  std::vector<double> dW(n);
  for (auto& v : dW) v = rng.normal() * 0.03;
  const auto ref = serial::volterra_direct(dW, 1.0 / n, 0.7);
  for (int th : {1, 2, 3}) {
    par::ThreadScope scope(th);
    CHECK(volterra_direct(dW, 1.0 / n, 0.7) == ref);
  }
}
