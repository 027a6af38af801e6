#include "mrwlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mrwlab/error.hpp"
#include "mrwlab/parallel.hpp"
#include "mrwlab/rng.hpp"

namespace mrw::stats {

namespace {

void center_in_place(ReturnSeries& r) {
  if (r.values.empty()) return;
  const double m = std::accumulate(r.values.begin(), r.values.end(), 0.0) / static_cast<double>(r.values.size());
  for (double& v : r.values) v -= m;
  r.centered = true;
}

void require_lag(std::size_t tau, std::size_t len) {
  if (tau < 1) throw ConfigError("return lag must be at least 1");
  if (tau >= len) throw TooShort("series shorter than the return lag");
}

std::vector<double> transformed(std::span<const double> x, Transform t) {
  std::vector<double> y(x.begin(), x.end());
  if (t == Transform::abs)
    for (double& v : y) v = std::abs(v);
  else if (t == Transform::square)
    for (double& v : y) v = v * v;
  return y;
}

double lag_corr(const std::vector<double>& y, std::size_t k) {
  const std::size_t m = y.size() - k;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ma += y[i];
    mb += y[i + k];
  }
  ma /= static_cast<double>(m);
  mb /= static_cast<double>(m);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = y[i] - ma, b = y[i + k] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  if (!(saa > 0.0 && sbb > 0.0)) throw DegenerateVariance("constant series segment in autocorrelation");
  return sab / std::sqrt(saa * sbb);
}

EstimatorKind acf_kind(Transform t) {
  switch (t) {
    case Transform::abs: return EstimatorKind::abs_acf;
    case Transform::square: return EstimatorKind::sq_acf;
    default: return EstimatorKind::acf;
  }
}

template <bool Parallel>
EstimatorReport acf_impl(const ReturnSeries& x, std::size_t kmax, Transform t) {
  const std::size_t n = x.values.size();
  if (kmax < 1 || !(kmax < n / 4)) {
    std::ostringstream os;
    os << "acf needs 1 <= kmax < n/4 (kmax = " << kmax << ", n = " << n << ")";
    throw ConfigError(os.str());
  }
  const auto y = transformed(x.values, t);
  EstimatorReport rep;
  rep.kind = acf_kind(t);
  rep.n = n;
  rep.k.resize(kmax);
  rep.estimate.resize(kmax);
  par::ExceptionTrap trap;
  const long long K = static_cast<long long>(kmax);
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) if (Parallel)
  for (long long j = 0; j < K; ++j) {
    trap.run([&] { rep.estimate[j] = lag_corr(y, static_cast<std::size_t>(j) + 1); });
  }
  trap.rethrow();
  const double band = 1.96 / std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < kmax; ++j) rep.k[j] = static_cast<double>(j + 1);
  rep.stderr_.assign(kmax, 1.0 / std::sqrt(static_cast<double>(n)));
  rep.lo.assign(kmax, -band);
  rep.hi.assign(kmax, band);
  return rep;
}

// Sum of f(0..m-1) taken in pairs from both ends, so the result is unchanged
// when the summation index is reversed.
template <class F>
double symmetric_sum(std::size_t m, F&& f) {
  double acc = 0.0;
  std::size_t i = 0, j = m;
  while (j > i + 1) {
    --j;
    acc += f(i) + f(j);
    ++i;
  }
  if (j == i + 1) acc += f(i);
  return acc;
}

// Leverage values for k = -kmax..kmax on a series.
std::vector<double> leverage_values(std::span<const double> x, std::size_t kmax) {
  const std::size_t n = x.size();
  const double m2 = symmetric_sum(n, [&](std::size_t i) { return x[i] * x[i]; }) / static_cast<double>(n);
  if (!(m2 > 0.0)) throw DegenerateVariance("zero second moment in leverage");
  const double norm = m2 * m2;
  std::vector<double> out(2 * kmax + 1);
  for (std::size_t j = 0; j <= 2 * kmax; ++j) {
    const long long k = static_cast<long long>(j) - static_cast<long long>(kmax);
    const std::size_t ak = static_cast<std::size_t>(std::llabs(k));
    const std::size_t m = n - ak;
    double s;
    if (k >= 0) {
      s = symmetric_sum(m, [&](std::size_t t) { return x[t] * (x[t + ak] * x[t + ak]); });
    } else {
      s = symmetric_sum(m, [&](std::size_t u) { return x[u + ak] * (x[u] * x[u]); });
    }
    out[j] = s / static_cast<double>(m) / norm;
  }
  return out;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y, double* se = nullptr,
                 double* intercept = nullptr) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double b = sxy / sxx;
  const double a = my - b * mx;
  if (intercept) *intercept = a;
  if (se) {
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - a - b * x[i];
      ss += e * e;
    }
    *se = x.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
  }
  return b;
}

double rescaled_range(std::span<const double> blk) {
  const double w = static_cast<double>(blk.size());
  const double mean = std::accumulate(blk.begin(), blk.end(), 0.0) / w;
  double cum = 0.0, lo = 0.0, hi = 0.0, ss = 0.0;
  for (double v : blk) {
    const double d = v - mean;
    cum += d;
    lo = std::min(lo, cum);
    hi = std::max(hi, cum);
    ss += d * d;
  }
  const double sd = std::sqrt(ss / w);
  if (!(sd > 0.0)) throw DegenerateVariance("constant block in R/S analysis");
  return (hi - lo) / sd;
}

template <bool Parallel>
HurstEstimate hurst_impl(std::span<const double> x, std::vector<std::size_t> windows) {
  const std::size_t n = x.size();
  if (n < 512) {
    std::ostringstream os;
    os << "R/S analysis needs at least 512 points, got " << n;
    throw TooShort(os.str());
  }
  if (windows.empty())
    for (std::size_t w = 64; w <= n / 4; w *= 2) windows.push_back(w);
  for (auto w : windows)
    if (w < 8 || w > n) throw ConfigError("R/S window sizes must lie in [8, n]");
  if (windows.size() < 2) throw TooFewPoints("R/S needs at least two window sizes");

  HurstEstimate est;
  est.window.resize(windows.size());
  est.rs.resize(windows.size());
  par::ExceptionTrap trap;
  const long long W = static_cast<long long>(windows.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(par::max_threads()) if (Parallel)
  for (long long j = 0; j < W; ++j) {
    trap.run([&] {
      const std::size_t w = windows[j];
      const std::size_t blocks = n / w;
      double acc = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) acc += rescaled_range(x.subspan(b * w, w));
      est.window[j] = static_cast<double>(w);
      est.rs[j] = acc / static_cast<double>(blocks);
    });
  }
  trap.rethrow();
  std::vector<double> lx(windows.size()), ly(windows.size());
  for (std::size_t j = 0; j < windows.size(); ++j) {
    lx[j] = std::log(est.window[j]);
    ly[j] = std::log(est.rs[j]);
  }
  est.H = ols_slope(lx, ly, &est.se);
  return est;
}

}  // namespace

ReturnSeries log_returns(std::span<const double> prices, std::size_t tau, bool center, std::string source) {
  require_lag(tau, prices.size());
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0)) {
      std::ostringstream os;
      os << "price " << prices[i] << " at index " << i << " is not positive";
      throw NonPositivePrice(os.str());
    }
  }
  ReturnSeries r;
  r.lag = tau;
  r.source = std::move(source);
  r.values.resize(prices.size() - tau);
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = std::log(prices[i + tau]) - std::log(prices[i]);
  if (center) center_in_place(r);
  return r;
}

ReturnSeries path_returns(const Path& log_price, std::size_t tau, bool center) {
  require_lag(tau, log_price.values.size());
  ReturnSeries r;
  r.lag = tau;
  r.source = to_string(log_price.meta.kind);
  r.values.resize(log_price.values.size() - tau);
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] = log_price.values[i + tau] - log_price.values[i];
  if (center) center_in_place(r);
  return r;
}

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::acf: return "acf";
    case EstimatorKind::abs_acf: return "abs_acf";
    case EstimatorKind::sq_acf: return "sq_acf";
    case EstimatorKind::leverage: return "leverage";
    case EstimatorKind::hurst: return "hurst";
    case EstimatorKind::powerlaw: return "powerlaw";
  }
  return "acf";
}

std::string to_string(Transform t) {
  switch (t) {
    case Transform::identity: return "identity";
    case Transform::abs: return "abs";
    case Transform::square: return "square";
  }
  return "identity";
}

Transform transform_from_string(const std::string& s) {
  if (s == "identity" || s == "none") return Transform::identity;
  if (s == "abs") return Transform::abs;
  if (s == "square" || s == "sq") return Transform::square;
  throw ConfigError("unknown transform '" + s + "' (expected identity, abs or square)");
}

EstimatorReport acf(const ReturnSeries& x, std::size_t kmax, Transform t) { return acf_impl<true>(x, kmax, t); }

PowerLawFit powerlaw_fit(const EstimatorReport& report, double k_lo, double k_hi) {
  if (!(k_lo > 0.0 && k_hi >= k_lo)) throw ConfigError("power-law fit range must satisfy 0 < k_lo <= k_hi");
  PowerLawFit f;
  f.k_lo = k_lo;
  f.k_hi = k_hi;
  std::vector<double> lx, ly, kk, cc;
  for (std::size_t j = 0; j < report.k.size(); ++j) {
    const double k = report.k[j];
    if (k < k_lo || k > k_hi || !(k > 0.0)) continue;
    const double c = report.estimate[j];
    if (!(c > 0.0)) {
      ++f.excluded;
      continue;
    }
    lx.push_back(std::log(k));
    ly.push_back(std::log(c));
    kk.push_back(k);
    cc.push_back(c);
  }
  f.used = lx.size();
  if (f.used < 5) {
    std::ostringstream os;
    os << "power-law fit has " << f.used << " usable lags, needs 5";
    throw TooFewPoints(os.str());
  }
  f.alpha = -ols_slope(lx, ly, nullptr, &f.intercept);
  double ss = 0.0;
  for (std::size_t j = 0; j < kk.size(); ++j) {
    const double e = cc[j] - std::exp(f.intercept) * std::pow(kk[j], -f.alpha);
    ss += e * e;
  }
  f.mse = ss / static_cast<double>(kk.size());
  return f;
}

EstimatorReport leverage(const ReturnSeries& x, std::size_t kmax, const LeverageOptions& opt) {
  const std::size_t n = x.values.size();
  if (!(kmax < n / 4)) {
    std::ostringstream os;
    os << "leverage needs kmax < n/4 (kmax = " << kmax << ", n = " << n << ")";
    throw ConfigError(os.str());
  }
  if (opt.resamples < 2) throw ConfigError("leverage bootstrap needs at least two resamples");
  EstimatorReport rep;
  rep.kind = EstimatorKind::leverage;
  rep.n = n;
  rep.estimate = leverage_values(x.values, kmax);
  const std::size_t L = rep.estimate.size();
  rep.k.resize(L);
  for (std::size_t j = 0; j < L; ++j) rep.k[j] = static_cast<double>(j) - static_cast<double>(kmax);

  const std::size_t block =
      opt.block ? std::min(opt.block, n) : std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::sqrt(n))));
  const std::size_t starts = n - block + 1;
  auto boot = par::replicate<std::vector<double>>(0, opt.resamples, [&](std::uint64_t idx) {
    core::Rng rng({opt.seed, idx}, core::Domain::bootstrap);
    std::vector<double> y;
    y.reserve(n + block);
    while (y.size() < n) {
      const std::size_t s = static_cast<std::size_t>(rng.below(starts));
      y.insert(y.end(), x.values.begin() + static_cast<std::ptrdiff_t>(s),
               x.values.begin() + static_cast<std::ptrdiff_t>(s + block));
    }
    y.resize(n);
    return leverage_values(y, kmax);
  });
  rep.stderr_.resize(L);
  rep.lo.resize(L);
  rep.hi.resize(L);
  const double B = static_cast<double>(opt.resamples);
  for (std::size_t j = 0; j < L; ++j) {
    double m = 0.0;
    for (const auto& b : boot) m += b[j];
    m /= B;
    double ss = 0.0;
    for (const auto& b : boot) ss += (b[j] - m) * (b[j] - m);
    rep.stderr_[j] = std::sqrt(ss / (B - 1.0));
    rep.lo[j] = rep.estimate[j] - 1.96 * rep.stderr_[j];
    rep.hi[j] = rep.estimate[j] + 1.96 * rep.stderr_[j];
  }
  return rep;
}

HurstEstimate hurst_rs(std::span<const double> x, std::vector<std::size_t> windows) {
  return hurst_impl<true>(x, std::move(windows));
}

namespace serial {

EstimatorReport acf(const ReturnSeries& x, std::size_t kmax, Transform t) { return acf_impl<false>(x, kmax, t); }

HurstEstimate hurst_rs(std::span<const double> x, std::vector<std::size_t> windows) {
  return hurst_impl<false>(x, std::move(windows));
}

}  // namespace serial

}  // namespace mrw::stats
