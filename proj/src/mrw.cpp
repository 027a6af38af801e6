#include "mrwlab/mrw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mrwlab/error.hpp"
#include "mrwlab/parallel.hpp"
#include "mrwlab/quadrature.hpp"

namespace mrw::walk {

using cascade::FieldGrid;
using core::Interval;
using core::QuadPoint;

std::string to_string(CorrectionSign s) {
  switch (s) {
    case CorrectionSign::minus: return "minus";
    case CorrectionSign::plus: return "plus";
    case CorrectionSign::none: return "none";
  }
  return "minus";
}

CorrectionSign correction_sign_from_string(const std::string& s) {
  if (s == "minus" || s == "-") return CorrectionSign::minus;
  if (s == "plus" || s == "+") return CorrectionSign::plus;
  if (s == "none" || s == "0") return CorrectionSign::none;
  throw ConfigError("unknown correction sign '" + s + "' (expected minus, plus or none)");
}

namespace {

double sign_factor(CorrectionSign s) {
  switch (s) {
    case CorrectionSign::minus: return -1.0;
    case CorrectionSign::plus: return 1.0;
    case CorrectionSign::none: return 0.0;
  }
  return -1.0;
}

void require_resolution(const GridSpec& grid, double r) {
  if (grid.n < 1) throw ConfigError("path needs at least one step");
  if (!(grid.T > 0.0)) throw ConfigError("horizon must be positive");
  if (grid.dt() > 0.5 * r) {
    std::ostringstream os;
    os << "step " << grid.dt() << " exceeds r/2 = " << 0.5 * r;
    throw ResolutionTooCoarse(os.str());
  }
}

// The three pieces of the a_i integral: the shrinking-width band left of t_i,
// the plateau where the cone width is pinned at L, and the step itself.
double coeff_impl(std::size_t i, double dt, const CascadeParams& p, const fbm::VolterraKernel& K, double tol) {
  const double L = std::max(p.r, p.strip_low());
  if (L >= 1.0) return 0.0;
  const double mu_flat = p.c * (1.0 / L - 1.0);
  const double ti = static_cast<double>(i) * dt;
  const double ti1 = static_cast<double>(i + 1) * dt;
  const double sing_lo = 0.5 - p.H;  // K(t, s) ~ s^(1/2-H) near s = 0
  const double sing_hi = p.H - 0.5;  // K(t, s) ~ (t-s)^(H-1/2) near s = t

  auto kappa = [&](double s) { return K(ti1, s) - K(ti, s); };
  double total = 0.0;

  const double band_hi = ti - 0.5 * L;
  const double band_lo = std::max(0.0, ti - 0.5);
  if (band_hi > band_lo) {
    Interval iv{band_lo, band_hi};
    if (band_lo == 0.0) iv.lo_power = sing_lo;
    total += core::quad(
        [&](const QuadPoint& q) { return kappa(q.x) * p.c * (0.5 / (ti - q.x) - 1.0); }, iv, tol);
  }

  const double flat_lo = std::max(0.0, band_hi);
  if (ti > flat_lo) {
    Interval iv{flat_lo, ti};
    if (flat_lo == 0.0) iv.lo_power = sing_lo;
    iv.hi_power = sing_hi;
    // hi = t_i, so from_hi is the exact gap to the kink of K(t_i, .)
    total += mu_flat * core::quad([&](const QuadPoint& q) { return K(ti1, q.x) - K(ti, q.x, q.from_hi); }, iv, tol);
  }

  Interval step{ti, ti1};
  if (i == 0) step.lo_power = sing_lo;
  step.hi_power = sing_hi;
  total += mu_flat * core::quad([&](const QuadPoint& q) { return K(ti1, q.x, q.from_hi); }, step, tol);
  return total;
}

CorrectionTable make_table(const GridSpec& grid, const CascadeParams& p, double rel_tol, bool parallel) {
  p.validate();
  require_resolution(grid, p.r);
  CorrectionTable t;
  t.rel_tol = rel_tol;
  t.params = p;
  t.grid = grid;
  t.a.assign(grid.n, 0.0);
  if (p.is_disjoint() || p.r >= 1.0) return t;
  const fbm::VolterraKernel K(p.H);
  const double dt = grid.dt();
  const long long n = static_cast<long long>(grid.n);
  par::ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic, 8) num_threads(par::max_threads()) if (parallel)
  for (long long i = 0; i < n; ++i) {
    trap.run([&] { t.a[i] = coeff_impl(static_cast<std::size_t>(i), dt, p, K, rel_tol); });
  }
  trap.rethrow();
  return t;
}

}  // namespace

double correction_coeff(std::size_t i, const GridSpec& grid, const CascadeParams& p, double rel_tol) {
  p.validate();
  require_resolution(grid, p.r);
  if (i >= grid.n) throw ConfigError("correction index beyond the grid");
  if (p.is_disjoint()) return 0.0;
  return coeff_impl(i, grid.dt(), p, fbm::VolterraKernel(p.H), rel_tol);
}

CorrectionTable correction_coeffs(const GridSpec& grid, const CascadeParams& p, double rel_tol) {
  return make_table(grid, p, rel_tol, true);
}

namespace serial {
CorrectionTable correction_coeffs(const GridSpec& grid, const CascadeParams& p, double rel_tol) {
  return make_table(grid, p, rel_tol, false);
}
}  // namespace serial

struct Synthesizer::Engines {
  std::optional<cascade::SpectralFieldSampler> spectral;
  std::optional<fbm::FbmSampler> fgn;
  std::optional<FieldGrid> field;
  std::optional<fbm::VolterraFbm> volterra;
  double field_var = 0.0;
};

Synthesizer::Synthesizer(const CascadeParams& p, const GridSpec& grid, SynthesisMode mode, SynthesisOptions opt)
    : params_(p), grid_(grid), mode_(mode), opt_(opt), eng_(std::make_unique<Engines>()) {
  p.validate();
  require_resolution(grid, p.r);
  if (opt.refine) grid_.refine = opt.refine;
  if (mode == SynthesisMode::disjoint) {
    eng_->spectral.emplace(grid_, p);
    eng_->fgn.emplace(grid_.n, grid_.T, p.H);
    table_.params = p;
    table_.grid = grid_;
    table_.a.assign(grid_.n, 0.0);
    return;
  }
  fbm::Hurst(p.H).require_long_memory();
  eng_->field.emplace(grid_, p.c, std::vector<double>{p.r}, p.strip_low());
  eng_->field_var = eng_->field->cone_variance(0);
  eng_->volterra.emplace(grid_.n, grid_.T, p.H);
  table_ = correction_coeffs(grid_, p);
}

Synthesizer::~Synthesizer() = default;
Synthesizer::Synthesizer(Synthesizer&&) noexcept = default;

SynthesisParts Synthesizer::sample_parts(const core::SeedSpec& seed) const {
  SynthesisParts out;
  const std::size_t n = grid_.n;
  double var;
  std::vector<double> w;
  if (mode_ == SynthesisMode::disjoint) {
    auto f = eng_->spectral->sample(seed);
    var = f.meta.field_variance;
    w = std::move(f.values);
    out.dB = eng_->fgn->increments(seed);
  } else {
    auto s = eng_->field->sample(seed);
    var = eng_->field_var;
    w = std::move(s.w[0]);
    out.dB = eng_->volterra->increments(s.strip);
  }

  out.q.dt = grid_.dt();
  out.q.values.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.q.values[i] = std::exp(w[i] - 0.5 * var);
  out.q.meta.kind = PathKind::cascade;
  out.q.meta.H = params_.H;
  out.q.meta.r = params_.r;
  out.q.meta.c = params_.c;
  out.q.meta.seed = seed;
  out.q.meta.field_variance = var;

  const double sgn = sign_factor(opt_.sign);
  out.z.dt = grid_.dt();
  out.z.values.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double qi = out.q.values[i];
    out.z.values[i + 1] = out.z.values[i] + qi * (out.dB[i] + sgn * table_.a[i]);
  }
  out.z.meta.kind = PathKind::mrw;
  out.z.meta.H = params_.H;
  out.z.meta.r = params_.r;
  out.z.meta.c = params_.c;
  out.z.meta.seed = seed;
  out.z.meta.mode = mode_;
  return out;
}

Path Synthesizer::sample(const core::SeedSpec& seed) const { return sample_parts(seed).z; }

Path synthesize(const CascadeParams& p, std::size_t n, double T, SynthesisMode mode, const core::SeedSpec& seed,
                SynthesisOptions opt) {
  return Synthesizer(p, GridSpec{n, T, opt.refine}, mode, opt).sample(seed);
}

double disjoint_second_moment(double h, const CascadeParams& p) {
  p.validate();
  if (!(h > 0.0)) throw DomainError("lag must be positive");
  const double alpha = fbm::identity_constant(p.H);
  auto f = [&](double u) {
    return 2.0 * (h - u) * alpha * std::pow(u, 2.0 * p.H - 2.0) * std::exp(cascade::overlap_measure(u, p.r, p.c));
  };
  // Kinks of m_r at u = r and u = 1.
  double total = 0.0;
  const double b1 = std::min(p.r, h);
  total += core::quad(f, Interval{0.0, b1, 2.0 * p.H - 2.0, std::nullopt});
  if (h > p.r) total += core::quad(f, Interval{p.r, std::min(1.0, h)});
  if (h > 1.0) total += core::quad(f, Interval{1.0, h});
  return total;
}

double disjoint_second_moment_discrete(std::size_t k, double dt, const CascadeParams& p) {
  p.validate();
  if (k == 0) return 0.0;
  const auto g = fbm::fgn_autocov(k, p.H, dt);
  double total = static_cast<double>(k) * g[0] * std::exp(cascade::overlap_measure(0.0, p.r, p.c));
  for (std::size_t l = 1; l < k; ++l) {
    const double m = cascade::overlap_measure(static_cast<double>(l) * dt, p.r, p.c);
    total += 2.0 * static_cast<double>(k - l) * g[l] * std::exp(m);
  }
  return total;
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

// Least-squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

ConvergenceReport convergence_check(const CascadeParams& p, std::vector<double> ladder,
                                    const ConvergenceOptions& opt) {
  p.validate();
  if (ladder.size() < 3) throw ConfigError("convergence ladder needs at least three cutoffs");
  for (std::size_t j = 0; j < ladder.size(); ++j) {
    if (!(ladder[j] > 0.0 && ladder[j] < 1.0)) throw DomainError("ladder cutoffs must lie in (0, 1)");
    if (j > 0 && !(ladder[j] <= ladder[j - 1])) throw ConfigError("ladder must be nonincreasing");
  }
  if (opt.replications < 2) throw ConfigError("convergence check needs at least two replications");
  const GridSpec grid{opt.n, opt.T, opt.refine};
  require_resolution(grid, ladder.back());
  const double dt = grid.dt();
  const auto k = static_cast<std::size_t>(std::llround(opt.t / dt));
  if (k < 1 || k > grid.n) throw ConfigError("evaluation time outside the grid");

  const std::size_t J = ladder.size();
  const FieldGrid fg(grid, p.c, ladder, p.strip_low());
  const fbm::VolterraFbm volterra(grid.n, grid.T, p.H);
  std::vector<double> var(J);
  std::vector<std::vector<double>> a(J);
  const double sgn = sign_factor(opt.sign);
  for (std::size_t j = 0; j < J; ++j) {
    var[j] = fg.cone_variance(j);
    CascadeParams pj = p;
    pj.r = ladder[j];
    if (sgn != 0.0 && !p.is_disjoint()) a[j] = correction_coeffs(grid, pj).a;
    else a[j].assign(grid.n, 0.0);
  }

  // Per replication: Z_{r_j}(t) for every cutoff from one shared draw.
  auto z = par::replicate<std::vector<double>>(0, opt.replications, [&](std::uint64_t idx) {
    const core::SeedSpec seed{opt.seed, idx};
    const auto s = fg.sample_serial(seed);
    const auto dB = volterra.increments(s.strip);
    std::vector<double> out(J, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += std::exp(s.w[j][i] - 0.5 * var[j]) * (dB[i] + sgn * a[j][i]);
      out[j] = acc;
    }
    return out;
  });

  const std::size_t R = opt.replications;
  ConvergenceReport rep;
  rep.ladder = ladder;
  std::vector<std::vector<double>> d2(J - 1, std::vector<double>(R));
  for (std::size_t m = 0; m < R; ++m)
    for (std::size_t j = 0; j + 1 < J; ++j) {
      const double d = z[m][j] - z[m][j + 1];
      d2[j][m] = d * d;
    }
  for (std::size_t j = 0; j + 1 < J; ++j) {
    const auto ms = mean_se(d2[j]);
    rep.msd.push_back(ms.mean);
    rep.msd_se.push_back(ms.se);
  }
  auto paired = [&](std::size_t a0, std::size_t b0) {
    std::vector<double> diff(R);
    for (std::size_t m = 0; m < R; ++m) diff[m] = d2[a0][m] - d2[b0][m];
    return mean_se(diff);
  };
  rep.cauchy = true;
  rep.trend = true;
  for (std::size_t j = 0; j + 2 < J; ++j) {
    const auto ms = paired(j, j + 1);
    rep.drop.push_back(ms.mean);
    rep.drop_se.push_back(ms.se);
    if (!(ms.mean > 0.0)) rep.trend = false;
    if (!(ms.mean > 5.0 * ms.se)) rep.cauchy = false;
  }
  const auto tot = paired(0, J - 2);
  rep.total_drop = tot.mean;
  rep.total_drop_se = tot.se;
  if (!(tot.mean > 5.0 * tot.se)) rep.trend = false;
  return rep;
}

ScalingReport scaling_exponent(const CascadeParams& p, SynthesisMode mode, const ScalingOptions& opt) {
  if (opt.h.size() < 2) throw TooFewPoints("scaling fit needs at least two lags");
  if (opt.replications < 2) throw ConfigError("scaling fit needs at least two replications");
  if (!(opt.p > 0.0)) throw DomainError("moment order must be positive");
  const GridSpec grid{opt.n, opt.T, opt.synthesis.refine};
  const double dt = grid.dt();
  std::vector<std::size_t> steps;
  for (double h : opt.h) {
    const double k = h / dt;
    const auto kk = static_cast<std::size_t>(std::llround(k));
    if (kk < 1 || std::abs(k - static_cast<double>(kk)) > 1e-9 * k || kk >= grid.n) {
      std::ostringstream os;
      os << "lag " << h << " is not a positive multiple of dt = " << dt << " inside the horizon";
      throw ConfigError(os.str());
    }
    steps.push_back(kk);
  }
  const Synthesizer synth(p, grid, mode, opt.synthesis);
  const std::size_t L = steps.size();
  const std::size_t R = opt.replications;

  // Per replication: increment moments averaged over all overlapping windows.
  auto m = par::replicate<std::vector<double>>(0, R, [&](std::uint64_t idx) {
    const auto z = synth.sample(core::SeedSpec{opt.seed, idx});
    std::vector<double> out(L);
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t k = steps[l];
      double acc = 0.0;
      for (std::size_t i = 0; i + k <= grid.n; ++i) acc += std::pow(std::abs(z.values[i + k] - z.values[i]), opt.p);
      out[l] = acc / static_cast<double>(grid.n - k + 1);
    }
    return out;
  });

  ScalingReport rep;
  rep.h = opt.h;
  std::vector<double> logh(L), total(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    logh[l] = std::log(opt.h[l]);
    std::vector<double> col(R);
    for (std::size_t r = 0; r < R; ++r) col[r] = m[r][l];
    const auto ms = mean_se(col);
    rep.moment.push_back(ms.mean);
    rep.moment_se.push_back(ms.se);
    total[l] = ms.mean * static_cast<double>(R);
  }
  auto fit = [&](const std::vector<double>& mom) {
    std::vector<double> y(L);
    for (std::size_t l = 0; l < L; ++l) {
      if (!(mom[l] > 0.0)) throw DegenerateVariance("nonpositive increment moment in scaling fit");
      y[l] = std::log(mom[l]);
    }
    return ols_slope(logh, y);
  };
  rep.exponent = fit(rep.moment);

  std::vector<double> jack(R);
  for (std::size_t r = 0; r < R; ++r) {
    std::vector<double> mom(L);
    for (std::size_t l = 0; l < L; ++l) mom[l] = (total[l] - m[r][l]) / static_cast<double>(R - 1);
    jack[r] = fit(mom);
  }
  const double jm = std::accumulate(jack.begin(), jack.end(), 0.0) / static_cast<double>(R);
  double ss = 0.0;
  for (double v : jack) ss += (v - jm) * (v - jm);
  rep.exponent_se = std::sqrt(ss * static_cast<double>(R - 1) / static_cast<double>(R));

  rep.target = opt.p * p.H + p.c * cascade::phi(opt.p);
  rep.exact_scaling = mode == SynthesisMode::disjoint;
  if (opt.p == 2.0 && mode == SynthesisMode::disjoint) {
    std::vector<double> mom(L);
    for (std::size_t l = 0; l < L; ++l) mom[l] = disjoint_second_moment_discrete(steps[l], dt, p);
    rep.model_exponent = fit(mom);
  } else {
    rep.model_exponent = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

std::vector<MartingaleRow> martingale_check(const CascadeParams& p, double r_prime, const MartingaleOptions& opt) {
  p.validate();
  if (!(r_prime > p.r && r_prime < 1.0)) throw DomainError("need r < r' < 1");
  if (opt.replications < 2) throw ConfigError("martingale check needs at least two replications");
  require_resolution(opt.grid, p.r);
  const FieldGrid fg(opt.grid, p.c, {p.r, r_prime});
  const double vf = fg.cone_variance(0);
  const double vc = fg.cone_variance(1);
  const std::size_t n = opt.grid.n;
  const std::size_t L = opt.lag_steps.size();
  for (auto k : opt.lag_steps)
    if (k > n) throw ConfigError("martingale lag beyond the grid");

  // Per replication and lag: window averages of the three products.
  auto prod = par::replicate<std::vector<double>>(0, opt.replications, [&](std::uint64_t idx) {
    const auto s = fg.sample_serial(core::SeedSpec{opt.seed, idx});
    std::vector<double> qf(n + 1), qc(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      qf[i] = std::exp(s.w[0][i] - 0.5 * vf);
      qc[i] = std::exp(s.w[1][i] - 0.5 * vc);
    }
    std::vector<double> out(3 * L);
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t k = opt.lag_steps[l];
      double fc = 0.0, cc = 0.0, ff = 0.0;
      for (std::size_t i = 0; i + k <= n; ++i) {
        fc += qf[i] * qc[i + k];
        cc += qc[i] * qc[i + k];
        ff += qf[i] * qf[i + k];
      }
      const double w = static_cast<double>(n - k + 1);
      out[3 * l] = fc / w;
      out[3 * l + 1] = cc / w;
      out[3 * l + 2] = ff / w;
    }
    return out;
  });

  std::vector<MartingaleRow> rows;
  const std::size_t R = opt.replications;
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> fc(R), cc(R), dcc(R), dff(R);
    double ff = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      fc[r] = prod[r][3 * l];
      cc[r] = prod[r][3 * l + 1];
      dcc[r] = prod[r][3 * l] - prod[r][3 * l + 1];
      dff[r] = prod[r][3 * l] - prod[r][3 * l + 2];
      ff += prod[r][3 * l + 2];
    }
    MartingaleRow row;
    row.lag = static_cast<double>(opt.lag_steps[l]) * opt.grid.dt();
    row.fine_coarse = mean_se(fc).mean;
    const auto ccs = mean_se(cc);
    row.coarse_coarse = ccs.mean;
    row.coarse_se = ccs.se;
    row.fine_fine = ff / static_cast<double>(R);
    row.diff_cc_se = mean_se(dcc).se;
    row.diff_ff_se = mean_se(dff).se;
    row.exact = std::exp(cascade::overlap_measure(row.lag, r_prime, p.c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mrw::walk
