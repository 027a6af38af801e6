#include "mrwlab/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "mrwlab/cascade.hpp"
#include "mrwlab/error.hpp"
#include "mrwlab/fbm.hpp"
#include "mrwlab/mrw.hpp"
#include "mrwlab/parallel.hpp"
#include "mrwlab/quadrature.hpp"
#include "mrwlab/spectral.hpp"
#include "mrwlab/stats.hpp"

namespace mrw::validation {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Two-sided normal p-value for a Welch statistic.
double welch_p(const MeanSe& a, const MeanSe& b) {
  const double z = (a.mean - b.mean) / std::sqrt(a.se * a.se + b.se * b.se);
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

Verdict kernel_identity(const CheckOptions& opt) {
  core::Rng rng({opt.seed, 1}, core::Domain::generic);
  double worst = 0.0;
  for (double H : {0.6, 0.7, 0.85}) {
    for (int k = 0; k < 20;) {
      double a = rng.uniform(), b = rng.uniform();
      if (a < b) std::swap(a, b);
      if (a - b <= 0.01) continue;
      ++k;
      const double lhs = core::quad(
          [&](core::QuadPoint p) {
            return fbm::kernel_dK(a, p.x, (a - b) + p.from_hi, H) * fbm::kernel_dK(b, p.x, p.from_hi, H);
          },
          {0.0, b, 1.0 - 2.0 * H, H - 1.5}, 1e-9);
      worst = std::max(worst, rel_err(lhs, fbm::identity_constant(H) * std::pow(a - b, 2.0 * H - 2.0)));
    }
  }
  return {"kernel-identity", worst < 1e-3, worst, 1e-3,
          "max rel err over 60 pairs, H in {0.6, 0.7, 0.85}; pass if below threshold", 0.0};
}

Verdict overlap_measure(const CheckOptions& opt) {
  core::Rng rng({opt.seed, 2}, core::Domain::generic);
  const double c = 0.1;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double r = std::exp(std::log(1e-3) * rng.uniform());
    const double u = 1.2 * rng.uniform();
    const double exact = cascade::overlap_measure(u, r, c);
    const double num = cascade::overlap_measure_numeric(u, r, c);
    const double e = exact == 0.0 ? (num == 0.0 ? 0.0 : HUGE_VAL) : rel_err(num, exact);
    worst = std::max(worst, e);
  }
  return {"overlap-measure", worst < 1e-6, worst, 1e-6,
          "max rel err of closed form vs cone quadrature, 50 (u, r); pass if below threshold", 0.0};
}

Verdict cascade_law(const CheckOptions& opt) {
  cascade::CascadeParams p;
  p.c = 0.1;
  p.r = 0.05;
  const cascade::GridSpec g{200, 2.5, 0};
  const std::vector<std::size_t> lags{0, 4, 16, 32, 60, 160};
  const std::size_t R = 500, L = lags.size();
  auto rows = par::replicate<std::vector<double>>(0, R, [&](std::uint64_t rep) {
    const auto w = cascade::sample_field(g, p, {opt.seed, rep});
    const auto q = cascade::q_from_field(w, p);
    std::vector<double> out(L + 2);
    for (std::size_t li = 0; li < L; ++li) {
      double acc = 0.0;
      for (std::size_t i = 0; i + lags[li] <= g.n; ++i) acc += w.values[i] * w.values[i + lags[li]];
      out[li] = acc / static_cast<double>(g.n + 1 - lags[li]);
    }
    for (double v : q.values) {
      out[L] += v;
      out[L + 1] += v * v;
    }
    out[L] /= static_cast<double>(q.values.size());
    out[L + 1] /= static_cast<double>(q.values.size());
    return out;
  });
  auto column = [&](std::size_t j) {
    std::vector<double> v(R);
    for (std::size_t k = 0; k < R; ++k) v[k] = rows[k][j];
    return mean_se(v);
  };
  double worst = 0.0;
  std::ostringstream d;
  const auto m1 = column(L), m2 = column(L + 1);
  const double z1 = std::abs(m1.mean - 1.0) / m1.se;
  const double z2 = std::abs(m2.mean - std::pow(0.05, -0.1)) / m2.se;
  worst = std::max(z1, z2);
  d << "EQ=" << fmt(m1.mean) << " EQ2=" << fmt(m2.mean) << " (want 1.34928);";
  for (std::size_t li = 0; li < L; ++li) {
    const auto m = column(li);
    const double z = std::abs(m.mean - cascade::overlap_measure(static_cast<double>(lags[li]) * g.dt(), p.r, p.c)) / m.se;
    worst = std::max(worst, z);
  }
  d << " max |z| over E Q, E Q^2 and 6 covariance lags; pass if below 5";
  return {"cascade-law", worst < 5.0, worst, 5.0, d.str(), 0.0};
}

Verdict martingale(const CheckOptions& opt) {
  cascade::CascadeParams p;
  p.c = 0.1;
  p.r = 0.02;
  const double rp = 0.1;
  walk::MartingaleOptions mo;
  mo.grid = {200, 2.0, 0};
  mo.lag_steps = {0, 1, 3, 10, 40};
  mo.replications = 2000;
  mo.seed = opt.seed;
  const auto rows = walk::martingale_check(p, rp, mo);
  double worst = 0.0;
  std::size_t printed = 0;
  for (const auto& row : rows) {
    worst = std::max(worst, std::abs(row.fine_coarse - row.coarse_coarse) / row.diff_cc_se);
    // The form with E Q_r Q_r holds where the fine and coarse cone overlaps coincide.
    if (row.lag >= rp - 1e-12) {
      worst = std::max(worst, std::abs(row.fine_coarse - row.fine_fine) / row.diff_ff_se);
      ++printed;
    }
  }
  std::ostringstream d;
  d << "max |z| of E Q_r Q_r' - E Q_r' Q_r' at 5 lags and of E Q_r Q_r' - E Q_r Q_r at " << printed
    << " lags >= r'; pass if below 5";
  return {"martingale", worst < 5.0, worst, 5.0, d.str(), 0.0};
}

Verdict scaling(const CheckOptions& opt) {
  cascade::CascadeParams p;
  p.H = 0.62;
  p.c = 0.1;
  p.r = std::ldexp(1.0, -13);
  p.a_low = 1.0;
  walk::ScalingOptions so;
  so.n = std::size_t{1} << 14;
  so.T = 1.0;
  so.p = 2.0;
  for (int e = -7; e <= -2; ++e) so.h.push_back(std::ldexp(1.0, e));
  so.replications = 200;
  so.seed = opt.seed;
  const auto rep = walk::scaling_exponent(p, SynthesisMode::disjoint, so);
  const double dev = std::abs(rep.exponent - 1.14);
  std::ostringstream d;
  d << "exponent " << fmt(rep.exponent) << " +- " << fmt(rep.exponent_se) << " (model " << fmt(rep.model_exponent)
    << ", 2H - c = " << fmt(rep.target) << "); |exponent - 1.14| must be below 0.05";
  return {"scaling", dev < 0.05, dev, 0.05, d.str(), 0.0};
}

Verdict convergence(const CheckOptions& opt) {
  cascade::CascadeParams p;
  p.H = 0.62;
  p.c = 0.1;
  walk::ConvergenceOptions co;
  co.n = 512;
  co.T = 1.0;
  co.t = 1.0;
  co.refine = 2;
  co.replications = 30000;
  co.seed = opt.seed;
  const std::vector<double> ladder{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  const auto rep = walk::convergence_check(p, ladder, co);
  double worst = HUGE_VAL;
  for (std::size_t j = 0; j < rep.drop.size(); ++j) worst = std::min(worst, rep.drop[j] / rep.drop_se[j]);

  cascade::CascadeParams bad = p;
  bad.c = 0.5;
  bad.allow_condition_violation = true;
  co.replications = 3000;
  co.seed = opt.seed + 1;
  const auto ctl = walk::convergence_check(bad, ladder, co);

  std::ostringstream d;
  d << "min drop/se " << fmt(worst) << " (drops:";
  for (std::size_t j = 0; j < rep.drop.size(); ++j) d << ' ' << fmt(rep.drop[j] / rep.drop_se[j]);
  d << "); control c=0.5 drops/se:";
  for (std::size_t j = 0; j < ctl.drop.size(); ++j) d << ' ' << fmt(ctl.drop[j] / ctl.drop_se[j]);
  d << (ctl.cauchy ? " (control wrongly Cauchy)" : " (control flagged non-Cauchy)");
  d << "; pass if every drop exceeds 5 se and the control is not Cauchy";
  return {"convergence", rep.cauchy && !ctl.cauchy, worst, 5.0, d.str(), 0.0};
}

Verdict mode_consistency(const CheckOptions& opt) {
  cascade::CascadeParams p;
  p.H = 0.62;
  p.c = 0.1;
  p.r = 1.0 / 64;
  const cascade::GridSpec g{256, 1.0, 0};
  bool zeros = true;
  for (double a_low : {1.0, 2.0}) {
    p.a_low = a_low;
    for (double a : walk::correction_coeffs(g, p).a) zeros = zeros && a == 0.0;
  }
  p.a_low = 1.0;
  const std::size_t R = 4000;
  const walk::Synthesizer dep(p, g, SynthesisMode::dependent);
  const walk::Synthesizer dis(p, g, SynthesisMode::disjoint);
  auto moments = [&](const walk::Synthesizer& s, std::uint64_t master) {
    const auto z = par::replicate<double>(0, R, [&](std::uint64_t k) { return s.sample({master, k}).values.back(); });
    std::vector<double> sq(R);
    for (std::size_t k = 0; k < R; ++k) sq[k] = z[k] * z[k];
    return std::pair{mean_se(z), mean_se(sq)};
  };
  const auto [dm, dv] = moments(dep, opt.seed);
  const auto [im, iv] = moments(dis, opt.seed + 1);
  const double p_mean = welch_p(dm, im), p_var = welch_p(dv, iv);
  const double pmin = std::min(p_mean, p_var);
  std::ostringstream d;
  d << "Z(1): mean " << fmt(dm.mean) << " vs " << fmt(im.mean) << " (p=" << fmt(p_mean) << "), E Z^2 "
    << fmt(dv.mean) << " vs " << fmt(iv.mean) << " (p=" << fmt(p_var) << "); coefficients "
    << (zeros ? "all exactly 0" : "NOT all zero") << "; pass if min p above 0.01 and coefficients zero";
  return {"mode-consistency", zeros && pmin > 0.01, pmin, 0.01, d.str(), 0.0};
}

Verdict estimators(const CheckOptions& opt) {
  std::ostringstream d;
  bool pass = true;

  // Noiseless power law.
  stats::EstimatorReport rep;
  for (int k = 1; k <= 100; ++k) {
    rep.k.push_back(k);
    rep.estimate.push_back(std::pow(static_cast<double>(k), -2.1));
  }
  const auto fit = stats::powerlaw_fit(rep, 1, 100);
  const double alpha_err = std::abs(fit.alpha - 2.1);
  pass = pass && alpha_err < 1e-10;
  d << "power-law alpha err " << fmt(alpha_err) << ";";

  // R/S on fGn.
  double worst_h = 0.0;
  for (double H : {0.5, 0.7}) {
    const std::size_t n = std::size_t{1} << 15;
    const auto x = core::StationaryGaussianSampler(fbm::fgn_autocov(n, H, 1.0)).sample({opt.seed, 3});
    const auto est = stats::hurst_rs(x);
    worst_h = std::max(worst_h, std::abs(est.H - H));
    d << " R/S H=" << H << " -> " << fmt(est.H) << ";";
  }
  pass = pass && worst_h < 0.05;

  // Leverage of symmetric iid input.
  stats::ReturnSeries x;
  core::Rng rng({opt.seed, 4}, core::Domain::generic);
  x.values.resize(20000);
  for (double& v : x.values) v = rng.normal();
  stats::LeverageOptions lo;
  lo.resamples = 500;
  lo.seed = opt.seed;
  const auto lev = stats::leverage(x, 50, lo);
  std::size_t inside = 0;
  double max_z = 0.0;
  for (std::size_t j = 0; j < lev.k.size(); ++j) {
    if (lev.lo[j] <= 0.0 && 0.0 <= lev.hi[j]) ++inside;
    max_z = std::max(max_z, std::abs(lev.estimate[j]) / lev.stderr_[j]);
  }
  const double frac = static_cast<double>(inside) / static_cast<double>(lev.k.size());
  pass = pass && frac >= 0.9 && max_z < 4.5;
  d << " leverage: " << inside << "/" << lev.k.size() << " lags cover 0, max |L|/se " << fmt(max_z)
    << "; pass if alpha err < 1e-10, |H err| < 0.05, >= 90% coverage and max |L|/se < 4.5";
  return {"estimators", pass, worst_h, 0.05, d.str(), 0.0};
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"kernel-identity", "overlap-measure", "cascade-law", "martingale",
                                              "scaling",         "convergence",     "mode-consistency",
                                              "estimators"};
  return names;
}

Verdict run_check(const std::string& name, const CheckOptions& opt) {
  static const std::map<std::string, std::function<Verdict(const CheckOptions&)>> table{
      {"kernel-identity", kernel_identity}, {"overlap-measure", overlap_measure},
      {"cascade-law", cascade_law},         {"martingale", martingale},
      {"scaling", scaling},                 {"convergence", convergence},
      {"mode-consistency", mode_consistency}, {"estimators", estimators}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown check '" + name + "'");
  const auto t0 = std::chrono::steady_clock::now();
  auto v = it->second(opt);
  v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return v;
}

}  // namespace mrw::validation
