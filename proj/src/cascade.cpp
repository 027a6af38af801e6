#include "mrwlab/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrwlab/error.hpp"
#include "mrwlab/fbm.hpp"
#include "mrwlab/parallel.hpp"
#include "mrwlab/quadrature.hpp"

namespace mrw::cascade {

double CascadeParams::shared_strip_mass() const noexcept {
  return std::max(0.0, c * (1.0 / strip_low() - 1.0));
}

void CascadeParams::validate() const {
  std::ostringstream os;
  if (!(c > 0.0)) {
    os << "intensity c must be positive, got " << c;
    throw DomainError(os.str());
  }
  if (!(r > 0.0 && r < 1.0)) {
    os << "cutoff r must lie in (0, 1), got " << r;
    throw DomainError(os.str());
  }
  fbm::Hurst{H};
  if (!(strip_low() > 0.0)) {
    os << "strip bound a_low must be positive, got " << strip_low();
    throw DomainError(os.str());
  }
  if (!(c < 2.0 * H - 1.0) && !allow_condition_violation) {
    os << "convergence condition c < 2H - 1 fails (c = " << c << ", H = " << H << ")";
    throw ConditionViolated(os.str());
  }
  if (shared_strip_mass() > 1.0) {
    os << "strip levels (a_low, 1] carry mass " << shared_strip_mass()
       << " > 1 per unit time; raise a_low to at least c / (1 + c)";
    throw ConfigError(os.str());
  }
}

double phi(double q) noexcept { return -0.5 * q * (q - 1.0); }

double overlap_measure(double u, double r, double c) noexcept {
  u = std::abs(u);
  if (u >= 1.0) return 0.0;
  if (u >= r) return c * (u - 1.0 - std::log(u));
  return c * (std::log(1.0 / r) + u - u / r);
}

double overlap_measure_numeric(double u, double r, double c, double rel_tol) {
  u = std::abs(u);
  auto density = [c](double rp, double) { return c / (rp * rp); };
  auto slice = [u](double rp) {
    return core::Interval{std::max(-rp / 2, u - rp / 2), std::min(rp / 2, u + rp / 2)};
  };
  if (u >= 1.0) return 0.0;
  // the slice width has a kink where the cones start to overlap (r' = u)
  const double lo = std::max(r, u);
  return core::quad2d(density, {lo, 1.0}, slice, rel_tol);
}

double cascade_cov(double t, double s, const CascadeParams& p) noexcept {
  return std::exp(-phi(2.0) * overlap_measure(std::abs(t - s), p.r, p.c));
}

namespace {

constexpr double kMaxLevelRatio = 1.189207115002721;  // 2^(1/4)

std::vector<double> make_level_bounds(std::vector<double> required) {
  std::sort(required.begin(), required.end());
  std::vector<double> pts;
  for (double v : required)
    if (pts.empty() || v > pts.back() * (1.0 + 1e-12)) pts.push_back(v);
  std::vector<double> out{pts.front()};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double a = pts[i - 1], b = pts[i];
    const auto m = static_cast<int>(std::ceil(std::log(b / a) / std::log(kMaxLevelRatio) - 1e-9));
    for (int j = 1; j < m; ++j) out.push_back(a * std::pow(b / a, static_cast<double>(j) / m));
    out.push_back(b);
  }
  return out;
}

std::size_t level_index(const std::vector<double>& bounds, double v) {
  for (std::size_t k = 0; k < bounds.size(); ++k)
    if (std::abs(bounds[k] - v) <= 1e-12 * v) return k;
  throw ConfigError("internal: level bound not found");
}

}  // namespace

FieldGrid::FieldGrid(const GridSpec& grid, double c, std::vector<double> cutoffs,
                     std::optional<double> strip_low)
    : grid_(grid), c_(c), cutoffs_(std::move(cutoffs)), strip_low_(strip_low) {
  if (grid_.n < 1 || !(grid_.T > 0.0)) throw ConfigError("grid needs n >= 1 and T > 0");
  if (cutoffs_.empty()) throw ConfigError("field grid needs at least one cutoff");
  for (double r : cutoffs_)
    if (!(r > 0.0 && r < 1.0)) throw DomainError("cutoffs must lie in (0, 1)");
  if (!(c_ > 0.0)) throw DomainError("intensity c must be positive");

  const double dt = grid_.dt();
  const double r_min = *std::min_element(cutoffs_.begin(), cutoffs_.end());
  refine_ = grid_.refine;
  if (refine_ == 0) refine_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dt / (r_min / 16.0) - 1e-9)));
  delta_ = dt / static_cast<double>(refine_);
  if (delta_ > r_min / 2.0) {
    std::ostringstream os;
    os << "field cell width " << delta_ << " exceeds half the smallest cutoff " << r_min;
    throw ResolutionTooCoarse(os.str());
  }
  pad_ = static_cast<std::size_t>(std::ceil(0.5 / delta_ - 1e-9));
  cells_ = 2 * pad_ + grid_.n * refine_;

  std::vector<double> required = cutoffs_;
  required.push_back(1.0);
  if (strip_low_ && *strip_low_ < 1.0) required.push_back(*strip_low_);
  bounds_ = make_level_bounds(required);

  const std::size_t m = bounds_.size() - 1;
  level_var_.resize(m);
  level_half_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lo = bounds_[k], hi = bounds_[k + 1];
    const double mass = c_ * (1.0 / lo - 1.0 / hi);
    level_var_[k] = delta_ * mass;
    const double width = std::log(hi / lo) / (1.0 / lo - 1.0 / hi);
    level_half_[k] = static_cast<std::size_t>(std::floor(width / (2.0 * delta_) + 0.5));
  }
  for (double r : cutoffs_) first_level_.push_back(level_index(bounds_, r));

  if (strip_low_) {
    if (!(*strip_low_ > 0.0)) throw DomainError("strip bound must be positive");
    strip_first_level_ = *strip_low_ < 1.0 ? level_index(bounds_, *strip_low_) : m;
    for (std::size_t k = strip_first_level_; k < m; ++k)
      strip_shared_var_ += level_var_[k] * static_cast<double>(refine_);
    if (strip_shared_var_ > dt * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "strip levels carry variance " << strip_shared_var_ << " per step, more than dt = " << dt;
      throw ConfigError(os.str());
    }
  }
}

double FieldGrid::cone_variance(std::size_t cutoff) const { return cone_covariance(cutoff, cutoff, 0); }

double FieldGrid::cone_covariance(std::size_t a, std::size_t b, std::size_t lag_steps) const {
  const std::size_t from = std::max(first_level_.at(a), first_level_.at(b));
  const double lag_cells = static_cast<double>(lag_steps * refine_);
  double acc = 0.0;
  for (std::size_t k = from; k < level_var_.size(); ++k) {
    const double overlap = 2.0 * static_cast<double>(level_half_[k]) - lag_cells;
    if (overlap > 0.0) acc += level_var_[k] * overlap;
  }
  return acc;
}

template <bool Parallel>
FieldGrid::Sample FieldGrid::sample_impl(const core::SeedSpec& seed) const {
  const std::size_t n = grid_.n;
  Sample out;
  out.w.assign(cutoffs_.size(), std::vector<double>(n + 1, 0.0));
  if (strip_low_) out.strip.assign(n, 0.0);

  const core::StreamKey key(seed, core::Domain::field);
  const std::size_t pairs = (cells_ + 1) / 2;
  std::vector<double> z(2 * pairs);
  std::vector<double> prefix(cells_ + 1);
  const long long npairs = static_cast<long long>(pairs);
  const long long npts = static_cast<long long>(n + 1);

  for (std::size_t k = 0; k < level_var_.size(); ++k) {
    const double sd = std::sqrt(level_var_[k]);
    const std::uint64_t base = static_cast<std::uint64_t>(k) * pairs;
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) if (Parallel)
    for (long long j = 0; j < npairs; ++j) {
      const auto [a, b] = key.normal_pair(base + static_cast<std::uint64_t>(j));
      z[2 * j] = sd * a;
      z[2 * j + 1] = sd * b;
    }
    prefix[0] = 0.0;
    for (std::size_t j = 0; j < cells_; ++j) prefix[j + 1] = prefix[j] + z[j];

    const std::size_t h = level_half_[k];
    for (std::size_t ci = 0; ci < cutoffs_.size(); ++ci) {
      if (k < first_level_[ci]) continue;
      double* w = out.w[ci].data();
#pragma omp parallel for schedule(static) num_threads(par::max_threads()) if (Parallel)
      for (long long i = 0; i < npts; ++i) {
        const std::size_t idx = pad_ + static_cast<std::size_t>(i) * refine_;
        w[i] += prefix[idx + h] - prefix[idx - h];
      }
    }
    if (strip_low_ && k >= strip_first_level_) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = pad_ + i * refine_;
        out.strip[i] += prefix[idx + refine_] - prefix[idx];
      }
    }
  }

  if (strip_low_) {
    const double topup = std::max(0.0, grid_.dt() - strip_shared_var_);
    if (topup > 0.0) {
      const double sd = std::sqrt(topup);
      const core::StreamKey tk(seed, core::Domain::strip_topup);
      for (std::size_t i = 0; i < n; ++i) {
        const auto [a, b] = tk.normal_pair(i / 2);
        out.strip[i] += sd * (i % 2 == 0 ? a : b);
      }
    }
  }
  return out;
}

FieldGrid::Sample FieldGrid::sample(const core::SeedSpec& seed) const { return sample_impl<true>(seed); }
FieldGrid::Sample FieldGrid::sample_serial(const core::SeedSpec& seed) const { return sample_impl<false>(seed); }

namespace {

void require_resolution(const GridSpec& grid, double r) {
  if (grid.dt() > r / 2.0) {
    std::ostringstream os;
    os << "grid step " << grid.dt() << " exceeds r/2 = " << r / 2.0;
    throw ResolutionTooCoarse(os.str());
  }
}

Path field_path(const GridSpec& grid, const CascadeParams& p, const core::SeedSpec& seed,
                std::vector<double> values, double variance, double r) {
  Path out;
  out.dt = grid.dt();
  out.values = std::move(values);
  out.meta.kind = PathKind::field;
  out.meta.H = p.H;
  out.meta.r = r;
  out.meta.c = p.c;
  out.meta.seed = seed;
  out.meta.field_variance = variance;
  return out;
}

}  // namespace

Path sample_field(const GridSpec& grid, const CascadeParams& p, const core::SeedSpec& seed) {
  p.validate();
  require_resolution(grid, p.r);
  const FieldGrid fg(grid, p.c, {p.r});
  auto s = fg.sample(seed);
  return field_path(grid, p, seed, std::move(s.w[0]), fg.cone_variance(0), p.r);
}

namespace {

std::vector<double> spectral_autocov(const GridSpec& grid, const CascadeParams& p) {
  const double dt = grid.dt();
  const auto unit = static_cast<std::size_t>(std::ceil(1.0 / dt)) + 2;
  const std::size_t len = std::max(grid.n + 1, unit);
  std::vector<double> g(len);
  for (std::size_t k = 0; k < len; ++k) g[k] = overlap_measure(static_cast<double>(k) * dt, p.r, p.c);
  return g;
}

}  // namespace

SpectralFieldSampler::SpectralFieldSampler(const GridSpec& grid, const CascadeParams& p)
    : grid_(grid), params_(p), sampler_((p.validate(), require_resolution(grid, p.r), spectral_autocov(grid, p))) {}

Path SpectralFieldSampler::sample(const core::SeedSpec& seed) const {
  auto v = sampler_.sample(seed, core::Domain::spectral_field);
  v.resize(grid_.n + 1);
  return field_path(grid_, params_, seed, std::move(v), overlap_measure(0.0, params_.r, params_.c), params_.r);
}

Path sample_field_spectral(const GridSpec& grid, const CascadeParams& p, const core::SeedSpec& seed) {
  return SpectralFieldSampler(grid, p).sample(seed);
}

Path q_from_field(const Path& field, const CascadeParams& p) {
  const double var =
      std::isfinite(field.meta.field_variance) ? field.meta.field_variance : overlap_measure(0.0, p.r, p.c);
  Path q = field;
  for (double& v : q.values) v = std::exp(v - 0.5 * var);
  q.meta.kind = PathKind::cascade;
  return q;
}

std::pair<Path, Path> sample_joint_scales(const GridSpec& grid, const CascadeParams& p, double r_prime,
                                          const core::SeedSpec& seed) {
  p.validate();
  if (!(r_prime >= p.r && r_prime < 1.0)) throw DomainError("need r <= r' < 1");
  require_resolution(grid, p.r);
  const FieldGrid fg(grid, p.c, {p.r, r_prime});
  auto s = fg.sample(seed);
  const auto fine = field_path(grid, p, seed, std::move(s.w[0]), fg.cone_variance(0), p.r);
  const auto coarse = field_path(grid, p, seed, std::move(s.w[1]), fg.cone_variance(1), r_prime);
  return {q_from_field(fine, p), q_from_field(coarse, p)};
}

}  // namespace mrw::cascade
