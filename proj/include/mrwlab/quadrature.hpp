#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <type_traits>
#include <utility>
#include <vector>
#include <algorithm>

#include "mrwlab/error.hpp"

namespace mrw::core {

/// Integration interval.  An endpoint may declare an algebraic singularity
/// f(x) ~ |x - endpoint|^p with p > -1.  Intervals with a declared singularity
/// go to the tanh-sinh rule, which clusters nodes doubly exponentially at both
/// ends and so copes with several mixed powers at once; smooth intervals use
/// adaptive Gauss-Kronrod.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  std::optional<double> lo_power{};
  std::optional<double> hi_power{};
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  unsigned max_depth = 14;  // at most 2^max_depth panels (capped at 2^16)
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// Integrand argument for callers that need the exact distance to an endpoint.
/// Near a declared singular endpoint x itself is rounded, while from_lo and
/// from_hi stay accurate down to the underflow limit.
struct QuadPoint {
  double x;
  double from_lo;
  double from_hi;
};

namespace detail {

template <class F>
double call(F& f, const QuadPoint& p) {
  double v;
  if constexpr (std::is_invocable_v<F&, const QuadPoint&>) {
    v = f(p);
  } else {
    v = f(p.x);
  }
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "integrand not finite at x = " << p.x << " (" << p.from_lo << " from lo, " << p.from_hi
       << " from hi)";
    throw NoConvergence(os.str());
  }
  return v;
}

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const noexcept { return error < o.error; }
};

// One 7/15-point Gauss-Kronrod panel; nodes and weights come from Boost.
template <class G>
Segment gk_panel(G& g, double a, double b, double& abs_sum) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  const auto& xk = kronrod::abscissa();
  const auto& wk = kronrod::weights();
  const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = g(mid);
  double k = wk[0] * f0;
  double gs = wg[0] * f0;
  double l1 = wk[0] * std::abs(f0);
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double f1 = g(mid - half * xk[i]);
    const double f2 = g(mid + half * xk[i]);
    k += wk[i] * (f1 + f2);
    l1 += wk[i] * (std::abs(f1) + std::abs(f2));
    if (i % 2 == 0) gs += wg[i / 2] * (f1 + f2);
  }
  abs_sum = l1 * half;
  return {a, b, k * half, std::abs(k - gs) * half};
}

// Globally adaptive bisection: always split the panel with the largest error.
template <class G>
QuadResult gk_adaptive(G&& g, double a, double b, const QuadOptions& opt) {
  constexpr double kRoundoff = 50.0 * std::numeric_limits<double>::epsilon();
  std::vector<Segment> heap;
  double l1 = 0.0;
  heap.push_back(gk_panel(g, a, b, l1));
  std::vector<double> l1s{l1};
  double value = heap[0].value;
  double error = heap[0].error;
  double abs_total = l1;
  const std::size_t limit = std::size_t{1} << std::min(opt.max_depth, 16u);
  while (true) {
    const double allowed = std::max({opt.rel_tol * std::abs(value), opt.abs_tol, kRoundoff * abs_total});
    if (error <= allowed) break;
    if (heap.size() >= limit) {
      std::ostringstream os;
      os << "on [" << a << ", " << b << "]: estimate " << value << " with error " << error << " > " << allowed
         << " after " << heap.size() << " panels";
      throw NoConvergence(os.str());
    }
    std::pop_heap(heap.begin(), heap.end());
    const Segment worst = heap.back();
    heap.pop_back();
    const double m = 0.5 * (worst.a + worst.b);
    double la = 0.0, lb = 0.0;
    const Segment left = gk_panel(g, worst.a, m, la);
    const Segment right = gk_panel(g, m, worst.b, lb);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    abs_total += la + lb;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
  }
  // re-sum to shed the drift of the running updates
  value = 0.0;
  error = 0.0;
  for (const auto& sgm : heap) {
    value += sgm.value;
    error += sgm.error;
  }
  if (!std::isfinite(value)) throw NoConvergence("non-finite quadrature estimate");
  return {value, error};
}

template <class F>
QuadResult smooth(F& f, double lo, double hi, const QuadOptions& opt) {
  auto g = [&](double x) { return call(f, QuadPoint{x, x - lo, hi - x}); };
  return gk_adaptive(g, lo, hi, opt);
}

template <class F>
QuadResult singular(F& f, double lo, double hi, const QuadOptions& opt) {
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  const double len = hi - lo;
  const double mid = 0.5 * (lo + hi);
  // xc is the signed distance to the nearer endpoint, exact even where x rounds onto it.
  auto g = [&](double x, double xc) {
    const QuadPoint p = x < mid ? QuadPoint{x, -xc, len + xc} : QuadPoint{x, len - xc, xc};
    return call(f, p);
  };
  double err = 0.0;
  double l1 = 0.0;
  double v = 0.0;
  double allowed = 0.0;
  // The rule's stopping test occasionally fires early at loose tolerances, so
  // retry with a tighter request before giving up.
  for (double req = opt.rel_tol; ; req *= 1e-2) {
    try {
      v = rule.integrate(g, lo, hi, req, &err, &l1);
    } catch (const NoConvergence&) {
      throw;
    } catch (const std::exception& e) {
      throw NoConvergence(e.what());
    }
    allowed = std::max(opt.rel_tol * std::max(std::abs(v), l1), opt.abs_tol);
    const bool ok = std::isfinite(v) && err <= allowed * 4.0 + std::numeric_limits<double>::min();
    if (ok) break;
    if (req < 1e-13 || !std::isfinite(v)) {
      std::ostringstream os;
      os << "on [" << lo << ", " << hi << "]: estimate " << v << " with error " << err << " > " << allowed;
      throw NoConvergence(os.str());
    }
  }
  return {v, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature with optional endpoint power
/// transforms.  Throws NoConvergence when the error estimate stays above tolerance.
template <class F>
QuadResult quad_detailed(F&& f, const Interval& iv, const QuadOptions& opt = {}) {
  if (iv.hi == iv.lo) return {0.0, 0.0};
  if (iv.hi < iv.lo) {
    auto r = quad_detailed(f, Interval{iv.hi, iv.lo, iv.hi_power, iv.lo_power}, opt);
    return {-r.value, r.error};
  }
  for (auto p : {iv.lo_power, iv.hi_power})
    if (p && !(*p > -1.0)) throw DomainError("declared endpoint power must exceed -1");

  if (iv.lo_power || iv.hi_power) return detail::singular(f, iv.lo, iv.hi, opt);
  return detail::smooth(f, iv.lo, iv.hi, opt);
}

template <class F>
double quad(F&& f, const Interval& iv, double rel_tol = 1e-10) {
  QuadOptions opt;
  opt.rel_tol = rel_tol;
  return quad_detailed(std::forward<F>(f), iv, opt).value;
}

/// Iterated integral  int_outer dx int_{inner(x)} f(x, y) dy.  `inner` maps x to
/// an Interval in y.  The inner rule runs at a tolerance ten times tighter.
template <class F, class InnerBounds>
double quad2d(F&& f, const Interval& outer, InnerBounds&& inner, double rel_tol = 1e-9) {
  QuadOptions inner_opt;
  inner_opt.rel_tol = rel_tol * 0.1;
  auto g = [&](double x) {
    const Interval iy = inner(x);
    if (!(iy.hi > iy.lo)) return 0.0;
    return quad_detailed([&](double y) { return f(x, y); }, iy, inner_opt).value;
  };
  QuadOptions outer_opt;
  outer_opt.rel_tol = rel_tol;
  return quad_detailed(g, outer, outer_opt).value;
}

}  // namespace mrw::core
