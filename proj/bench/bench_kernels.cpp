// Serial reference vs OpenMP kernel, pairwise.  Worker count follows
// MRW_LAB_THREADS (or the OpenMP default).
#include <benchmark/benchmark.h>

#include <vector>

#include "mrwlab/cascade.hpp"
#include "mrwlab/fbm.hpp"
#include "mrwlab/mrw.hpp"
#include "mrwlab/rng.hpp"
#include "mrwlab/stats.hpp"

using namespace mrw;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  core::Rng rng({seed, 0}, core::Domain::generic);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

stats::ReturnSeries series(std::size_t n) {
  stats::ReturnSeries s;
  s.values = noise(n, 2);
  return s;
}

template <bool Parallel>
void volterra_direct(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto dW = noise(n, 1);
  for (auto _ : st) {
    auto out = Parallel ? fbm::volterra_direct(dW, 1.0 / n, 0.62) : fbm::serial::volterra_direct(dW, 1.0 / n, 0.62);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void field_grid(benchmark::State& st) {
  const cascade::GridSpec g{static_cast<std::size_t>(st.range(0)), 1.0, 0};
  const cascade::FieldGrid fg(g, 0.1, {1.0 / 64}, 0.1);
  std::uint64_t k = 0;
  for (auto _ : st) {
    auto s = Parallel ? fg.sample({3, k++}) : fg.sample_serial({3, k++});
    benchmark::DoNotOptimize(s.w.data());
  }
}

template <bool Parallel>
void correction_table(benchmark::State& st) {
  cascade::CascadeParams p;
  p.r = 1.0 / 64;
  const cascade::GridSpec g{static_cast<std::size_t>(st.range(0)), 1.0, 0};
  for (auto _ : st) {
    auto t = Parallel ? walk::correction_coeffs(g, p) : walk::serial::correction_coeffs(g, p);
    benchmark::DoNotOptimize(t.a.data());
  }
}

template <bool Parallel>
void acf(benchmark::State& st) {
  const auto x = series(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) {
    auto r = Parallel ? stats::acf(x, 100, stats::Transform::abs) : stats::serial::acf(x, 100, stats::Transform::abs);
    benchmark::DoNotOptimize(r.estimate.data());
  }
}

template <bool Parallel>
void hurst(benchmark::State& st) {
  const auto x = noise(static_cast<std::size_t>(st.range(0)), 4);
  for (auto _ : st) {
    auto h = Parallel ? stats::hurst_rs(x) : stats::serial::hurst_rs(x);
    benchmark::DoNotOptimize(h.H);
  }
}

}  // namespace

BENCHMARK(volterra_direct<false>)->Name("volterra_direct/serial")->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(volterra_direct<true>)->Name("volterra_direct/parallel")->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(field_grid<false>)->Name("field_grid/serial")->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(field_grid<true>)->Name("field_grid/parallel")->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(correction_table<false>)->Name("correction_coeffs/serial")->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(correction_table<true>)->Name("correction_coeffs/parallel")->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(acf<false>)->Name("acf/serial")->Arg(1 << 17)->Unit(benchmark::kMillisecond);
BENCHMARK(acf<true>)->Name("acf/parallel")->Arg(1 << 17)->Unit(benchmark::kMillisecond);
BENCHMARK(hurst<false>)->Name("hurst_rs/serial")->Arg(1 << 17)->Unit(benchmark::kMillisecond);
BENCHMARK(hurst<true>)->Name("hurst_rs/parallel")->Arg(1 << 17)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
