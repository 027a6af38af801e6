#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <vector>

namespace mrw::par {

/// Worker count used by the OpenMP kernels.  Defaults to the OpenMP runtime
/// value capped by the MRW_LAB_THREADS environment variable.
int max_threads();
/// Override the worker count (0 restores the default).
void set_max_threads(int n);
/// Re-read MRW_LAB_THREADS.
void apply_thread_env();

/// RAII override of the worker count, for tests.
class ThreadScope {
 public:
  explicit ThreadScope(int n);
  ~ThreadScope();
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int prev_;
};

/// Captures the first exception thrown inside a parallel region and rethrows
/// it afterwards, since exceptions may not cross an OpenMP region boundary.
class ExceptionTrap {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(m_);
      if (!ex_) ex_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (ex_) std::rethrow_exception(ex_);
  }

 private:
  std::mutex m_;
  std::exception_ptr ex_;
};

/// Run fn(stream_index) for stream_index in [first, first + count).  Results are
/// stored by index, so the output never depends on the worker count.
template <class T, class F>
std::vector<T> replicate(std::uint64_t first, std::size_t count, F&& fn) {
  std::vector<T> out(count);
  ExceptionTrap trap;
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads())
  for (long long i = 0; i < n; ++i) {
    trap.run([&] { out[static_cast<std::size_t>(i)] = fn(first + static_cast<std::uint64_t>(i)); });
  }
  trap.rethrow();
  return out;
}

}  // namespace mrw::par
