#include "mrwlab/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>

namespace mrw::par {

namespace {
std::atomic<int> g_override{0};
std::atomic<int> g_env_cap{-1};

int read_env_cap() {
  const char* v = std::getenv("MRW_LAB_THREADS");
  if (!v || !*v) return 0;
  const int n = std::atoi(v);
  return n > 0 ? n : 0;
}
}  // namespace

void apply_thread_env() { g_env_cap = read_env_cap(); }

int max_threads() {
  if (const int o = g_override.load(); o > 0) return o;
  int cap = g_env_cap.load();
  if (cap < 0) {
    cap = read_env_cap();
    g_env_cap = cap;
  }
  return cap > 0 ? cap : omp_get_max_threads();
}

void set_max_threads(int n) { g_override = std::max(n, 0); }

ThreadScope::ThreadScope(int n) : prev_(g_override.load()) { set_max_threads(n); }
ThreadScope::~ThreadScope() { g_override = prev_; }

}  // namespace mrw::par
