#include <crrn/parallel.hpp>

#include <atomic>
#include <cstdlib>
#include <string>

namespace crrn {

namespace {

int threads_from_env() {
  const char *env = std::getenv("CRRN_THREADS");
  if (env == nullptr)
    return 0;
  try {
    int v = std::stoi(env);
    return v < 0 ? 0 : v;
  } catch (...) {
    return 0;
  }
}

std::atomic<int> &override_slot() {
  static std::atomic<int> slot{-1};
  return slot;
}

} // namespace

int worker_count() {
  int n = override_slot().load();
  if (n < 0)
    n = threads_from_env();
#ifdef _OPENMP
  if (n == 0)
    n = omp_get_max_threads();
#else
  n = 1;
#endif
  return n < 1 ? 1 : n;
}

void set_worker_count(int n) { override_slot().store(n < 0 ? 0 : n); }

} // namespace crrn
