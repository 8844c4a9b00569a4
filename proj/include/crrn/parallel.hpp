#pragma once

#include <crrn/types.hpp>

#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crrn {

/// Serial is the reference path; Parallel must reproduce it bit-for-bit.
enum class Execution { Serial, Parallel };

/// Worker cap from CRRN_THREADS (0 or unset = OpenMP default).
int worker_count();
void set_worker_count(int n);

/// Runs fn(i) for i in [0, n). Each index must write only its own output
/// slot; reductions happen afterwards in index order. Nested calls inside an
/// active parallel region run serially. The exception from the lowest
/// failing index is rethrown.
template <class Fn>
void parallel_for(Index n, Fn &&fn, Execution exec = Execution::Parallel) {
#ifdef _OPENMP
  if (exec == Execution::Parallel && n > 1 && !omp_in_parallel() &&
      worker_count() > 1) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (Index i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (auto &e : errors)
      if (e)
        std::rethrow_exception(e);
    return;
  }
#endif
  (void)exec;
  for (Index i = 0; i < n; ++i)
    fn(i);
}

/// Evaluates fn(i) for every index into a vector (parallel map).
template <class T, class Fn>
std::vector<T> parallel_map(Index n, Fn &&fn,
                            Execution exec = Execution::Parallel) {
  std::vector<T> out(static_cast<std::size_t>(n));
  parallel_for(
      n, [&](Index i) { out[static_cast<std::size_t>(i)] = fn(i); }, exec);
  return out;
}

} // namespace crrn
