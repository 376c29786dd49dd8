#pragma once

#include <cstddef>
#include <exception>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cylreg {

enum class ExecMode { serial, parallel };

// Maps fn over replica indices 0..n-1. Each call writes only into slots owned
// by its own index, so the parallel and serial paths produce bit-identical
// results; the serial path is the reference the parallel one is tested
// against. Exceptions thrown inside the loop are captured and rethrown once.
template <class Fn>
void replica_sweep(std::size_t n, ExecMode mode, Fn&& fn) {
#ifdef _OPENMP
  if (mode == ExecMode::parallel) {
    std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic, 8)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#else
  (void)mode;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

// Serial reference, kept as a distinct entry point for tests and benchmarks.
template <class Fn>
void replica_sweep_serial(std::size_t n, Fn&& fn) {
  replica_sweep(n, ExecMode::serial, std::forward<Fn>(fn));
}

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace cylreg
