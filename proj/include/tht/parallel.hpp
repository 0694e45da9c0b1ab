#pragma once

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace tht {

// Execution policy for the hot kernels. The parallel path only ever splits
// work across independent output slots (rows, trials, per-index partials),
// never across a shared accumulator, so seq and par are bitwise identical;
// tests assert this and bench_kernels compares their timings.
enum class Exec { seq, par };

template <typename Fn>
void parallel_for(int count, Exec exec, Fn&& fn) {
#if defined(_OPENMP)
  if (exec == Exec::par) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
#else
  (void)exec;
#endif
  for (int i = 0; i < count; ++i) fn(i);
}

}  // namespace tht
