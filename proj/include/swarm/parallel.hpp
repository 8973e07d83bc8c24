#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace swarm {

// Execution policy for the data-parallel kernels (multi-start solves,
// scenario batches). The serial path is the reference: every kernel must
// produce bit-identical results under both paths, which the tests assert.
struct ExecPolicy {
  bool parallel = false;
  int threads = 0;  // 0 = runtime default

  static ExecPolicy serial() { return {false, 0}; }
  static ExecPolicy openmp(int threads = 0) { return {true, threads}; }
};

// Runs fn(i) for i in [0, n). Results must be written to preallocated
// per-index slots; no ordering is guaranteed on the parallel path.
template <typename F>
void for_each_index(int n, const ExecPolicy& policy, F&& fn) {
#ifdef _OPENMP
  if (policy.parallel && !omp_in_parallel()) {
    const int nt = policy.threads > 0 ? policy.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nt)
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  (void)policy;
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace swarm
