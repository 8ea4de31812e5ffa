#pragma once

#include <cstddef>

namespace lpl {

/// Execution lane for Monte Carlo batches. `serial` is the reference
/// implementation; `openmp` parallelizes over tasks. Both produce identical
/// results because every task owns a seed-derived stream and writes to its
/// own output slot.
enum class ExecPolicy { serial, openmp };

/// 0 restores the runtime default.
void set_thread_count(int n);
int max_threads();

namespace detail {
bool openmp_enabled();
}

template <class F>
void parallel_for(std::size_t n, ExecPolicy policy, F&& body) {
  if (policy == ExecPolicy::serial || !detail::openmp_enabled()) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 8)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    body(static_cast<std::size_t>(i));
  }
}

}  // namespace lpl
