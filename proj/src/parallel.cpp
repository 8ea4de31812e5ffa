#include "lpl/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lpl {

void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) {
    omp_set_num_threads(n);
  } else {
    omp_set_num_threads(omp_get_num_procs());
  }
#else
  (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace detail {
bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}
}  // namespace detail

}  // namespace lpl
