// Benchmark: serial reference lane vs OpenMP lane on the two Monte Carlo
// kernels (perpetuity batches, branching-tree additive functionals).
// Also asserts that both lanes produce identical results.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "lpl/branching.hpp"
#include "lpl/parallel.hpp"
#include "lpl/perpetuity.hpp"

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <class F>
double timed(F&& f) {
  const double t0 = now_s();
  f();
  return now_s() - t0;
}

}  // namespace

int main() {
  using namespace lpl;
  std::printf("openmp: %s, max threads: %d\n",
              detail::openmp_enabled() ? "yes" : "no", max_threads());

  // Perpetuity batch on the Gaussian + unit-payment triplet.
  LevyTriplet t;
  t.v2 = 1.0;
  t.b = 1.0;
  t.lambda2.atoms.push_back({1.0, 1.0});
  const LevyPairSource src(t);
  const int n_perp = 20000;

  std::vector<PerpetuitySample> serial_p, omp_p;
  const double ts1 = timed([&] {
    serial_p = perpetuity_batch(src, n_perp, 0, {}, 7, ExecPolicy::serial);
  });
  const double tp1 = timed([&] {
    omp_p = perpetuity_batch(src, n_perp, 0, {}, 7, ExecPolicy::openmp);
  });
  bool same = serial_p.size() == omp_p.size();
  for (std::size_t i = 0; same && i < serial_p.size(); ++i) {
    same = serial_p[i].value == omp_p[i].value;
  }
  std::printf("perpetuity_batch n=%d: serial %.3fs, openmp %.3fs (x%.2f), "
              "identical: %s\n",
              n_perp, ts1, tp1, ts1 / tp1, same ? "yes" : "NO");

  // Branching additive functional on binary branching Brownian motion.
  BranchingChars bbm;
  bbm.sigma2 = 1.0;
  bbm.theta = 0.5;
  bbm.pi.push_back({1.0, {0.0, 0.0}});
  const std::vector<double> times{0.5, 1.0, 2.0, 4.0};
  const int n_trees = 5000;

  FunctionalBatch serial_b, omp_b;
  const double ts2 = timed([&] {
    serial_b = additive_functional_batch(bbm, bbm.theta, times, n_trees,
                                         1000000, 11, ExecPolicy::serial);
  });
  const double tp2 = timed([&] {
    omp_b = additive_functional_batch(bbm, bbm.theta, times, n_trees,
                                      1000000, 11, ExecPolicy::openmp);
  });
  same = true;
  for (int i = 0; same && i < n_trees; ++i) {
    same = serial_b.sums[i] == omp_b.sums[i];
  }
  std::printf("additive_functional_batch n=%d: serial %.3fs, openmp %.3fs "
              "(x%.2f), identical: %s\n",
              n_trees, ts2, tp2, ts2 / tp2, same ? "yes" : "NO");
  return 0;
}
