#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "lpl/errors.hpp"
#include "lpl/perpetuity.hpp"

using namespace lpl;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

LevyTriplet kesten_triplet() {
  LevyTriplet t;
  t.v2 = 1.0;
  t.b = 1.0;
  t.lambda2.atoms.push_back({1.0, 1.0});
  return t;
}

}  // namespace

TEST_CASE("a.s. finiteness examples") {
  const auto holds = check_as_finiteness(kesten_triplet());
  CHECK(holds.holds());
  // E X_1 = 1 and the log-tail integral is empty (|y| = 1 <= e).
  REQUIRE(holds.components.size() == 2);
  CHECK(*holds.components[0].value == 1.0);
  CHECK(*holds.components[1].value == 0.0);

  LevyTriplet down = kesten_triplet();
  down.v2 = 0.0;
  down.b = -1.0;
  CHECK(check_as_finiteness(down).verdict == Verdict::fails);

  LevyTriplet zero_mean = kesten_triplet();
  zero_mean.b = 0.0;
  const auto osc = check_as_finiteness(zero_mean);
  CHECK(osc.verdict == Verdict::fails);
  CHECK(osc.components[0].boundary);
}

TEST_CASE("a.s. finiteness is indeterminate with two infinite tails") {
  LevyTriplet t = kesten_triplet();
  t.lambda1.densities.push_back(
      {1.0, kInf, DensityFamily::truncated_stable, 1.0, 0.5, {}});
  t.lambda1.densities.push_back(
      {-kInf, -1.0, DensityFamily::truncated_stable, 1.0, 0.5, {}});
  const auto rep = check_as_finiteness(t);
  CHECK(rep.verdict == Verdict::indeterminate);
  CHECK(rep.components[0].verdict == Verdict::indeterminate);
}

TEST_CASE("moment criterion examples") {
  const LevyTriplet t = kesten_triplet();
  const auto p1 = check_moment_finiteness(t, 1.0);
  CHECK(p1.holds());
  CHECK(*p1.components[0].value == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(*p1.components[1].value == 1.0);

  // p = 2 sits exactly on the boundary psi(2) = 0.
  const auto p2 = check_moment_finiteness(t, 2.0);
  CHECK(p2.verdict == Verdict::fails);
  CHECK(p2.components[0].boundary);

  LevyTriplet heavy = kesten_triplet();
  heavy.lambda2.atoms.clear();
  heavy.lambda2.densities.push_back(
      {1.0, kInf, DensityFamily::power, 1.0, -2.0, {}});
  const auto p15 = check_moment_finiteness(heavy, 1.5);
  CHECK(p15.verdict == Verdict::fails);
  CHECK(p15.components[1].divergent);
}

TEST_CASE("degenerate payment measure: every moment is zero") {
  LevyTriplet t;
  t.v2 = 1.0;
  t.b = 1.0;
  const auto rep = check_moment_finiteness(t, 1.0);
  CHECK(rep.holds());
  CHECK(rep.notes == "degenerate perpetuity");
}

TEST_CASE("oracle grid: triplet criterion vs direct finite-sum arithmetic") {
  // Theorem-style check against E M^p computed by elementary arithmetic:
  // for an atomic jump part, E e^{-pX_1} = exp(v^2 p^2/2 - p b0
  // + sum_i m_i (e^{-p a_i} - 1)) with the uncompensated drift
  // b0 = b - sum_{|a_i|<=1} a_i m_i. A trivial payment measure is the
  // degenerate S = 0 case and holds regardless of M.
  struct Case {
    double v2, b;
    std::vector<Atom> jumps;
    bool payment;  // Lambda2 = atom(1,1) when true, empty otherwise
    double p;
  };
  const std::vector<Case> grid = {
      {1.0, 1.0, {}, true, 1.0},
      {1.0, 1.0, {}, true, 2.0},
      {1.0, 1.0, {}, true, 3.0},
      {1.0, 2.0, {}, true, 3.0},
      {0.0, 1.0, {}, true, 5.0},
      {0.0, -0.5, {}, true, 1.0},
      {0.0, 0.0, {{1.0, 1.0}}, true, 1.0},
      {0.0, 0.0, {{1.0, 1.0}}, true, 0.5},
      {0.0, 2.0, {{1.0, 1.0}}, true, 1.0},
      {0.5, 0.5, {{-0.5, 0.3}}, true, 1.0},
      {0.5, 0.5, {{-0.5, 0.3}}, true, 2.5},
      {0.2, 1.0, {{2.0, 0.4}}, true, 1.5},
      {0.2, 1.0, {{2.0, 0.4}, {-1.5, 0.2}}, true, 1.5},
      {0.0, 0.3, {{0.4, 1.0}}, true, 2.0},
      {0.0, 0.3, {{0.4, 1.0}}, true, 0.25},
      {2.0, 0.1, {{0.1, 0.5}}, true, 0.5},
      {2.0, 3.0, {{0.1, 0.5}}, true, 2.0},
      {1.0, 1.0, {}, false, 3.0},
      {0.0, -1.0, {{-2.0, 1.0}}, false, 1.0},
      {0.3, 0.7, {{1.2, 0.6}, {-0.3, 0.4}}, true, 1.8},
  };
  REQUIRE(grid.size() == 20);
  for (const Case& c : grid) {
    LevyTriplet t;
    t.v2 = c.v2;
    t.b = c.b;
    t.lambda1.atoms = c.jumps;
    if (c.payment) t.lambda2.atoms.push_back({1.0, 1.0});

    // Independent oracle path: uncompensated compound-Poisson arithmetic.
    double b0 = c.b;
    double jump_sum = 0.0;
    for (const Atom& a : c.jumps) {
      if (std::abs(a.location) <= 1.0) b0 -= a.location * a.mass;
      jump_sum += a.mass * (std::exp(-c.p * a.location) - 1.0);
    }
    const double em_p =
        std::exp(0.5 * c.v2 * c.p * c.p - c.p * b0 + jump_sum);
    // E|Q|^p is a finite sum over the payment atoms, always finite here.
    const bool oracle = !c.payment || em_p < 1.0;

    CHECK(check_moment_finiteness(t, c.p).holds() == oracle);
  }
}

TEST_CASE("monotonicity: holds at p implies holds at p/2") {
  const std::vector<LevyTriplet> triplets = {
      kesten_triplet(),
      [] {
        LevyTriplet t;
        t.b = 0.5;
        t.lambda1.atoms.push_back({0.5, 1.0});
        t.lambda2.atoms.push_back({2.0, 0.3});
        return t;
      }(),
  };
  for (const LevyTriplet& t : triplets) {
    for (double p : {0.5, 1.0, 1.5, 1.9, 2.5}) {
      if (check_moment_finiteness(t, p).holds()) {
        CHECK(check_moment_finiteness(t, p / 2.0).holds());
      }
    }
  }
}

TEST_CASE("geometric fixture: deterministic pairs") {
  const ConstPairSource src(0.5, 1.0);
  const PerpetuitySample s = iterate_source(src, 10, 1);
  CHECK(s.value == 1.998046875);  // 2 (1 - 2^{-10})
  CHECK(s.n_iterations == 10);
}

TEST_CASE("no payments: S_n = 0") {
  LevyTriplet t;
  t.v2 = 1.0;
  t.b = 1.0;
  for (int n : {1, 10, 50}) {
    CHECK(iterate_affine(t, n, 1e-3, 42).value == 0.0);
  }
}

TEST_CASE("perpetuity mean matches the geometric-sum oracle") {
  // E S = E Q* / (1 - E M*), E M* = e^{-1/2}, E Q* = 2 (1 - e^{-1/2}).
  const LevyTriplet t = kesten_triplet();
  const LevyPairSource src(t);
  const int n = 10000;
  const auto batch = perpetuity_batch(src, n, 50, {}, 5);
  double sum = 0.0, sum2 = 0.0;
  for (const auto& s : batch) {
    CHECK(!s.overflow);
    sum += s.value;
    sum2 += s.value * s.value;
  }
  const double mean = sum / n;
  const double var = std::max(sum2 / n - mean * mean, 0.0);
  const double se = std::sqrt(var / n);
  const double target = 2.0 * (1.0 - std::exp(-0.5)) / (1.0 - std::exp(-0.5));
  CHECK(std::abs(mean - target) <= 3.0 * se);
}

TEST_CASE("partial sums are Cauchy under a holds verdict") {
  const LevyTriplet t = kesten_triplet();
  REQUIRE(check_as_finiteness(t).holds());
  const LevyPairSource src(t);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const double s200 = iterate_source(src, 200, seed).value;
    const double s400 = iterate_source(src, 400, seed).value;
    worst = std::max(worst, std::abs(s400 - s200));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("adaptive stopping settles on the same tail") {
  const LevyTriplet t = kesten_triplet();
  const LevyPairSource src(t);
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const PerpetuitySample a = iterate_source_adaptive(src, {}, seed);
    const PerpetuitySample b = iterate_source(src, 1000, seed);
    CHECK(a.n_iterations <= 1000);
    CHECK(std::abs(a.value - b.value) < 1e-6);
  }
}

TEST_CASE("moment estimate on the deterministic fixture") {
  const ConstPairSource src(0.5, 1.0);
  const MomentEstimate est = estimate_abs_moment(src, 1.0, 400, 30, {}, 3);
  CHECK(est.estimate ==
        doctest::Approx(2.0 * (1.0 - std::pow(2.0, -30.0))).epsilon(1e-14));
  CHECK(est.std_error == 0.0);
  CHECK(est.stable);
  CHECK(est.n_overflow == 0);
}

TEST_CASE("overflow samples are flagged and excluded, all-overflow throws") {
  const ConstPairSource diverging(2.0, 1.0);
  const PerpetuitySample s = iterate_source(diverging, 2000, 1);
  CHECK(s.overflow);
  CHECK(s.n_iterations < 2000);
  CHECK_THROWS_AS(estimate_abs_moment(diverging, 1.0, 100, 2000, {}, 1),
                  NumericError);
}

TEST_CASE("hill estimator on exact Pareto quantile grids") {
  const int n = 10000, k = 500;
  std::vector<double> pareto2, pareto1;
  for (int i = 1; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    pareto2.push_back(std::pow(u, -0.5));
    pareto1.push_back(std::pow(u, -1.0));
  }
  CHECK(std::abs(hill_tail_index(pareto2, k) - 2.0) <= 0.15);
  CHECK(std::abs(hill_tail_index(pareto1, k) - 1.0) <= 0.1);
}

TEST_CASE("hill estimator degenerates on constant samples") {
  const std::vector<double> flat(200, 3.0);
  CHECK_THROWS_AS(hill_tail_index(flat, 50), NumericError);
}

TEST_CASE("serial and parallel batches are identical") {
  const LevyTriplet t = kesten_triplet();
  const LevyPairSource src(t);
  const auto a = perpetuity_batch(src, 500, 0, {}, 9, ExecPolicy::serial);
  const auto b = perpetuity_batch(src, 500, 0, {}, 9, ExecPolicy::openmp);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == b[i].value);
    CHECK(a[i].n_iterations == b[i].n_iterations);
  }
}
