#include <cmath>
#include <limits>

#include "doctest.h"
#include "lpl/errors.hpp"
#include "lpl/sampler.hpp"

using namespace lpl;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

LevyTriplet drift_only(double b) {
  LevyTriplet t;
  t.b = b;
  return t;
}

}  // namespace

TEST_CASE("deterministic drift path: X_t = t exactly, no jumps") {
  const PathSkeleton sk = sample_path(drift_only(1.0), 1.0, 1e-3, 7);
  CHECK(sk.jumps.empty());
  CHECK(sk.x.back() == 1.0);
  for (std::size_t i = 0; i < sk.times.size(); ++i) {
    CHECK(sk.x[i] == sk.times[i]);
    CHECK(sk.z[i] == 0.0);
  }
}

TEST_CASE("X-jump count is Poisson(1) on [0,1]") {
  LevyTriplet t;
  t.lambda1.atoms.push_back({1.0, 1.0});
  const PathSampler sampler(t);
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += static_cast<double>(sampler.sample(1.0, subseed(300, i)).jumps.size());
  }
  const double mean = sum / n;
  const double se = std::sqrt(1.0 / n);  // Var Poisson(1) = 1
  CHECK(std::abs(mean - 1.0) <= 3.0 * se);
}

TEST_CASE("Z-jump count is Poisson(2) on [0,2]") {
  LevyTriplet t;
  t.lambda2.atoms.push_back({1.0, 1.0});
  const PathSampler sampler(t);
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const PathSkeleton sk = sampler.sample(2.0, subseed(301, i));
    sum += sk.z.back();  // unit jumps: Z_2 counts them
  }
  const double mean = sum / n;
  const double se = std::sqrt(2.0 / n);
  CHECK(std::abs(mean - 2.0) <= 3.0 * se);
}

TEST_CASE("embedding pair hand cases") {
  // X == 0: every payment is undiscounted, so q counts the Z-jumps.
  LevyTriplet t;
  t.lambda2.atoms.push_back({1.0, 1.0});
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    const PathSkeleton sk = sample_path(t, 1.0, 1e-3, seed);
    const EmbeddingPair mq = mq_from_skeleton(sk);
    CHECK(mq.m_star == 1.0);
    CHECK(mq.q_star == static_cast<double>(sk.jumps.size()));
  }

  // No payments: q_star = 0, m_star = e^{-X_1}.
  LevyTriplet g;
  g.v2 = 1.0;
  g.b = 0.5;
  const EmbeddingPair mq = sample_MQ(g, 1e-3, 99);
  CHECK(mq.q_star == 0.0);
  CHECK(mq.m_star > 0.0);
}

TEST_CASE("drift discounts the payments: q_star = e^{-tau} at each jump") {
  // b = 1, single Z atom: q_star = sum e^{-tau_k} over the jump times.
  LevyTriplet t = drift_only(1.0);
  t.lambda2.atoms.push_back({1.0, 1.0});
  const PathSampler sampler(t);
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const PathSkeleton sk = sampler.sample(1.0, seed);
    double expect = 0.0;
    for (const JumpRecord& j : sk.jumps) expect += std::exp(-j.time);
    const EmbeddingPair mq = mq_from_skeleton(sk);
    CHECK(mq.q_star == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("skeleton consistency: recorded jumps tie into the path") {
  LevyTriplet t;
  t.v2 = 0.5;
  t.b = -0.2;
  t.lambda1.atoms.push_back({0.7, 1.5});
  t.lambda1.atoms.push_back({-0.4, 0.5});
  t.lambda2.atoms.push_back({2.0, 1.0});
  const PathSampler sampler(t);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PathSkeleton sk = sampler.sample(1.5, seed);
    double prev = -1.0;
    for (const JumpRecord& j : sk.jumps) {
      CHECK(j.time > prev);
      CHECK(j.time <= sk.horizon);
      prev = j.time;
      // X_tau - X_{tau-} = i_k at the recorded index.
      const auto it =
          std::lower_bound(sk.times.begin(), sk.times.end(), j.time);
      REQUIRE(it != sk.times.end());
      CHECK(*it == j.time);
      CHECK(sk.x[it - sk.times.begin()] == j.x_left + j.dx);
    }
    // Z is a pure jump path: final value equals the jump sum.
    double zsum = 0.0;
    for (const JumpRecord& j : sk.jumps) zsum += j.dz;
    CHECK(sk.z.back() == doctest::Approx(zsum).epsilon(1e-12));
  }
}

TEST_CASE("jump-only model: skeleton pair equals the direct pair draw") {
  // With no Brownian part both code paths consume the RNG identically; the
  // drift is accumulated over different partitions, so values agree to
  // rounding rather than bitwise.
  LevyTriplet t = drift_only(0.3);
  t.lambda1.atoms.push_back({0.5, 1.0});
  t.lambda2.atoms.push_back({1.0, 2.0});
  const PathSampler sampler(t);
  for (std::uint64_t seed = 50; seed < 60; ++seed) {
    const EmbeddingPair a = mq_from_skeleton(sampler.sample(1.0, seed));
    const EmbeddingPair b = sampler.sample_mq(seed);
    CHECK(a.m_star == doctest::Approx(b.m_star).epsilon(1e-12));
    CHECK(a.q_star == doctest::Approx(b.q_star).epsilon(1e-12));
  }
}

TEST_CASE("distributional check: E e^{-pX_1} matches exp(psi(p))") {
  LevyTriplet t;
  t.v2 = 0.5;
  t.b = 0.3;
  t.lambda1.atoms.push_back({0.7, 0.4});
  t.lambda1.atoms.push_back({-0.3, 0.2});
  const PathSampler sampler(t);
  const int n = 100000;
  for (double p : {0.5, 1.0}) {
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const EmbeddingPair mq = sampler.sample_mq(subseed(777, i));
      const double v = std::pow(mq.m_star, p);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = std::max(sum2 / n - mean * mean, 0.0);
    const double se = std::sqrt(var / n);
    const double target = std::exp(laplace_exponent_X(t, p));
    CHECK(std::abs(mean - target) <= 3.0 * se);
  }
}

TEST_CASE("small-jump bias bound matches the closed form") {
  // Lambda2 density y^{-1/2} on (0,1): int_0^eps y * y^{-1/2} dy = (2/3) eps^{3/2}.
  LevyTriplet t;
  t.lambda2.densities.push_back({0.0, 1.0, DensityFamily::power, 1.0, -0.5, {}});
  SamplerOptions opt;
  opt.eps = 1e-3;
  const PathSampler sampler(t, opt);
  const double expect = (2.0 / 3.0) * std::pow(opt.eps, 1.5);
  CHECK(sampler.small_jump_bias_bound() ==
        doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("eps = 0 with an infinite-activity density is rejected") {
  LevyTriplet t;
  t.lambda1.densities.push_back(
      {0.0, 1.0, DensityFamily::truncated_stable, 1.0, 0.5, {}});
  SamplerOptions opt;
  opt.eps = 0.0;
  CHECK_THROWS_AS(PathSampler(t, opt), ValidationError);
}
