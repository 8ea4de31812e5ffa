#pragma once

#include <cstdint>
#include <vector>

#include "lpl/parallel.hpp"
#include "lpl/report.hpp"
#include "lpl/sampler.hpp"

namespace lpl {

/// One realization of the perpetuity partial sum S_n = sum_k (prod_{i<k} M_i) Q_k.
struct PerpetuitySample {
  double value = 0.0;
  int n_iterations = 0;
  std::uint64_t pairs_seed = 0;
  bool overflow = false;  // running product left double range; value unusable
};

/// Source of i.i.d. embedding pairs (M, Q). Implementations must be pure
/// given the Rng state so batches stay reproducible.
class PairSource {
 public:
  virtual ~PairSource() = default;
  virtual EmbeddingPair draw(Rng& rng) const = 0;
};

/// Pairs sampled from the horizon-1 embedding of a Levy triplet.
class LevyPairSource : public PairSource {
 public:
  LevyPairSource(const LevyTriplet& t, SamplerOptions opt = {})
      : sampler_(t, opt) {}
  EmbeddingPair draw(Rng& rng) const override {
    return sampler_.sample_mq(rng.next());
  }
  const PathSampler& sampler() const { return sampler_; }

 private:
  PathSampler sampler_;
};

/// Finitely supported pair law: atom i drawn with probability prob[i].
class DiscretePairSource : public PairSource {
 public:
  struct PairAtom {
    double m, q, prob;
  };
  explicit DiscretePairSource(std::vector<PairAtom> atoms);
  EmbeddingPair draw(Rng& rng) const override;
  const std::vector<PairAtom>& atoms() const { return atoms_; }

 private:
  std::vector<PairAtom> atoms_;
  std::vector<double> cum_;
};

/// Deterministic pair, for closed-form fixtures.
class ConstPairSource : public PairSource {
 public:
  ConstPairSource(double m, double q) : pair_{m, q} {}
  EmbeddingPair draw(Rng&) const override { return pair_; }

 private:
  EmbeddingPair pair_;
};

/// Adaptive stopping rule for the affine iteration: stop once the partial
/// sum moves by less than tol over `check_every` steps, `consecutive` times
/// in a row, or at n_max.
struct IterationPolicy {
  double tol = 1e-9;
  int check_every = 10;
  int consecutive = 3;
  int n_max = 1000;
};

/// Drift test for X_t -> +inf a.s. via the mean trichotomy:
/// E X_1 = b + int_{|x|>1} x dLambda1 when the tails are integrable;
/// one-sided infinite means decide by sign, double-infinite means are
/// indeterminate (the full Erickson test is out of scope).
Component drift_to_infinity_component(const LevyTriplet& t,
                                      const QuadratureOptions& opt = {});

/// Almost-sure finiteness of S (exact iff): X_t -> +inf a.s. together with
/// int_{|y|>e} log|y| / A(log|y|) dLambda2 < inf.
CriterionReport check_as_finiteness(const LevyTriplet& t,
                                    const QuadratureOptions& opt = {});

/// E|S|^p < inf (exact iff): psi(p) < 0 and int_{|y|>=1} |y|^p dLambda2 < inf.
/// Equality psi(p) = 0 fails with the boundary flag set.
CriterionReport check_moment_finiteness(const LevyTriplet& t, double p,
                                        const QuadratureOptions& opt = {});

/// Fixed-length affine iteration over a pair source.
PerpetuitySample iterate_source(const PairSource& src, int n,
                                std::uint64_t seed);

/// Adaptive-length iteration (policy-controlled stopping).
PerpetuitySample iterate_source_adaptive(const PairSource& src,
                                         const IterationPolicy& policy,
                                         std::uint64_t seed);

/// S_n from the Levy embedding pairs; n >= 1.
PerpetuitySample iterate_affine(const LevyTriplet& t, int n, double eps,
                                std::uint64_t seed);

/// Batch of perpetuity samples over per-index substreams of `seed`.
/// n_iter <= 0 selects the adaptive rule. Serial and OpenMP lanes produce
/// identical output.
std::vector<PerpetuitySample> perpetuity_batch(
    const PairSource& src, int n_samples, int n_iter,
    const IterationPolicy& policy, std::uint64_t seed,
    ExecPolicy exec = ExecPolicy::serial);

struct MomentEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  bool stable = true;  // false when 4-batch spread exceeds 10x pooled s.e.
  int n_used = 0;
  int n_overflow = 0;
  double batch_spread = 0.0;
};

/// Monte Carlo mean of |S_{n_iter}|^p with standard error and a 4-batch
/// heavy-tail stability diagnostic.
MomentEstimate estimate_abs_moment(const PairSource& src, double p,
                                   int n_samples, int n_iter,
                                   const IterationPolicy& policy,
                                   std::uint64_t seed,
                                   ExecPolicy exec = ExecPolicy::serial);

MomentEstimate estimate_abs_moment(const LevyTriplet& t, double p,
                                   int n_samples, int n_iter, double eps,
                                   std::uint64_t seed,
                                   ExecPolicy exec = ExecPolicy::serial);

/// Hill estimator over the top k order statistics of |samples|.
double hill_tail_index(const std::vector<double>& samples, int k);

}  // namespace lpl
