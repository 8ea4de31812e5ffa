#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "lpl/exponents.hpp"
#include "lpl/rng.hpp"

namespace lpl {

struct JumpRecord {
  double time;
  double dx;      // X-jump size i_k
  double dz;      // Z-jump size j_k
  double x_left;  // X_{tau-}
};

/// A sampled trajectory of (X, Z) on [0, T]: values on the grid plus the
/// full jump record with left limits.
struct PathSkeleton {
  double horizon = 0.0;
  double truncation_eps = 0.0;
  std::uint64_t seed = 0;
  double small_jump_bias_bound = 0.0;  // discarded |dz| mass per unit time
  std::vector<double> times;  // 0 = t0 < ... < T, grid + jump times
  std::vector<double> x;      // X at times (right-continuous)
  std::vector<double> z;      // Z at times
  std::vector<JumpRecord> jumps;
};

/// The horizon-1 embedding pair (M*, Q*) = (e^{-X_1}, int_0^1 e^{-X_{s-}} dZ_s).
struct EmbeddingPair {
  double m_star = 1.0;
  double q_star = 0.0;
};

struct SamplerOptions {
  double eps = 1e-3;        // small-jump truncation for densities
  int grid_per_unit = 1024; // Brownian grid resolution for path dumps
};

/// Precomputed event tables for one triplet. Immutable and thread-safe;
/// sampling is pure given (triplet, seed).
class PathSampler {
 public:
  PathSampler(const LevyTriplet& t, SamplerOptions opt = {});

  PathSkeleton sample(double T, std::uint64_t seed) const;

  /// Horizon-1 pair; X is evaluated only at jump times and the horizon,
  /// which is exact for this jump-diffusion model.
  EmbeddingPair sample_mq(std::uint64_t seed) const;

  double small_jump_bias_bound() const { return bias_bound_; }
  double total_jump_rate() const { return total_rate_; }
  double effective_drift() const { return b_eff_; }

 private:
  struct Event {
    double dx, dz;
  };
  struct DensityTable {
    std::vector<double> xs;   // support nodes
    std::vector<double> cdf;  // cumulative mass, normalized
    bool is_x_side;           // contributes dx (else dz)
    double draw(double u) const;
  };

  Event draw_event(Rng& rng) const;

  std::vector<double> cum_rates_;
  std::vector<Event> atom_events_;       // aligned with cum_rates_ prefix
  std::vector<DensityTable> tables_;     // aligned after atoms
  double total_rate_ = 0.0;
  double b_eff_ = 0.0;  // drift after small-jump compensation
  double v_ = 0.0;
  double bias_bound_ = 0.0;
  SamplerOptions opt_;
};

PathSkeleton sample_path(const LevyTriplet& t, double T, double eps,
                         std::uint64_t seed);

/// (M*, Q*) computed from an existing skeleton; exact given the skeleton
/// since Z moves only by jumps.
EmbeddingPair mq_from_skeleton(const PathSkeleton& s);

EmbeddingPair sample_MQ(const LevyTriplet& t, double eps, std::uint64_t seed);

}  // namespace lpl
