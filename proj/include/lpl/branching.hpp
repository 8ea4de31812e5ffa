#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpl/branching_chars.hpp"
#include "lpl/exponents.hpp"
#include "lpl/parallel.hpp"
#include "lpl/report.hpp"
#include "lpl/rng.hpp"

namespace lpl {

/// Structural validation (throws) plus the two integrability conditions
/// behind every result: int (x1^2 ^ 1) dPi < inf and
/// int (e^{theta x1} 1_{(1,inf)}(x1) + sum_{j>=2} e^{theta x_j}) dPi < inf.
/// Both are finite sums for atomic Pi; the report carries their values.
CriterionReport validate_branching(const BranchingChars& c);

struct TreeParticle {
  int parent = -1;   // -1 for the root
  int child_k = 0;   // index within the parent's branch event (>= 2)
  double birth_time = 0.0;
  double birth_position = 0.0;
  // Position knots: birth, own branch events (post-jump), snapshots, horizon.
  std::vector<double> knot_times;
  std::vector<double> knot_pos;
};

/// Full genealogy of one realization. Positions are evaluable exactly at the
/// recorded knot times (snapshot times passed to simulate_population).
struct PopulationTree {
  double horizon = 0.0;
  std::uint64_t seed = 0;
  double theta = 0.0;
  double kappa_theta = 0.0;
  bool truncated = false;  // particle cap hit; W values are lower bounds
  std::vector<TreeParticle> particles;

  /// Ulam-Harris label, e.g. "1.2.1".
  std::string label(int i) const;
  /// Exact position of particle i at a knot time t; throws otherwise.
  double position_at(int i, double t) const;
  bool alive_at(int i, double t) const {
    return particles[i].birth_time <= t && t <= horizon;
  }
  std::vector<int> alive(double t) const;
};

PopulationTree simulate_population(const BranchingChars& c, double T,
                                   int max_particles, std::uint64_t seed,
                                   const std::vector<double>& snapshot_times =
                                       {});

/// W_t = sum_{u alive at t} e^{theta X_t(u) - t kappa(theta)}; t must be a
/// snapshot (or horizon) of the tree.
double biggins_W(const PopulationTree& tree, double t);

/// Lean Monte Carlo kernel: per-tree sums sum_{u alive} e^{z X_t(u)} at each
/// requested time, without building genealogies. Times must be sorted
/// ascending; the last entry is the horizon.
struct FunctionalBatch {
  std::vector<std::vector<double>> sums;  // [tree][time index]
  std::vector<std::uint8_t> truncated;
  std::vector<std::uint64_t> n_particles;
};

FunctionalBatch additive_functional_batch(const BranchingChars& c, double z,
                                          const std::vector<double>& times,
                                          int n_trees, int max_particles,
                                          std::uint64_t seed,
                                          ExecPolicy exec =
                                              ExecPolicy::serial);

struct ManyToOneResult {
  double lhs = 0.0;  // Monte Carlo mean of sum e^{z X_t(u)}
  double rhs = 0.0;  // exp(t kappa(z))
  double std_error = 0.0;
  double z_score = 0.0;
  int n_truncated = 0;  // nonzero means lhs is biased low
};

ManyToOneResult verify_many_to_one(const BranchingChars& c, double z, double t,
                                   int n_samples, std::uint64_t seed,
                                   int max_particles = 1000000,
                                   ExecPolicy exec = ExecPolicy::serial);

/// hat a = a + theta sigma^2
///       + sum_atoms rate (sum_k x_k e^{theta x_k} 1_[-1,1](x_k)
///                         - x_1 1_[-1,1](x_1)).
double hat_a(const BranchingChars& c);

/// Levy triplet of the process X = -theta X_t(w_t) + t kappa(theta) driving
/// the spine perpetuity. Each hat-Pi atom (x, k) yields the coupled jump
/// (-theta x_k, sum_{j != k} e^{theta x_j}) at rate rate_a e^{theta x_k};
/// (0, 0) jumps are dropped and equal jumps merged. The drift makes
/// laplace_exponent_X(triplet, p - 1) = kappa(p theta) - p kappa(theta).
LevyTriplet spine_measures(const BranchingChars& c);

/// Uniform integrability of W (exact iff): theta xi_t - t kappa(theta) ->
/// -inf a.s. (mean trichotomy on the spine triplet; with a finite mean this
/// is theta kappa'(theta) - kappa(theta) < 0), and the Pi-integral of
/// Theorem-style log / A with A(y) = 1 + sum rate sum_k e^{theta x_k}
/// ((-x_k) ^ y - 1)_+.
CriterionReport check_ui_criterion(const BranchingChars& c);

/// L_p convergence of W for p in (1, 2] (exact iff):
/// kappa(p theta) < p kappa(theta), and
/// sum rate sum_k e^{theta x_k} (sum_{j != k} e^{theta x_j})^{p-1}
/// 1_{(e,inf)} < inf. Equality at the first condition fails with the
/// boundary flag.
CriterionReport check_lp_criterion(const BranchingChars& c, double p);

struct SpineEvent {
  double time = 0.0;
  int atom_index = 0;
  int k = 0;                 // chosen child index, 1-based
  double xi_left = 0.0;      // spine position just before the jump
  double offspring_weight = 0.0;  // sum_{j != k} e^{theta x_j}
  double s_after = 0.0;      // perpetuity partial sum after the event
};

struct SpineRealization {
  double horizon = 0.0;
  std::uint64_t seed = 0;
  double theta = 0.0;
  double kappa_theta = 0.0;
  std::vector<SpineEvent> events;
  double xi_T = 0.0;
  double s_T = 0.0;

  double w_star() const;  // e^{theta xi_T - T kappa(theta)} + S_T
};

/// Spine under the size-biased law: events at total rate
/// sum rate_a sum_k e^{theta x_k}, event (a, k) with probability
/// proportional to rate_a e^{theta x_k}; the spine displaces by x_k and the
/// perpetuity S_t collects e^{theta xi_{s-} - s kappa(theta)} times the
/// offspring weight.
SpineRealization simulate_spine(const BranchingChars& c, double T,
                                std::uint64_t seed);

/// W*_t per realization over per-index substreams of seed.
std::vector<double> spine_wstar_batch(const BranchingChars& c, double t,
                                      int n_samples, std::uint64_t seed,
                                      ExecPolicy exec = ExecPolicy::serial);

struct SpineIdentityResult {
  double lhs = 0.0;  // spine-side mean of W*_t
  double rhs = 0.0;  // population-side mean of W_t^2
  double lhs_se = 0.0;
  double rhs_se = 0.0;
  double z_score = 0.0;  // (lhs - rhs) / joint s.e.
  int n_truncated = 0;
};

/// Size-bias cross-check: E-hat W*_t against E W_t^2, both Monte Carlo.
SpineIdentityResult check_spine_identity(const BranchingChars& c, double t,
                                         int n_samples, std::uint64_t seed,
                                         int max_particles = 1000000,
                                         ExecPolicy exec = ExecPolicy::serial);

}  // namespace lpl
