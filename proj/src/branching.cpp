#include "lpl/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "lpl/errors.hpp"
#include "lpl/perpetuity.hpp"

namespace lpl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_entry(double x) { return !std::isinf(x); }

void validate_structure(const BranchingChars& c) {
  if (!(c.theta > 0.0) || !std::isfinite(c.theta)) {
    throw ValidationError("chars.theta must be > 0 and finite");
  }
  if (!(c.sigma2 >= 0.0) || !std::isfinite(c.sigma2)) {
    throw ValidationError("chars.sigma2 must be >= 0 and finite");
  }
  if (!std::isfinite(c.a)) throw ValidationError("chars.a must be finite");
  for (std::size_t i = 0; i < c.pi.size(); ++i) {
    const SequenceAtom& at = c.pi[i];
    const std::string where = "chars.pi[" + std::to_string(i) + "]";
    if (!(at.rate > 0.0) || !std::isfinite(at.rate)) {
      throw ValidationError(where + ".rate must be > 0 and finite");
    }
    if (at.sequence.empty()) {
      throw ValidationError(where + ".sequence must be non-empty");
    }
    if (!std::isfinite(at.sequence.front())) {
      throw ValidationError(where + ".sequence: x1 must be finite");
    }
    for (std::size_t k = 0; k < at.sequence.size(); ++k) {
      const double x = at.sequence[k];
      if (std::isnan(x) || x == kInf) {
        throw ValidationError(where + ".sequence: entries must be real or "
                                      "-inf");
      }
      if (k > 0 && x > at.sequence[k - 1]) {
        throw ValidationError(where + ".sequence must be non-increasing");
      }
    }
  }
}

// sum_k e^{theta x_k} over finite entries.
double atom_exp_sum(const SequenceAtom& at, double theta) {
  double s = 0.0;
  for (double x : at.sequence) {
    if (finite_entry(x)) s += std::exp(theta * x);
  }
  return s;
}

// Motion drift of a population particle between branch events: the kept
// jumps x1 arrive uncompensated, so the compensator over [-1,1] moves out
// of a.
double population_drift(const BranchingChars& c) {
  double a_eff = c.a;
  for (const SequenceAtom& at : c.pi) {
    const double x1 = at.sequence.front();
    if (std::abs(x1) <= 1.0) a_eff -= at.rate * x1;
  }
  return a_eff;
}

struct AtomTable {
  double x1 = 0.0;
  std::vector<double> child_offsets;  // finite x_k, k >= 2
};

std::vector<AtomTable> atom_tables(const BranchingChars& c) {
  std::vector<AtomTable> out;
  out.reserve(c.pi.size());
  for (const SequenceAtom& at : c.pi) {
    AtomTable t;
    t.x1 = at.sequence.front();
    for (std::size_t k = 1; k < at.sequence.size(); ++k) {
      if (finite_entry(at.sequence[k])) {
        t.child_offsets.push_back(at.sequence[k]);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<double> cumulative_rates(const BranchingChars& c) {
  std::vector<double> cum;
  cum.reserve(c.pi.size());
  double acc = 0.0;
  for (const SequenceAtom& at : c.pi) {
    acc += at.rate;
    cum.push_back(acc);
  }
  return cum;
}

std::size_t pick_index(const std::vector<double>& cum, Rng& rng) {
  const double u = rng.uniform() * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
}
}  // namespace

CriterionReport validate_branching(const BranchingChars& c) {
  validate_structure(c);
  CriterionReport rep;

  Component c1;
  c1.name = "int (x1^2 ^ 1) dPi < inf";
  double v1 = 0.0;
  for (const SequenceAtom& at : c.pi) {
    const double x1 = at.sequence.front();
    v1 += at.rate * std::min(x1 * x1, 1.0);
  }
  c1.value = v1;
  c1.verdict = Verdict::holds;
  c1.margin = kInf;
  rep.components.push_back(c1);

  Component c2;
  c2.name =
      "int (e^{theta x1} 1_{(1,inf)}(x1) + sum_{j>=2} e^{theta x_j}) dPi "
      "< inf";
  double v2 = 0.0;
  for (const SequenceAtom& at : c.pi) {
    const double x1 = at.sequence.front();
    double term = x1 > 1.0 ? std::exp(c.theta * x1) : 0.0;
    for (std::size_t k = 1; k < at.sequence.size(); ++k) {
      if (finite_entry(at.sequence[k])) {
        term += std::exp(c.theta * at.sequence[k]);
      }
    }
    v2 += at.rate * term;
  }
  c2.value = v2;
  c2.verdict = Verdict::holds;
  c2.margin = kInf;
  rep.components.push_back(c2);

  rep.finalize();
  return rep;
}

std::string PopulationTree::label(int i) const {
  if (particles[i].parent < 0) return "1";
  // Ordinal among the parent's children, in creation order.
  int ord = 0;
  for (int j = 0; j <= i; ++j) {
    if (particles[j].parent == particles[i].parent) ++ord;
  }
  return label(particles[i].parent) + "." + std::to_string(ord);
}

double PopulationTree::position_at(int i, double t) const {
  const TreeParticle& p = particles[i];
  auto it = std::lower_bound(p.knot_times.begin(), p.knot_times.end(), t);
  if (it == p.knot_times.end() || *it != t) {
    throw ValidationError("position_at: t is not a recorded knot time");
  }
  return p.knot_pos[it - p.knot_times.begin()];
}

std::vector<int> PopulationTree::alive(double t) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(particles.size()); ++i) {
    if (alive_at(i, t)) out.push_back(i);
  }
  return out;
}

PopulationTree simulate_population(const BranchingChars& c, double T,
                                   int max_particles, std::uint64_t seed,
                                   const std::vector<double>& snapshot_times) {
  validate_structure(c);
  if (!(T > 0.0)) throw ValidationError("simulate_population: T must be > 0");
  if (max_particles < 1) {
    throw ValidationError("simulate_population: max_particles must be >= 1");
  }
  std::vector<double> snaps = snapshot_times;
  snaps.push_back(T);
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  for (double s : snaps) {
    if (!(s >= 0.0) || s > T) {
      throw ValidationError("simulate_population: snapshots must lie in [0, T]");
    }
  }

  PopulationTree tree;
  tree.horizon = T;
  tree.seed = seed;
  tree.theta = c.theta;
  tree.kappa_theta = kappa_real(c, c.theta);

  const double a_eff = population_drift(c);
  const double sigma = std::sqrt(c.sigma2);
  const std::vector<AtomTable> atoms = atom_tables(c);
  const std::vector<double> cum = cumulative_rates(c);
  const double total_rate = cum.empty() ? 0.0 : cum.back();

  Rng rng(seed);
  tree.particles.push_back({});
  std::vector<int> stack{0};
  const std::size_t ns = snaps.size();

  while (!stack.empty()) {
    const int idx = stack.back();
    stack.pop_back();
    double t = tree.particles[idx].birth_time;
    double x = tree.particles[idx].birth_position;
    std::vector<double> kt{t}, kp{x};
    std::size_t si =
        std::upper_bound(snaps.begin(), snaps.end(), t) - snaps.begin();

    auto advance = [&](double s) {
      const double dt = s - t;
      x += a_eff * dt;
      if (sigma > 0.0 && dt > 0.0) x += sigma * std::sqrt(dt) * rng.normal();
      t = s;
    };

    while (true) {
      const double t_next =
          total_rate > 0.0 ? t + rng.exponential(total_rate) : kInf;
      while (si < ns && snaps[si] < t_next) {
        advance(snaps[si]);
        kt.push_back(t);
        kp.push_back(x);
        ++si;
      }
      if (si == ns) break;  // horizon knot recorded (T is the last snapshot)
      advance(t_next);
      const std::size_t a = pick_index(cum, rng);
      for (std::size_t k = 0; k < atoms[a].child_offsets.size(); ++k) {
        if (static_cast<int>(tree.particles.size()) >= max_particles) {
          tree.truncated = true;
          break;
        }
        TreeParticle child;
        child.parent = idx;
        child.child_k = static_cast<int>(k) + 2;
        child.birth_time = t;
        child.birth_position = x + atoms[a].child_offsets[k];
        tree.particles.push_back(std::move(child));
        stack.push_back(static_cast<int>(tree.particles.size()) - 1);
      }
      x += atoms[a].x1;
      kt.push_back(t);
      kp.push_back(x);
    }
    tree.particles[idx].knot_times = std::move(kt);
    tree.particles[idx].knot_pos = std::move(kp);
  }
  return tree;
}

double biggins_W(const PopulationTree& tree, double t) {
  if (t > tree.horizon) {
    throw ValidationError("biggins_W: t exceeds the tree horizon");
  }
  double w = 0.0;
  for (int i = 0; i < static_cast<int>(tree.particles.size()); ++i) {
    if (!tree.alive_at(i, t)) continue;
    w += std::exp(tree.theta * tree.position_at(i, t) -
                  t * tree.kappa_theta);
  }
  return w;
}

FunctionalBatch additive_functional_batch(const BranchingChars& c, double z,
                                          const std::vector<double>& times,
                                          int n_trees, int max_particles,
                                          std::uint64_t seed,
                                          ExecPolicy exec) {
  validate_structure(c);
  if (times.empty()) {
    throw ValidationError("additive_functional_batch: times must be non-empty");
  }
  if (!std::is_sorted(times.begin(), times.end()) || !(times.front() >= 0.0)) {
    throw ValidationError(
        "additive_functional_batch: times must be sorted and >= 0");
  }
  if (n_trees < 1 || max_particles < 1) {
    throw ValidationError("additive_functional_batch: bad batch parameters");
  }

  const double a_eff = population_drift(c);
  const double sigma = std::sqrt(c.sigma2);
  const std::vector<AtomTable> atoms = atom_tables(c);
  const std::vector<double> cum = cumulative_rates(c);
  const double total_rate = cum.empty() ? 0.0 : cum.back();
  const std::size_t nt = times.size();
  const std::uint64_t cap = static_cast<std::uint64_t>(max_particles);

  FunctionalBatch out;
  out.sums.assign(n_trees, {});
  out.truncated.assign(n_trees, 0);
  out.n_particles.assign(n_trees, 0);

  struct Pending {
    double t, x;
  };

  parallel_for(static_cast<std::size_t>(n_trees), exec, [&](std::size_t i) {
    Rng rng = substream(seed, i);
    std::vector<double> sums(nt, 0.0);
    std::vector<Pending> stack;
    stack.push_back({0.0, 0.0});
    std::uint64_t created = 1;
    bool truncated = false;

    while (!stack.empty()) {
      double t = stack.back().t;
      double x = stack.back().x;
      stack.pop_back();
      std::size_t si =
          std::lower_bound(times.begin(), times.end(), t) - times.begin();

      while (true) {
        const double t_next =
            total_rate > 0.0 ? t + rng.exponential(total_rate) : kInf;
        while (si < nt && times[si] < t_next) {
          const double dt = times[si] - t;
          x += a_eff * dt;
          if (sigma > 0.0 && dt > 0.0) {
            x += sigma * std::sqrt(dt) * rng.normal();
          }
          t = times[si];
          sums[si] += std::exp(z * x);
          ++si;
        }
        if (si == nt) break;
        const double dt = t_next - t;
        x += a_eff * dt;
        if (sigma > 0.0) x += sigma * std::sqrt(dt) * rng.normal();
        t = t_next;
        const std::size_t a = pick_index(cum, rng);
        for (double off : atoms[a].child_offsets) {
          if (created >= cap) {
            truncated = true;
            break;
          }
          stack.push_back({t, x + off});
          ++created;
        }
        x += atoms[a].x1;
      }
    }
    out.sums[i] = std::move(sums);
    out.truncated[i] = truncated ? 1 : 0;
    out.n_particles[i] = created;
  });
  return out;
}

ManyToOneResult verify_many_to_one(const BranchingChars& c, double z, double t,
                                   int n_samples, std::uint64_t seed,
                                   int max_particles, ExecPolicy exec) {
  if (n_samples < 2) {
    throw ValidationError("verify_many_to_one: n_samples must be >= 2");
  }
  const FunctionalBatch batch =
      additive_functional_batch(c, z, {t}, n_samples, max_particles, seed,
                                exec);
  ManyToOneResult res;
  res.rhs = std::exp(t * kappa_real(c, z));
  double mean = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    mean += batch.sums[i][0];
    res.n_truncated += batch.truncated[i];
  }
  mean /= n_samples;
  double var = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double d = batch.sums[i][0] - mean;
    var += d * d;
  }
  var /= (n_samples - 1);
  res.lhs = mean;
  res.std_error = std::sqrt(var / n_samples);
  res.z_score = res.std_error > 0.0 ? (res.lhs - res.rhs) / res.std_error
                                    : (res.lhs == res.rhs ? 0.0 : kInf);
  return res;
}

double hat_a(const BranchingChars& c) {
  validate_structure(c);
  double out = c.a + c.theta * c.sigma2;
  for (const SequenceAtom& at : c.pi) {
    double term = 0.0;
    for (double x : at.sequence) {
      if (finite_entry(x) && std::abs(x) <= 1.0) {
        term += x * std::exp(c.theta * x);
      }
    }
    const double x1 = at.sequence.front();
    if (std::abs(x1) <= 1.0) term -= x1;
    out += at.rate * term;
  }
  return out;
}

LevyTriplet spine_measures(const BranchingChars& c) {
  validate_structure(c);
  const double th = c.theta;
  LevyTriplet t;
  t.v2 = th * th * c.sigma2;

  double b = -0.5 * th * th * c.sigma2;
  std::map<std::pair<double, double>, double> merged;
  for (const SequenceAtom& at : c.pi) {
    const double e_sum = atom_exp_sum(at, th);
    double comp = 0.0;  // sum_k x_k e^{theta x_k} over |theta x_k| <= 1
    for (double x : at.sequence) {
      if (!finite_entry(x)) continue;
      const double w = std::exp(th * x);
      if (std::abs(th * x) <= 1.0) comp += x * w;
      const double i = -th * x;
      const double j = e_sum - w;
      if (i == 0.0 && j == 0.0) continue;
      merged[{i, j}] += at.rate * w;
    }
    b -= at.rate * (1.0 - e_sum + th * comp);
  }
  t.b = b;
  for (const auto& [key, rate] : merged) {
    t.coupled.push_back({key.first, key.second, rate});
  }
  return t;
}

CriterionReport check_ui_criterion(const BranchingChars& c) {
  CriterionReport rep = validate_branching(c);
  if (rep.verdict != Verdict::holds) return rep;
  rep.components.clear();

  const LevyTriplet spine = spine_measures(c);
  Component c1 = drift_to_infinity_component(spine);
  c1.name = "theta xi_t - t kappa(theta) -> -inf a.s.";
  if (c1.value.has_value()) {
    const double kp = kappa_prime(c, c.theta);
    const double k = kappa_real(c, c.theta);
    c1.note = "theta kappa'(theta) - kappa(theta) = " +
              std::to_string(c.theta * kp - k);
  }
  rep.components.push_back(c1);

  // A(y) = 1 + sum rate sum_k e^{theta x_k} ((-x_k) ^ y - 1)_+.
  auto A = [&](double y) {
    double s = 1.0;
    for (const SequenceAtom& at : c.pi) {
      double term = 0.0;
      for (double x : at.sequence) {
        if (!finite_entry(x)) continue;
        term += std::exp(c.theta * x) *
                std::max(std::min(-x, y) - 1.0, 0.0);
      }
      s += at.rate * term;
    }
    return s;
  };

  Component c2;
  c2.name = "Pi-integral of log(sum_{j!=k} e^{theta x_j}) / A < inf";
  double v = 0.0;
  const double e = std::exp(1.0);
  for (const SequenceAtom& at : c.pi) {
    const double e_sum = atom_exp_sum(at, c.theta);
    double term = 0.0;
    for (double x : at.sequence) {
      if (!finite_entry(x)) continue;
      const double w = std::exp(c.theta * x);
      const double sib = e_sum - w;
      if (sib > e) {
        const double ly = std::log(sib);
        term += w * ly / A(ly);
      }
    }
    v += at.rate * term;
  }
  c2.value = v;
  c2.verdict = Verdict::holds;  // finite sum for atomic Pi
  c2.margin = kInf;
  rep.components.push_back(c2);
  rep.finalize();
  return rep;
}

CriterionReport check_lp_criterion(const BranchingChars& c, double p) {
  if (!(p > 1.0) || !(p <= 2.0)) {
    throw ValidationError("check_lp_criterion: p must lie in (1, 2]");
  }
  CriterionReport rep = validate_branching(c);
  if (rep.verdict != Verdict::holds) return rep;
  rep.components.clear();

  Component c1;
  c1.name = "kappa(p theta) < p kappa(theta)";
  const double kp = kappa_real(c, p * c.theta);
  const double kt = kappa_real(c, c.theta);
  const double d = kp - p * kt;
  const double btol = 1e-12 * (1.0 + std::abs(kp) + p * std::abs(kt));
  c1.value = d;
  c1.margin = std::abs(d);
  if (std::abs(d) <= btol) {
    c1.verdict = Verdict::fails;
    c1.boundary = true;
    c1.note = "kappa(p theta) = p kappa(theta): strict inequality violated";
  } else {
    c1.verdict = d < 0.0 ? Verdict::holds : Verdict::fails;
  }
  rep.components.push_back(c1);

  Component c2;
  c2.name =
      "sum rate sum_k e^{theta x_k} (sum_{j!=k} e^{theta x_j})^{p-1} "
      "1_{(e,inf)} < inf";
  double v = 0.0;
  const double e = std::exp(1.0);
  for (const SequenceAtom& at : c.pi) {
    const double e_sum = atom_exp_sum(at, c.theta);
    double term = 0.0;
    for (double x : at.sequence) {
      if (!finite_entry(x)) continue;
      const double w = std::exp(c.theta * x);
      const double sib = e_sum - w;
      if (sib > e) term += w * std::pow(sib, p - 1.0);
    }
    v += at.rate * term;
  }
  c2.value = v;
  c2.verdict = Verdict::holds;  // finite sum for atomic Pi
  c2.margin = kInf;
  rep.components.push_back(c2);
  rep.finalize();
  return rep;
}

double SpineRealization::w_star() const {
  return std::exp(theta * xi_T - horizon * kappa_theta) + s_T;
}

SpineRealization simulate_spine(const BranchingChars& c, double T,
                                std::uint64_t seed) {
  validate_structure(c);
  if (!(T > 0.0)) throw ValidationError("simulate_spine: T must be > 0");

  SpineRealization out;
  out.horizon = T;
  out.seed = seed;
  out.theta = c.theta;
  out.kappa_theta = kappa_real(c, c.theta);

  // Event (a, k) table with weight rate_a e^{theta x_k}.
  struct Ev {
    int atom, k;
    double x_k, offspring_weight;
  };
  std::vector<Ev> events;
  std::vector<double> cum;
  double acc = 0.0;
  for (std::size_t a = 0; a < c.pi.size(); ++a) {
    const SequenceAtom& at = c.pi[a];
    const double e_sum = atom_exp_sum(at, c.theta);
    for (std::size_t k = 0; k < at.sequence.size(); ++k) {
      const double x = at.sequence[k];
      if (!finite_entry(x)) continue;
      const double w = at.rate * std::exp(c.theta * x);
      acc += w;
      events.push_back({static_cast<int>(a), static_cast<int>(k) + 1, x,
                        e_sum - std::exp(c.theta * x)});
      cum.push_back(acc);
    }
  }
  const double total = acc;

  // Uncompensated simulation of the spine jumps moves the [-1,1]
  // compensator of hat-a back out of the drift.
  double a_eff = c.a + c.theta * c.sigma2;
  for (const SequenceAtom& at : c.pi) {
    const double x1 = at.sequence.front();
    if (std::abs(x1) <= 1.0) a_eff -= at.rate * x1;
  }
  const double sigma = std::sqrt(c.sigma2);

  Rng rng(seed);
  double t = 0.0, xi = 0.0, s = 0.0;
  while (true) {
    const double t_next = total > 0.0 ? t + rng.exponential(total) : kInf;
    if (t_next >= T) break;
    const double dt = t_next - t;
    xi += a_eff * dt;
    if (sigma > 0.0) xi += sigma * std::sqrt(dt) * rng.normal();
    t = t_next;
    const std::size_t e = pick_index(cum, rng);
    const Ev& ev = events[e];
    s += std::exp(c.theta * xi - t * out.kappa_theta) * ev.offspring_weight;
    out.events.push_back(
        {t, ev.atom, ev.k, xi, ev.offspring_weight, s});
    xi += ev.x_k;
  }
  const double dt = T - t;
  xi += a_eff * dt;
  if (sigma > 0.0 && dt > 0.0) xi += sigma * std::sqrt(dt) * rng.normal();
  out.xi_T = xi;
  out.s_T = s;
  return out;
}

std::vector<double> spine_wstar_batch(const BranchingChars& c, double t,
                                      int n_samples, std::uint64_t seed,
                                      ExecPolicy exec) {
  if (n_samples < 1) {
    throw ValidationError("spine_wstar_batch: n_samples must be >= 1");
  }
  std::vector<double> out(n_samples);
  parallel_for(static_cast<std::size_t>(n_samples), exec, [&](std::size_t i) {
    out[i] = simulate_spine(c, t, subseed(seed, i)).w_star();
  });
  return out;
}

SpineIdentityResult check_spine_identity(const BranchingChars& c, double t,
                                         int n_samples, std::uint64_t seed,
                                         int max_particles, ExecPolicy exec) {
  if (n_samples < 2) {
    throw ValidationError("check_spine_identity: n_samples must be >= 2");
  }
  const std::vector<double> wstar =
      spine_wstar_batch(c, t, n_samples, subseed(seed, 1), exec);
  const FunctionalBatch pop = additive_functional_batch(
      c, c.theta, {t}, n_samples, max_particles, subseed(seed, 2), exec);
  const double kt = kappa_real(c, c.theta);
  const double scale = std::exp(-t * kt);

  SpineIdentityResult res;
  double m1 = 0.0;
  for (double w : wstar) m1 += w;
  m1 /= n_samples;
  double v1 = 0.0;
  for (double w : wstar) v1 += (w - m1) * (w - m1);
  v1 /= (n_samples - 1);

  std::vector<double> w2;
  w2.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    if (pop.truncated[i]) {
      ++res.n_truncated;
      continue;
    }
    const double w = pop.sums[i][0] * scale;
    w2.push_back(w * w);
  }
  if (w2.size() < 2) {
    throw NumericError("check_spine_identity: population batch truncated");
  }
  double m2 = 0.0;
  for (double v : w2) m2 += v;
  m2 /= w2.size();
  double v2 = 0.0;
  for (double v : w2) v2 += (v - m2) * (v - m2);
  v2 /= (w2.size() - 1);

  res.lhs = m1;
  res.rhs = m2;
  res.lhs_se = std::sqrt(v1 / n_samples);
  res.rhs_se = std::sqrt(v2 / w2.size());
  const double joint = std::sqrt(res.lhs_se * res.lhs_se +
                                 res.rhs_se * res.rhs_se);
  res.z_score = joint > 0.0 ? (res.lhs - res.rhs) / joint : 0.0;
  return res;
}

}  // namespace lpl
