#include "lpl/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lpl/errors.hpp"

namespace lpl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Mass of a density piece restricted to {|x| > eps}, and the matching
// compensation / bias integrals.
double piece_integral(const DensityPiece& d, double lo, double hi,
                      const std::function<double(double)>& f,
                      const QuadratureOptions& opt) {
  auto g = [&](double x) { return f(x) * d(x); };
  IntegralResult r = detail::integrate_interval(g, lo, hi, opt);
  if (!r.finite()) {
    throw NumericError("sampler: non-integrable density piece");
  }
  return r.value;
}
}  // namespace

double PathSampler::DensityTable::draw(double u) const {
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  std::size_t idx = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
  if (idx == 0) return xs.front();
  const double c0 = cdf[idx - 1], c1 = cdf[idx];
  const double w = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
  return xs[idx - 1] + w * (xs[idx] - xs[idx - 1]);
}

PathSampler::PathSampler(const LevyTriplet& t, SamplerOptions opt)
    : opt_(opt) {
  validate_triplet(t);
  const bool has_densities =
      !t.lambda1.densities.empty() || !t.lambda2.densities.empty();
  if (has_densities && !(opt_.eps > 0.0)) {
    throw ValidationError(
        "sampler: eps must be > 0 for measures with density parts; "
        "pick a positive truncation level");
  }
  if (has_densities && opt_.eps > 1.0) {
    throw ValidationError("sampler: eps must be <= 1");
  }
  v_ = std::sqrt(t.v2);
  b_eff_ = t.b;
  QuadratureOptions qopt;

  double cum = 0.0;
  auto push_event = [&](double rate, Event e) {
    if (rate <= 0.0) return;
    cum += rate;
    cum_rates_.push_back(cum);
    atom_events_.push_back(e);
  };

  // Atomic X-jumps, simulated uncompensated: the drift gives back the
  // compensator over {eps < |x| <= 1}. Atoms at or below eps stay in the
  // compensated band and are dropped without a drift adjustment.
  for (const Atom& a : t.lambda1.atoms) {
    if (std::abs(a.location) > opt_.eps) {
      push_event(a.mass, {a.location, 0.0});
      if (std::abs(a.location) <= 1.0) b_eff_ -= a.location * a.mass;
    }
  }
  // Atomic Z-jumps: no compensation (Z is drift-free bounded variation);
  // discarded atoms feed the bias bound.
  for (const Atom& a : t.lambda2.atoms) {
    if (std::abs(a.location) > opt_.eps) {
      push_event(a.mass, {0.0, a.location});
    } else {
      bias_bound_ += std::abs(a.location) * a.mass;
    }
  }
  // Coupled atoms are kept whole; only the X-component is compensated.
  for (const JointAtom& j : t.coupled) {
    push_event(j.rate, {j.x, j.y});
    if (std::abs(j.x) <= 1.0) b_eff_ -= j.x * j.rate;
  }

  // Density pieces: restrict to {|x| > eps}, build an inverse-CDF table.
  auto add_density = [&](const DensityPiece& d, bool is_x_side) {
    double lo = d.lo, hi = d.hi;
    if (hi <= 0.0) {  // negative support: restrict to x < -eps
      hi = std::min(hi, -opt_.eps);
    } else {
      lo = std::max(lo, opt_.eps);
    }
    if (is_x_side) {
      // Simulated jumps in {eps < |x| <= 1} come uncompensated, so their
      // compensator moves into the drift.
      const double slo = std::max(lo, -1.0);
      const double shi = std::min(hi, 1.0);
      if (slo < shi && lo < hi) {
        b_eff_ -= piece_integral(d, slo, shi, [](double x) { return x; }, qopt);
      }
    } else {
      // Discarded |y| <= eps mass bounds the bias of the Z truncation.
      double dlo = d.lo, dhi = d.hi;
      if (dhi <= 0.0) {
        dlo = std::max(dlo, -opt_.eps);
      } else {
        dhi = std::min(dhi, opt_.eps);
      }
      if (dlo < dhi) {
        bias_bound_ += piece_integral(
            d, dlo, dhi, [](double y) { return std::abs(y); }, qopt);
      }
    }
    if (!(lo < hi)) return;

    // Node layout: geometric toward the inner edge and toward infinity.
    DensityTable table;
    table.is_x_side = is_x_side;
    const bool negative = hi <= 0.0;
    const double alo = negative ? -hi : lo;
    double ahi = negative ? -lo : hi;
    if (std::isinf(ahi)) {
      // Find a numeric cutoff with negligible tail mass.
      double cut = std::max(2.0 * alo, 1.0);
      double tail;
      do {
        cut *= 2.0;
        tail = piece_integral(d, negative ? -2.0 * cut : cut,
                              negative ? -cut : 2.0 * cut,
                              [](double) { return 1.0; }, qopt);
      } while (tail > 1e-14 && cut < 1e12);
      ahi = 2.0 * cut;
    }
    const int n_nodes = 512;
    table.xs.resize(n_nodes + 1);
    const double ratio = std::pow(ahi / alo, 1.0 / n_nodes);
    for (int i = 0; i <= n_nodes; ++i) {
      double v = alo * std::pow(ratio, i);
      table.xs[i] = negative ? -v : v;
    }
    if (negative) std::reverse(table.xs.begin(), table.xs.end());
    table.cdf.resize(n_nodes + 1);
    table.cdf[0] = 0.0;
    for (int i = 1; i <= n_nodes; ++i) {
      const double seg = piece_integral(d, table.xs[i - 1], table.xs[i],
                                        [](double) { return 1.0; }, qopt);
      table.cdf[i] = table.cdf[i - 1] + seg;
    }
    const double mass = table.cdf.back();
    if (mass <= 0.0) return;
    cum += mass;
    cum_rates_.push_back(cum);
    atom_events_.push_back({0.0, 0.0});  // placeholder, resolved via table
    tables_.push_back(std::move(table));
  };

  for (const DensityPiece& d : t.lambda1.densities) add_density(d, true);
  for (const DensityPiece& d : t.lambda2.densities) add_density(d, false);

  total_rate_ = cum;
  if (!std::isfinite(total_rate_)) {
    throw NumericError("sampler: infinite jump rate above eps");
  }
}

PathSampler::Event PathSampler::draw_event(Rng& rng) const {
  const double u = rng.uniform() * total_rate_;
  auto it = std::upper_bound(cum_rates_.begin(), cum_rates_.end(), u);
  std::size_t idx =
      std::min<std::size_t>(it - cum_rates_.begin(), cum_rates_.size() - 1);
  const std::size_t n_atoms = atom_events_.size() - tables_.size();
  if (idx < n_atoms) return atom_events_[idx];
  const DensityTable& table = tables_[idx - n_atoms];
  const double v = table.draw(rng.uniform());
  return table.is_x_side ? Event{v, 0.0} : Event{0.0, v};
}

PathSkeleton PathSampler::sample(double T, std::uint64_t seed) const {
  if (!(T > 0.0)) throw ValidationError("sample_path: T must be > 0");
  Rng rng(seed);
  PathSkeleton sk;
  sk.horizon = T;
  sk.truncation_eps = opt_.eps;
  sk.seed = seed;
  sk.small_jump_bias_bound = bias_bound_ * T;

  // Jump times first (sequential exponential arrivals), then merge with the
  // Brownian grid; sequential Gaussian increments over the merged set are
  // exact, so no bridge correction is needed.
  std::vector<double> jump_times;
  std::vector<Event> events;
  if (total_rate_ > 0.0) {
    double t = rng.exponential(total_rate_);
    while (t < T) {
      jump_times.push_back(t);
      events.push_back(draw_event(rng));
      t += rng.exponential(total_rate_);
    }
  }

  const int n_grid = std::max(1, static_cast<int>(
                                     std::ceil(T * opt_.grid_per_unit)));
  sk.times.push_back(0.0);
  std::size_t next_jump = 0;
  for (int i = 1; i <= n_grid; ++i) {
    const double tg = T * i / n_grid;
    while (next_jump < jump_times.size() && jump_times[next_jump] < tg) {
      sk.times.push_back(jump_times[next_jump++]);
    }
    sk.times.push_back(tg);
  }

  sk.x.resize(sk.times.size());
  sk.z.resize(sk.times.size());
  sk.x[0] = 0.0;
  sk.z[0] = 0.0;
  next_jump = 0;
  for (std::size_t i = 1; i < sk.times.size(); ++i) {
    const double dt = sk.times[i] - sk.times[i - 1];
    double x = sk.x[i - 1] + b_eff_ * dt;
    if (v_ > 0.0 && dt > 0.0) x += v_ * std::sqrt(dt) * rng.normal();
    double z = sk.z[i - 1];
    if (next_jump < jump_times.size() &&
        sk.times[i] == jump_times[next_jump]) {
      const Event& e = events[next_jump];
      sk.jumps.push_back({sk.times[i], e.dx, e.dz, x});
      x += e.dx;
      z += e.dz;
      ++next_jump;
    }
    sk.x[i] = x;
    sk.z[i] = z;
  }
  return sk;
}

EmbeddingPair PathSampler::sample_mq(std::uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> jump_times;
  std::vector<Event> events;
  if (total_rate_ > 0.0) {
    double t = rng.exponential(total_rate_);
    while (t < 1.0) {
      jump_times.push_back(t);
      events.push_back(draw_event(rng));
      t += rng.exponential(total_rate_);
    }
  }
  double x = 0.0, q = 0.0, t_prev = 0.0;
  for (std::size_t k = 0; k < jump_times.size(); ++k) {
    const double dt = jump_times[k] - t_prev;
    x += b_eff_ * dt;
    if (v_ > 0.0 && dt > 0.0) x += v_ * std::sqrt(dt) * rng.normal();
    if (events[k].dz != 0.0) q += std::exp(-x) * events[k].dz;
    x += events[k].dx;
    t_prev = jump_times[k];
  }
  const double dt = 1.0 - t_prev;
  x += b_eff_ * dt;
  if (v_ > 0.0 && dt > 0.0) x += v_ * std::sqrt(dt) * rng.normal();
  return {std::exp(-x), q};
}

PathSkeleton sample_path(const LevyTriplet& t, double T, double eps,
                         std::uint64_t seed) {
  SamplerOptions opt;
  opt.eps = eps;
  return PathSampler(t, opt).sample(T, seed);
}

EmbeddingPair mq_from_skeleton(const PathSkeleton& s) {
  double q = 0.0;
  for (const JumpRecord& j : s.jumps) {
    if (j.time <= 1.0 && j.dz != 0.0) q += std::exp(-j.x_left) * j.dz;
  }
  double x1 = s.x.back();
  if (s.horizon != 1.0) {
    // X_1 from the skeleton grid when the horizon differs from 1.
    auto it = std::lower_bound(s.times.begin(), s.times.end(), 1.0);
    if (it == s.times.end() || *it != 1.0) {
      throw ValidationError("mq_from_skeleton: skeleton does not cover t = 1");
    }
    x1 = s.x[it - s.times.begin()];
  }
  return {std::exp(-x1), q};
}

EmbeddingPair sample_MQ(const LevyTriplet& t, double eps, std::uint64_t seed) {
  SamplerOptions opt;
  opt.eps = eps;
  return PathSampler(t, opt).sample_mq(seed);
}

}  // namespace lpl
