#include "lpl/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "lpl/branching.hpp"
#include "lpl/errors.hpp"
#include "lpl/jsonout.hpp"
#include "lpl/perpetuity.hpp"

namespace lpl {

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit_criterion(JsonWriter& w, const CriterionReport& rep) {
  w.begin_object();
  w.key("verdict").value(to_string(rep.verdict));
  w.key("notes").value(rep.notes);
  w.key("components").begin_array();
  for (const Component& c : rep.components) {
    w.begin_object();
    w.key("name").value(c.name);
    if (c.value) {
      w.key("value").value(*c.value);
    } else {
      w.key("value").value_null();
    }
    w.key("divergent").value(c.divergent);
    w.key("margin").value(c.margin);
    w.key("verdict").value(to_string(c.verdict));
    w.key("boundary").value(c.boundary);
    w.key("note").value(c.note);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

void run_validate(const RunConfig& c, JsonWriter& w) {
  if (c.has_triplet) {
    const CriterionReport rep = validate_standing_assumptions(
        c.triplet.lambda1_marginal(), c.triplet.lambda2_marginal());
    w.key("standing_assumptions");
    emit_criterion(w, rep);
  } else {
    w.key("branching_assumptions");
    emit_criterion(w, validate_branching(c.chars));
  }
}

void run_criteria_perpetuity(const RunConfig& c, JsonWriter& w) {
  const CriterionReport as_fin = check_as_finiteness(c.triplet);
  const CriterionReport mom = check_moment_finiteness(c.triplet, c.p);
  w.key("as_finiteness");
  emit_criterion(w, as_fin);
  w.key("p").value(c.p);
  w.key("moment_finiteness");
  emit_criterion(w, mom);
  const double psi = laplace_exponent_X(c.triplet, c.p);
  w.key("psi_p").value(psi);
  // Same condition in multiplicative form.
  w.key("E_exp_minus_pX1").value(std::exp(psi));
  const double p_max = std::max(8.0, 4.0 * c.p);
  w.key("critical_moment");
  try {
    const auto p_star = critical_moment(c.triplet, p_max);
    if (p_star) {
      w.value(*p_star);
    } else {
      w.value_null();
    }
  } catch (const NumericError&) {
    w.value_null();
  }
}

void run_criteria_branching(const RunConfig& c, JsonWriter& w) {
  const double p = (c.p > 1.0 && c.p <= 2.0) ? c.p : 2.0;
  w.key("kappa_theta").value(kappa_real(c.chars, c.chars.theta));
  w.key("hat_a").value(hat_a(c.chars));
  w.key("ui");
  emit_criterion(w, check_ui_criterion(c.chars));
  w.key("p").value(p);
  w.key("lp");
  emit_criterion(w, check_lp_criterion(c.chars, p));
}

void run_simulate_perpetuity(const RunConfig& c, std::uint64_t seed,
                             ExecPolicy exec, JsonWriter& w, RunReport& out) {
  SamplerOptions sopt;
  sopt.eps = c.eps;
  const LevyPairSource src(c.triplet, sopt);
  const std::vector<PerpetuitySample> batch =
      perpetuity_batch(src, c.n_samples, c.n_iter, IterationPolicy{}, seed,
                       exec);

  std::string csv = "index,value,n_iterations,overflow\n";
  double mean = 0.0;
  int used = 0, overflow = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const PerpetuitySample& s = batch[i];
    csv += std::to_string(i) + "," + fmt(s.value) + "," +
           std::to_string(s.n_iterations) + "," +
           (s.overflow ? "1" : "0") + "\n";
    if (s.overflow) {
      ++overflow;
    } else {
      mean += s.value;
      ++used;
    }
  }
  if (used > 0) mean /= used;
  out.csv["samples.csv"] = std::move(csv);

  w.key("n_samples").value(c.n_samples);
  w.key("n_overflow").value(overflow);
  w.key("mean").value(mean);
  w.key("small_jump_bias_bound").value(src.sampler().small_jump_bias_bound());

  for (int i = 0; i < c.dump_paths; ++i) {
    const PathSkeleton sk =
        sample_path(c.triplet, c.T, c.eps, subseed(seed, 1u << 20 | i));
    std::string pcsv = "time,X,Z,is_jump,i_k,j_k\n";
    std::size_t j = 0;
    for (std::size_t k = 0; k < sk.times.size(); ++k) {
      double ik = 0.0, jk = 0.0;
      bool is_jump = false;
      if (j < sk.jumps.size() && sk.jumps[j].time == sk.times[k]) {
        is_jump = true;
        ik = sk.jumps[j].dx;
        jk = sk.jumps[j].dz;
        ++j;
      }
      pcsv += fmt(sk.times[k]) + "," + fmt(sk.x[k]) + "," + fmt(sk.z[k]) +
              "," + (is_jump ? "1" : "0") + "," + fmt(ik) + "," + fmt(jk) +
              "\n";
    }
    out.csv["path_" + std::to_string(i) + ".csv"] = std::move(pcsv);
  }
}

void run_estimate_moment(const RunConfig& c, std::uint64_t seed,
                         ExecPolicy exec, JsonWriter& w, RunReport& out) {
  const MomentEstimate est = estimate_abs_moment(c.triplet, c.p, c.n_samples,
                                                 c.n_iter, c.eps, seed, exec);
  std::string csv = "p,n_samples,n_iter,estimate,std_error,stable_flag\n";
  csv += fmt(c.p) + "," + std::to_string(c.n_samples) + "," +
         std::to_string(c.n_iter) + "," + fmt(est.estimate) + "," +
         fmt(est.std_error) + "," + (est.stable ? "1" : "0") + "\n";
  out.csv["moments.csv"] = std::move(csv);

  w.key("p").value(c.p);
  w.key("estimate").value(est.estimate);
  w.key("std_error").value(est.std_error);
  w.key("stable").value(est.stable);
  w.key("n_used").value(est.n_used);
  w.key("n_overflow").value(est.n_overflow);
  w.key("batch_spread").value(est.batch_spread);
}

void run_simulate_branching(const RunConfig& c, std::uint64_t seed,
                            JsonWriter& w, RunReport& out) {
  const PopulationTree tree =
      simulate_population(c.chars, c.T, c.max_particles, seed, c.times);
  std::string csv = "label,birth_time,position\n";
  for (int i = 0; i < static_cast<int>(tree.particles.size()); ++i) {
    csv += tree.label(i) + "," + fmt(tree.particles[i].birth_time) + "," +
           fmt(tree.position_at(i, tree.horizon)) + "\n";
  }
  out.csv["population.csv"] = std::move(csv);

  w.key("T").value(c.T);
  w.key("n_particles").value(static_cast<std::int64_t>(tree.particles.size()));
  w.key("truncated").value(tree.truncated);
  w.key("W_T").value(biggins_W(tree, tree.horizon));
}

void run_verify_martingale(const RunConfig& c, std::uint64_t seed,
                           ExecPolicy exec, JsonWriter& w, RunReport& out) {
  std::vector<double> times = c.times;
  if (times.empty()) times.push_back(c.T);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const FunctionalBatch batch =
      additive_functional_batch(c.chars, c.chars.theta, times, c.n_samples,
                                c.max_particles, seed, exec);
  const double kt = kappa_real(c.chars, c.chars.theta);

  std::string csv = "t,W_t\n";
  w.key("n_samples").value(c.n_samples);
  w.key("trace").begin_array();
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double scale = std::exp(-times[ti] * kt);
    double mean = 0.0;
    int used = 0, truncated = 0;
    for (int i = 0; i < c.n_samples; ++i) {
      if (batch.truncated[i]) {
        ++truncated;
        continue;
      }
      mean += batch.sums[i][ti] * scale;
      ++used;
    }
    if (used == 0) {
      throw NumericError("verify-martingale: every tree hit the particle cap");
    }
    mean /= used;
    double var = 0.0;
    for (int i = 0; i < c.n_samples; ++i) {
      if (batch.truncated[i]) continue;
      const double d = batch.sums[i][ti] * scale - mean;
      var += d * d;
    }
    var = used > 1 ? var / (used - 1) : 0.0;
    const double se = std::sqrt(var / used);
    csv += fmt(times[ti]) + "," + fmt(mean) + "\n";
    w.begin_object();
    w.key("t").value(times[ti]);
    w.key("mean_W").value(mean);
    w.key("std_error").value(se);
    w.key("z_vs_1").value(se > 0.0 ? (mean - 1.0) / se : 0.0);
    w.key("n_truncated").value(truncated);
    w.end_object();
  }
  w.end_array();
  out.csv["martingale_trace.csv"] = std::move(csv);
}

void run_spine(const RunConfig& c, std::uint64_t seed, ExecPolicy exec,
               JsonWriter& w, RunReport& out) {
  const std::vector<double> wstar =
      spine_wstar_batch(c.chars, c.T, c.n_samples, subseed(seed, 1), exec);
  std::string csv = "index,w_star\n";
  double mean = 0.0;
  for (std::size_t i = 0; i < wstar.size(); ++i) {
    csv += std::to_string(i) + "," + fmt(wstar[i]) + "\n";
    mean += wstar[i];
  }
  mean /= wstar.size();
  out.csv["samples.csv"] = std::move(csv);

  const SpineIdentityResult id = check_spine_identity(
      c.chars, c.T, c.n_samples, seed, c.max_particles, exec);
  w.key("T").value(c.T);
  w.key("n_samples").value(c.n_samples);
  w.key("mean_w_star").value(mean);
  w.key("identity").begin_object();
  w.key("spine_E_w_star").value(id.lhs);
  w.key("population_E_W_sq").value(id.rhs);
  w.key("spine_se").value(id.lhs_se);
  w.key("population_se").value(id.rhs_se);
  w.key("z_score").value(id.z_score);
  w.key("n_truncated").value(id.n_truncated);
  w.end_object();
}

}  // namespace

RunReport run(const RunConfig& config, ExecPolicy exec) {
  RunConfig c = config;
  if (!c.seed_given) {
    std::random_device rd;
    c.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    c.seed_given = true;
  }
  RunReport out;
  out.seed = c.seed;

  JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(1);
  w.key("config").value_raw(config_to_json(c));
  w.key("results").begin_object();
  switch (c.mode) {
    case RunMode::validate:
      run_validate(c, w);
      break;
    case RunMode::criteria_perpetuity:
      run_criteria_perpetuity(c, w);
      break;
    case RunMode::criteria_branching:
      run_criteria_branching(c, w);
      break;
    case RunMode::simulate_perpetuity:
      run_simulate_perpetuity(c, c.seed, exec, w, out);
      break;
    case RunMode::estimate_moment:
      run_estimate_moment(c, c.seed, exec, w, out);
      break;
    case RunMode::simulate_branching:
      run_simulate_branching(c, c.seed, w, out);
      break;
    case RunMode::verify_martingale:
      run_verify_martingale(c, c.seed, exec, w, out);
      break;
    case RunMode::spine:
      run_spine(c, c.seed, exec, w, out);
      break;
  }
  w.end_object();
  w.key("artifacts").begin_array();
  w.value("report.json");
  for (const auto& [name, contents] : out.csv) w.value(name);
  w.end_array();
  w.end_object();
  out.json = w.str();
  out.json += "\n";
  return out;
}

std::vector<std::string> emit_report(const RunReport& report,
                                     const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  auto write = [&](const std::string& name, const std::string& contents) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw NumericError("emit_report: cannot write " + path.string());
    f << contents;
    if (!f) throw NumericError("emit_report: write failed for " +
                               path.string());
    return path.string();
  };
  std::vector<std::string> paths;
  paths.push_back(write("report.json", report.json));
  for (const auto& [name, contents] : report.csv) {
    paths.push_back(write(name, contents));
  }
  return paths;
}

}  // namespace lpl
