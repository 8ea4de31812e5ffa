#include "lpl/config.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "lpl/errors.hpp"
#include "lpl/jsonout.hpp"
#include "lpl/measures.hpp"
#include "json.hpp"

namespace lpl {

namespace {
using nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const json& field(const json& j, const std::string& path,
                  const std::string& name) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(name);
  if (it == j.end()) bad(path + "." + name, "missing required field");
  return *it;
}

// Numbers, with "inf" / "-inf" string tokens for the infinities.
double number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    bad(path, "expected a number or \"inf\"/\"-inf\", got \"" + s + "\"");
  }
  bad(path, "expected a number");
}

double number_field(const json& j, const std::string& path,
                    const std::string& name) {
  return number(field(j, path, name), path + "." + name);
}

double number_or(const json& j, const std::string& path,
                 const std::string& name, double dflt) {
  if (!j.is_object() || !j.contains(name)) return dflt;
  return number(j.at(name), path + "." + name);
}

int int_or(const json& j, const std::string& path, const std::string& name,
           int dflt) {
  if (!j.is_object() || !j.contains(name)) return dflt;
  const json& v = j.at(name);
  if (!v.is_number_integer()) bad(path + "." + name, "expected an integer");
  return v.get<int>();
}

LevyMeasure parse_measure(const json& j, const std::string& path) {
  LevyMeasure m;
  if (!j.is_object()) bad(path, "expected an object");
  if (j.contains("atoms")) {
    const json& atoms = j.at("atoms");
    if (!atoms.is_array()) bad(path + ".atoms", "expected an array");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string p = path + ".atoms[" + std::to_string(i) + "]";
      const json& a = atoms[i];
      if (!a.is_array() || a.size() != 2) {
        bad(p, "expected a [location, mass] pair");
      }
      m.atoms.push_back({number(a[0], p + "[0]"), number(a[1], p + "[1]")});
    }
  }
  if (j.contains("densities")) {
    const json& ds = j.at("densities");
    if (!ds.is_array()) bad(path + ".densities", "expected an array");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const std::string p = path + ".densities[" + std::to_string(i) + "]";
      const json& d = ds[i];
      DensityPiece piece;
      const json& fam = field(d, p, "family");
      if (!fam.is_string()) bad(p + ".family", "expected a family name");
      try {
        piece.family = density_family_from_string(fam.get<std::string>());
      } catch (const ValidationError& e) {
        bad(p + ".family", e.what());
      }
      piece.lo = number_field(d, p, "lo");
      piece.hi = number_field(d, p, "hi");
      piece.coef = number_or(d, p, "coef", 1.0);
      piece.param = number_or(d, p, "param", 0.0);
      if (d.contains("hint")) {
        piece.integrability_hint = number(d.at("hint"), p + ".hint");
      }
      m.densities.push_back(piece);
    }
  }
  return m;
}

LevyTriplet parse_triplet(const json& j, const std::string& path) {
  LevyTriplet t;
  t.v2 = number_or(j, path, "v2", 0.0);
  t.b = number_or(j, path, "b", 0.0);
  if (j.contains("lambda1")) {
    t.lambda1 = parse_measure(j.at("lambda1"), path + ".lambda1");
  }
  if (j.contains("lambda2")) {
    t.lambda2 = parse_measure(j.at("lambda2"), path + ".lambda2");
  }
  if (j.contains("coupled")) {
    const json& cs = j.at("coupled");
    if (!cs.is_array()) bad(path + ".coupled", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string p = path + ".coupled[" + std::to_string(i) + "]";
      const json& a = cs[i];
      if (!a.is_array() || a.size() != 3) {
        bad(p, "expected an [x, y, rate] triple");
      }
      t.coupled.push_back({number(a[0], p + "[0]"), number(a[1], p + "[1]"),
                           number(a[2], p + "[2]")});
    }
  }
  return t;
}

BranchingChars parse_chars(const json& j, const std::string& path) {
  BranchingChars c;
  c.sigma2 = number_or(j, path, "sigma2", 0.0);
  c.a = number_or(j, path, "a", 0.0);
  c.theta = number_field(j, path, "theta");
  const json& pi = field(j, path, "pi");
  if (!pi.is_array()) bad(path + ".pi", "expected an array");
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const std::string p = path + ".pi[" + std::to_string(i) + "]";
    const json& a = pi[i];
    SequenceAtom atom;
    atom.rate = number_or(a, p, "rate", 1.0);
    const json& seq = field(a, p, "sequence");
    if (!seq.is_array() || seq.empty()) {
      bad(p + ".sequence", "expected a non-empty array");
    }
    for (std::size_t k = 0; k < seq.size(); ++k) {
      atom.sequence.push_back(
          number(seq[k], p + ".sequence[" + std::to_string(k) + "]"));
    }
    c.pi.push_back(std::move(atom));
  }
  return c;
}
}  // namespace

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::validate: return "validate";
    case RunMode::criteria_perpetuity: return "criteria-perpetuity";
    case RunMode::criteria_branching: return "criteria-branching";
    case RunMode::simulate_perpetuity: return "simulate-perpetuity";
    case RunMode::estimate_moment: return "estimate-moment";
    case RunMode::simulate_branching: return "simulate-branching";
    case RunMode::verify_martingale: return "verify-martingale";
    case RunMode::spine: return "spine";
  }
  return "?";
}

RunMode run_mode_from_string(const std::string& s) {
  for (RunMode m :
       {RunMode::validate, RunMode::criteria_perpetuity,
        RunMode::criteria_branching, RunMode::simulate_perpetuity,
        RunMode::estimate_moment, RunMode::simulate_branching,
        RunMode::verify_martingale, RunMode::spine}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("mode: unknown mode \"" + s + "\"");
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.empty()) {
    throw ConfigError("config: expected a non-empty JSON object");
  }

  RunConfig c;
  const json& mode = field(j, "config", "mode");
  if (!mode.is_string()) bad("config.mode", "expected a string");
  try {
    c.mode = run_mode_from_string(mode.get<std::string>());
  } catch (const ConfigError&) {
    bad("config.mode", "unknown mode \"" + mode.get<std::string>() + "\"");
  }

  const json& model = field(j, "config", "model");
  const json& type = field(model, "config.model", "type");
  if (!type.is_string()) bad("config.model.type", "expected a string");
  const std::string ts = type.get<std::string>();
  if (ts == "levy_triplet") {
    c.has_triplet = true;
    c.triplet = parse_triplet(model, "config.model");
  } else if (ts == "branching") {
    c.has_chars = true;
    c.chars = parse_chars(model, "config.model");
  } else {
    bad("config.model.type",
        "expected \"levy_triplet\" or \"branching\", got \"" + ts + "\"");
  }

  const bool wants_chars = c.mode == RunMode::criteria_branching ||
                           c.mode == RunMode::simulate_branching ||
                           c.mode == RunMode::verify_martingale ||
                           c.mode == RunMode::spine;
  const bool wants_triplet = c.mode == RunMode::criteria_perpetuity ||
                             c.mode == RunMode::simulate_perpetuity ||
                             c.mode == RunMode::estimate_moment;
  if (wants_chars && !c.has_chars) {
    bad("config.model", "mode " + to_string(c.mode) +
                            " requires a branching model");
  }
  if (wants_triplet && !c.has_triplet) {
    bad("config.model", "mode " + to_string(c.mode) +
                            " requires a levy_triplet model");
  }

  c.p = number_or(j, "config", "p", 1.0);
  c.T = number_or(j, "config", "T", 1.0);
  c.n_samples = int_or(j, "config", "n_samples", 1000);
  c.n_iter = int_or(j, "config", "n_iter", 0);
  c.eps = number_or(j, "config", "eps", 1e-3);
  c.max_particles = int_or(j, "config", "max_particles", 1000000);
  c.dump_paths = int_or(j, "config", "dump_paths", 0);
  if (j.contains("times")) {
    const json& ts2 = j.at("times");
    if (!ts2.is_array()) bad("config.times", "expected an array");
    for (std::size_t i = 0; i < ts2.size(); ++i) {
      c.times.push_back(
          number(ts2[i], "config.times[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !s.is_number_integer()) {
      bad("config.seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
    c.seed_given = true;
  }
  if (j.contains("output_dir")) {
    const json& od = j.at("output_dir");
    if (!od.is_string()) bad("config.output_dir", "expected a string");
    c.output_dir = od.get<std::string>();
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {
void emit_measure(JsonWriter& w, const LevyMeasure& m) {
  w.begin_object();
  w.key("atoms").begin_array();
  for (const Atom& a : m.atoms) {
    w.begin_array().value(a.location).value(a.mass).end_array();
  }
  w.end_array();
  w.key("densities").begin_array();
  for (const DensityPiece& d : m.densities) {
    w.begin_object();
    w.key("family").value(to_string(d.family));
    w.key("lo").value(d.lo);
    w.key("hi").value(d.hi);
    w.key("coef").value(d.coef);
    w.key("param").value(d.param);
    if (d.integrability_hint) w.key("hint").value(*d.integrability_hint);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}
}  // namespace

std::string config_to_json(const RunConfig& c) {
  JsonWriter w;
  w.begin_object();
  w.key("mode").value(to_string(c.mode));
  w.key("model").begin_object();
  if (c.has_triplet) {
    w.key("type").value("levy_triplet");
    w.key("v2").value(c.triplet.v2);
    w.key("b").value(c.triplet.b);
    w.key("lambda1");
    emit_measure(w, c.triplet.lambda1);
    w.key("lambda2");
    emit_measure(w, c.triplet.lambda2);
    w.key("coupled").begin_array();
    for (const JointAtom& a : c.triplet.coupled) {
      w.begin_array().value(a.x).value(a.y).value(a.rate).end_array();
    }
    w.end_array();
  } else {
    w.key("type").value("branching");
    w.key("sigma2").value(c.chars.sigma2);
    w.key("a").value(c.chars.a);
    w.key("theta").value(c.chars.theta);
    w.key("pi").begin_array();
    for (const SequenceAtom& at : c.chars.pi) {
      w.begin_object();
      w.key("rate").value(at.rate);
      w.key("sequence").begin_array();
      for (double x : at.sequence) w.value(x);
      w.end_array();
      w.end_object();
    }
    w.end_array();
  }
  w.end_object();
  w.key("p").value(c.p);
  w.key("T").value(c.T);
  w.key("n_samples").value(c.n_samples);
  w.key("n_iter").value(c.n_iter);
  w.key("eps").value(c.eps);
  w.key("max_particles").value(c.max_particles);
  w.key("dump_paths").value(c.dump_paths);
  w.key("times").begin_array();
  for (double t : c.times) w.value(t);
  w.end_array();
  if (c.seed_given) w.key("seed").value(c.seed);
  w.key("output_dir").value(c.output_dir);
  w.end_object();
  return w.str();
}

}  // namespace lpl
