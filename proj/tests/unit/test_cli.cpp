#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lpl/config.hpp"
#include "lpl/errors.hpp"
#include "lpl/runner.hpp"

using namespace lpl;

namespace {

std::string perpetuity_config(const std::string& mode,
                              const std::string& extra = "") {
  return R"({
    "mode": ")" + mode + R"(",
    "model": {
      "type": "levy_triplet",
      "v2": 1.0,
      "b": 1.0,
      "lambda2": {"atoms": [[1.0, 1.0]]}
    },
    "p": 1.0,
    "n_samples": 200,
    "seed": 42)" + extra + R"(
  })";
}

std::string branching_config(const std::string& mode, double theta,
                             const std::string& extra = "") {
  return R"({
    "mode": ")" + mode + R"(",
    "model": {
      "type": "branching",
      "sigma2": 1.0,
      "a": 0.0,
      "theta": )" + std::to_string(theta) + R"(,
      "pi": [{"rate": 1.0, "sequence": [0.0, 0.0]}]
    },
    "T": 1.0,
    "n_samples": 200,
    "seed": 42)" + extra + R"(
  })";
}

}  // namespace

TEST_CASE("config parsing basics") {
  const RunConfig c = parse_config(perpetuity_config("criteria-perpetuity"));
  CHECK(c.mode == RunMode::criteria_perpetuity);
  CHECK(c.has_triplet);
  CHECK(c.triplet.v2 == 1.0);
  CHECK(c.triplet.lambda2.atoms.size() == 1);
  CHECK(c.seed == 42);
  CHECK(c.seed_given);

  const RunConfig b = parse_config(branching_config("criteria-branching", 1.5));
  CHECK(b.mode == RunMode::criteria_branching);
  CHECK(b.has_chars);
  CHECK(b.chars.pi.size() == 1);
}

TEST_CASE("minus infinity sequence entries parse from the string token") {
  const std::string cfg = R"({
    "mode": "validate",
    "model": {
      "type": "branching",
      "theta": 1.0,
      "pi": [{"rate": 1.0, "sequence": [0.0, "-inf"]}]
    }
  })";
  const RunConfig c = parse_config(cfg);
  REQUIRE(c.chars.pi.size() == 1);
  REQUIRE(c.chars.pi[0].sequence.size() == 2);
  CHECK(std::isinf(c.chars.pi[0].sequence[1]));
  CHECK(c.chars.pi[0].sequence[1] < 0.0);
}

TEST_CASE("config errors carry field paths") {
  CHECK_THROWS_AS(parse_config("{}"), ConfigError);

  try {
    parse_config(R"({"mode": "no-such-mode"})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("config.mode") != std::string::npos);
  }

  // A branching model under a perpetuity mode is a config error.
  CHECK_THROWS_AS(parse_config(branching_config("criteria-perpetuity", 1.0)),
                  ConfigError);

  try {
    parse_config(R"({
      "mode": "validate",
      "model": {"type": "branching", "theta": 1.0,
                "pi": [{"rate": 1.0, "sequence": [0.0, "nope"]}]}
    })");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sequence") != std::string::npos);
  }
}

TEST_CASE("config serialization round-trips byte-identically") {
  const std::vector<std::string> sources = {
      perpetuity_config("criteria-perpetuity"),
      perpetuity_config("simulate-perpetuity", ",\n    \"dump_paths\": 1"),
      branching_config("criteria-branching", 1.5),
      branching_config("verify-martingale", 0.5,
                       ",\n    \"times\": [0.5, 1.0]"),
  };
  for (const std::string& src : sources) {
    const std::string once = config_to_json(parse_config(src));
    const std::string twice = config_to_json(parse_config(once));
    CHECK(once == twice);
  }
}

TEST_CASE("runs are deterministic given config and seed") {
  const std::vector<std::string> sources = {
      perpetuity_config("validate"),
      perpetuity_config("criteria-perpetuity"),
      perpetuity_config("simulate-perpetuity", ",\n    \"dump_paths\": 1"),
      perpetuity_config("estimate-moment"),
      branching_config("validate", 1.0),
      branching_config("criteria-branching", 1.5),
      branching_config("simulate-branching", 0.5),
      branching_config("verify-martingale", 0.5,
                       ",\n    \"times\": [0.5, 1.0]"),
      branching_config("spine", 0.5),
  };
  for (const std::string& src : sources) {
    const RunConfig cfg = parse_config(src);
    const RunReport a = run(cfg);
    const RunReport b = run(cfg);
    CHECK(a.json == b.json);
    CHECK(a.csv == b.csv);

    // The report regenerates byte-identically from its echoed config.
    const nlohmann::json doc = nlohmann::json::parse(a.json);
    const RunConfig echoed = parse_config(doc.at("config").dump());
    const RunReport c = run(echoed);
    CHECK(c.json == a.json);
    CHECK(c.csv == a.csv);
  }
}

TEST_CASE("a missing seed is drawn and echoed for reproducibility") {
  RunConfig cfg = parse_config(perpetuity_config("validate"));
  cfg.seed_given = false;
  cfg.seed = 0;
  const RunReport rep = run(cfg);
  const nlohmann::json doc = nlohmann::json::parse(rep.json);
  CHECK(doc.at("config").contains("seed"));
  CHECK(doc.at("config").at("seed").get<std::uint64_t>() == rep.seed);
}

TEST_CASE("mode-specific CSV artifacts carry their schema headers") {
  const RunReport mom = run(parse_config(perpetuity_config("estimate-moment")));
  REQUIRE(mom.csv.count("moments.csv"));
  CHECK(mom.csv.at("moments.csv").rfind(
            "p,n_samples,n_iter,estimate,std_error,stable_flag\n", 0) == 0);

  const RunReport mart = run(parse_config(branching_config(
      "verify-martingale", 0.5, ",\n    \"times\": [1.0, 0.5]")));
  REQUIRE(mart.csv.count("martingale_trace.csv"));
  const std::string& trace = mart.csv.at("martingale_trace.csv");
  CHECK(trace.rfind("t,W_t\n", 0) == 0);
  // Rows sorted by t even when the config lists times out of order.
  CHECK(trace.find("\n0.5,") < trace.find("\n1,"));

  const RunReport sim =
      run(parse_config(perpetuity_config("simulate-perpetuity",
                                         ",\n    \"dump_paths\": 2")));
  REQUIRE(sim.csv.count("samples.csv"));
  REQUIRE(sim.csv.count("path_0.csv"));
  REQUIRE(sim.csv.count("path_1.csv"));
  CHECK(sim.csv.at("path_0.csv").rfind("time,X,Z,is_jump,i_k,j_k\n", 0) == 0);

  const RunReport pop =
      run(parse_config(branching_config("simulate-branching", 0.5)));
  REQUIRE(pop.csv.count("population.csv"));
  CHECK(pop.csv.at("population.csv").rfind("label,birth_time,position\n", 0) ==
        0);
}

TEST_CASE("report verdicts match the module examples") {
  const RunReport holds =
      run(parse_config(perpetuity_config("criteria-perpetuity")));
  const nlohmann::json doc = nlohmann::json::parse(holds.json);
  CHECK(doc.at("results").at("moment_finiteness").at("verdict") == "holds");
  CHECK(doc.at("results").at("critical_moment").get<double>() ==
        doctest::Approx(2.0).epsilon(1e-9));

  const RunReport fails =
      run(parse_config(branching_config("criteria-branching", 1.5)));
  const nlohmann::json bdoc = nlohmann::json::parse(fails.json);
  CHECK(bdoc.at("results").at("ui").at("verdict") == "fails");
}
