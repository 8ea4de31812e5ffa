#pragma once

#include <map>
#include <string>
#include <vector>

#include "lpl/config.hpp"
#include "lpl/parallel.hpp"

namespace lpl {

/// In-memory run output: the deterministic report document plus named CSV
/// payloads. Wall-clock timing is intentionally not part of the report so
/// reruns of the same config + seed are byte-identical.
struct RunReport {
  std::string json;                         // report.json contents
  std::map<std::string, std::string> csv;   // filename -> contents
  std::uint64_t seed = 0;                   // seed actually used
};

/// Execute one experiment. If the config has no seed, one is drawn and
/// recorded in the echoed config. Throws ConfigError / ValidationError for
/// bad input and NumericError for numeric failures beyond policy.
RunReport run(const RunConfig& config, ExecPolicy exec = ExecPolicy::serial);

/// Write report.json and the CSV side files into dir (created if missing);
/// returns the written paths. Throws NumericError when the directory is
/// unwritable.
std::vector<std::string> emit_report(const RunReport& report,
                                     const std::string& dir);

}  // namespace lpl
