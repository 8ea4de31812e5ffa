#pragma once

#include <optional>
#include <string>
#include <vector>

namespace lpl {

enum class Verdict { holds, fails, indeterminate };

std::string to_string(Verdict v);

/// One inequality (or limit condition) behind a criterion verdict.
struct Component {
  std::string name;
  std::optional<double> value;  // empty when divergent or undefined
  bool divergent = false;
  double margin = 0.0;  // distance to the failure boundary, >= 0
  Verdict verdict = Verdict::indeterminate;
  bool boundary = false;  // the inequality is an equality within tolerance
  std::string note;
};

/// Structured verdict: holds / fails / indeterminate plus the computed
/// quantities behind each condition.
struct CriterionReport {
  Verdict verdict = Verdict::indeterminate;
  std::vector<Component> components;
  std::string notes;

  /// verdict := conjunction of the component verdicts.
  void finalize();

  bool holds() const { return verdict == Verdict::holds; }
};

enum class IntegrationMethod { exact_atomic, quadrature, divergence_detected };

struct IntegralResult {
  double value = 0.0;
  bool divergent = false;
  bool indeterminate = false;  // quadrature could not bracket within budget
  double abs_error_bound = 0.0;
  IntegrationMethod method = IntegrationMethod::exact_atomic;

  bool finite() const { return !divergent && !indeterminate; }
};

}  // namespace lpl
