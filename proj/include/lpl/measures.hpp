#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lpl/report.hpp"

namespace lpl {

struct Atom {
  double location;  // != 0
  double mass;      // > 0
};

/// Built-in density families. Config files may only reference these;
/// arbitrary user densities are not accepted from config.
enum class DensityFamily { power, exponential_decay, truncated_stable };

std::string to_string(DensityFamily f);
DensityFamily density_family_from_string(const std::string& s);

struct DensityPiece {
  double lo;  // interval (lo, hi), 0 not in the interior
  double hi;  // may be +inf (or lo may be -inf on the negative side)
  DensityFamily family = DensityFamily::power;
  double coef = 1.0;
  /// power: density = coef * |x|^param
  /// exponential_decay: density = coef * exp(-param * |x|)
  /// truncated_stable: density = coef * |x|^(-1 - param)
  double param = 0.0;
  /// |x|^{-alpha} behaviour near 0, when known.
  std::optional<double> integrability_hint;

  double operator()(double x) const;
  /// Exponent alpha of the |x|^{-alpha} blow-up at 0 (from hint or family).
  double small_x_exponent() const;
};

struct Interval {
  double lo;
  double hi;
  bool include_lo = false;
  bool include_hi = false;

  bool contains(double x) const {
    if (x < lo || x > hi) return false;
    if (x == lo && !include_lo) return false;
    if (x == hi && !include_hi) return false;
    return true;
  }
};

inline Interval whole_line() {
  return {-std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), false, false};
}

/// One-dimensional Levy (jump) measure: atoms plus piecewise densities,
/// sigma-finite away from 0. Immutable after construction; all operations
/// on it are pure.
struct LevyMeasure {
  std::vector<Atom> atoms;
  std::vector<DensityPiece> densities;

  bool trivial() const { return atoms.empty() && densities.empty(); }
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  std::size_t max_evals = 1'000'000;
  double divergence_cap = 1e12;
};

/// Throws ValidationError naming the offending component.
void validate_measure(const LevyMeasure& m, const std::string& name);

/// Integral of f against m over the domain. Atomic parts are summed exactly;
/// densities go through adaptive Gauss-Kronrod with dyadic handling of the
/// endpoints (singularities at 0, infinite tails).
IntegralResult integrate(const LevyMeasure& m,
                         const std::function<double(double)>& f,
                         const Interval& domain,
                         const QuadratureOptions& opt = {});

/// m((y, inf)) for y > 0; +inf when the tail diverges.
double tail_mass(const LevyMeasure& m, double y,
                 const QuadratureOptions& opt = {});

/// m({|x| > eps}); +inf when sigma-finiteness away from 0 is violated.
double mass_outside(const LevyMeasure& m, double eps,
                    const QuadratureOptions& opt = {});

/// Standing assumptions: int (x^2 ^ 1) lambda1 < inf and
/// int (|y| ^ 1) lambda2 < inf.
CriterionReport validate_standing_assumptions(const LevyMeasure& lambda1,
                                              const LevyMeasure& lambda2,
                                              const QuadratureOptions& opt = {});

namespace detail {
/// Improper-capable quadrature of f over (lo, hi) with 0 outside the
/// interior. Exposed for tests.
IntegralResult integrate_interval(const std::function<double(double)>& f,
                                  double lo, double hi,
                                  const QuadratureOptions& opt);
}  // namespace detail

}  // namespace lpl
