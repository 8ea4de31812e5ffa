#include "lpl/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lpl/errors.hpp"

namespace lpl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_closed_unit(double x) { return x >= -1.0 && x <= 1.0; }
}  // namespace

LevyMeasure LevyTriplet::lambda1_marginal() const {
  LevyMeasure m = lambda1;
  for (const JointAtom& j : coupled) {
    if (j.x != 0.0) m.atoms.push_back({j.x, j.rate});
  }
  return m;
}

LevyMeasure LevyTriplet::lambda2_marginal() const {
  LevyMeasure m = lambda2;
  for (const JointAtom& j : coupled) {
    if (j.y != 0.0) m.atoms.push_back({j.y, j.rate});
  }
  return m;
}

bool LevyTriplet::lambda2_trivial() const {
  if (!lambda2.trivial()) return false;
  return std::none_of(coupled.begin(), coupled.end(),
                      [](const JointAtom& j) { return j.y != 0.0; });
}

void validate_triplet(const LevyTriplet& t, const QuadratureOptions& opt) {
  if (!(t.v2 >= 0.0) || !std::isfinite(t.v2)) {
    throw ValidationError("triplet.v2 must be >= 0 and finite");
  }
  if (!std::isfinite(t.b)) throw ValidationError("triplet.b must be finite");
  for (std::size_t i = 0; i < t.coupled.size(); ++i) {
    const JointAtom& j = t.coupled[i];
    if (!(j.rate > 0.0) || !std::isfinite(j.rate)) {
      throw ValidationError("triplet.coupled_atoms[" + std::to_string(i) +
                            "]: rate must be positive and finite");
    }
    if (j.x == 0.0 && j.y == 0.0) {
      throw ValidationError("triplet.coupled_atoms[" + std::to_string(i) +
                            "]: jump (0, 0) is not allowed");
    }
  }
  CriterionReport rep = validate_standing_assumptions(
      t.lambda1_marginal(), t.lambda2_marginal(), opt);
  if (rep.verdict == Verdict::fails) {
    throw ValidationError("standing assumptions violated: " + rep.notes);
  }
}

double laplace_exponent_X(const LevyTriplet& t, double p,
                          const QuadratureOptions& opt) {
  if (!(p > 0.0)) throw ValidationError("laplace_exponent_X: p must be > 0");
  const LevyMeasure m = t.lambda1_marginal();
  auto integrand = [p](double x) {
    // e^{-px} - 1 + p x on [-1,1]; e^{-px} - 1 outside. Always >= -1.
    double v = std::expm1(-p * x);
    if (in_closed_unit(x)) v += p * x;
    return v;
  };
  IntegralResult r = integrate(m, integrand, whole_line(), opt);
  if (r.divergent) return kInf;  // E e^{-pX_1} = inf
  if (r.indeterminate) {
    throw NumericError("laplace_exponent_X: quadrature inconclusive");
  }
  return 0.5 * t.v2 * p * p - t.b * p + r.value;
}

double A_function(const LevyMeasure& lambda1, double x,
                  const QuadratureOptions& opt) {
  if (!(x >= 1.0)) throw ValidationError("A_function: x must be >= 1");
  auto f = [x](double z) { return std::max(std::min(x, z) - 1.0, 0.0); };
  Interval dom{1.0, kInf, false, false};
  IntegralResult r = integrate(lambda1, f, dom, opt);
  if (!r.finite()) {
    throw NumericError("A_function: Lambda1 tail above 1 is not finite");
  }
  return 1.0 + r.value;
}

std::optional<double> critical_moment(const LevyTriplet& t, double p_max,
                                      const QuadratureOptions& opt) {
  if (!(p_max > 0.0)) throw ValidationError("critical_moment: p_max must be > 0");
  auto psi = [&](double p) { return laplace_exponent_X(t, p, opt); };

  // psi is convex with psi(0) = 0: scan for a sign change, then bisect.
  const int n_grid = 64;
  double lo = 0.0, hi = 0.0;
  double prev_p = 0.0;
  bool prev_neg = false;
  // Undefined means psi = inf across the whole grid. The shrink-toward-zero
  // probes are excluded: for small p a divergent tail integral can look
  // numerically finite, which must not mask an everywhere-infinite exponent.
  bool grid_finite = false;
  for (int i = 1; i <= n_grid; ++i) {
    const double p = p_max * i / n_grid;
    const double v = psi(p);
    if (std::isfinite(v)) grid_finite = true;
    if (v >= 0.0) {
      if (!prev_neg) {
        // Positive right away: the nontrivial root, if any, sits below the
        // first grid point; shrink toward 0 looking for negative values.
        double q = p;
        bool found = false;
        for (int k = 0; k < 80; ++k) {
          q *= 0.5;
          const double w = psi(q);
          if (w < 0.0) {
            lo = q;
            hi = 2.0 * q;
            found = true;
            break;
          }
        }
        if (!found) {
          if (!grid_finite) {
            throw NumericError("critical_moment: exponent undefined");
          }
          return std::nullopt;  // psi >= 0 near 0: no root in (0, p_max]
        }
      } else {
        lo = prev_p;
        hi = p;
      }
      // Bisection to absolute tolerance 1e-10.
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double w = psi(mid);
        if (w < 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev_neg = true;
    prev_p = p;
  }
  if (!grid_finite) throw NumericError("critical_moment: exponent undefined");
  return std::nullopt;
}

std::complex<double> kappa(const BranchingChars& c, std::complex<double> z) {
  std::complex<double> acc = 0.5 * c.sigma2 * z * z + c.a * z;
  for (const SequenceAtom& atom : c.pi) {
    std::complex<double> term = -1.0;
    for (double x : atom.sequence) {
      if (std::isinf(x)) continue;  // e^{z * -inf} = 0
      term += std::exp(z * x);
    }
    const double x1 = atom.sequence.front();
    if (in_closed_unit(x1)) term -= z * x1;
    acc += atom.rate * term;
  }
  return acc;
}

double kappa_real(const BranchingChars& c, double z) {
  return kappa(c, std::complex<double>(z, 0.0)).real();
}

double kappa_prime(const BranchingChars& c, double z) {
  double acc = c.sigma2 * z + c.a;
  for (const SequenceAtom& atom : c.pi) {
    double term = 0.0;
    for (double x : atom.sequence) {
      if (std::isinf(x)) continue;
      term += x * std::exp(z * x);
    }
    const double x1 = atom.sequence.front();
    if (in_closed_unit(x1)) term -= x1;
    acc += atom.rate * term;
  }
  return acc;
}

std::complex<double> psi_spine(const BranchingChars& c, double s) {
  return kappa(c, std::complex<double>(c.theta, s)) -
         kappa(c, std::complex<double>(c.theta, 0.0));
}

}  // namespace lpl
