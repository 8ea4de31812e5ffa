#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "lpl/branching_chars.hpp"
#include "lpl/measures.hpp"

namespace lpl {

/// A coupled jump of the bivariate process (X, Z): X jumps by x and Z by y
/// at the given rate. Needed for the spine construction, where X- and
/// Z-jumps coincide.
struct JointAtom {
  double x = 0.0;
  double y = 0.0;
  double rate = 0.0;
};

/// Characteristics (v^2, b, Lambda1) of X and Lambda2 of the drift-free
/// bounded-variation Z, plus optional coupled atomic jumps contributing to
/// both marginals.
struct LevyTriplet {
  double v2 = 0.0;
  double b = 0.0;
  LevyMeasure lambda1;
  LevyMeasure lambda2;
  std::vector<JointAtom> coupled;

  /// Jump measure of X including the x-components of coupled atoms.
  LevyMeasure lambda1_marginal() const;
  /// Jump measure of Z including the y-components of coupled atoms.
  LevyMeasure lambda2_marginal() const;

  bool lambda2_trivial() const;
};

/// Structural validation plus the standing assumptions; throws
/// ValidationError on malformed input.
void validate_triplet(const LevyTriplet& t, const QuadratureOptions& opt = {});

/// psi(p) = log E e^{-p X_1}
///        = v^2 p^2 / 2 - b p + int (e^{-px} - 1 + p x 1_[-1,1](x)) dLambda1.
/// Returns +inf when the negative-jump tail makes the integral diverge.
double laplace_exponent_X(const LevyTriplet& t, double p,
                          const QuadratureOptions& opt = {});

/// A(x) = 1 + int_1^x Lambda1((y, inf)) dy, evaluated through the
/// equivalent single-integral form 1 + int (x ^ z - 1)_+ dLambda1(z).
double A_function(const LevyMeasure& lambda1, double x,
                  const QuadratureOptions& opt = {});

/// Root p* of psi(p) = 0 in (0, p_max] located by bisection (psi is convex
/// with psi(0) = 0); nullopt when psi < 0 on all of (0, p_max].
std::optional<double> critical_moment(const LevyTriplet& t, double p_max,
                                      const QuadratureOptions& opt = {});

/// Cumulant generating function of the branching Levy process,
/// kappa(z) = sigma^2 z^2 / 2 + a z
///          + int (sum_k e^{z x_k} - 1 - z x1 1_[-1,1](x1)) dPi.
/// -inf entries contribute exactly 0.
std::complex<double> kappa(const BranchingChars& c, std::complex<double> z);
double kappa_real(const BranchingChars& c, double z);

/// d/dz kappa at real z (exact finite sum for atomic Pi).
double kappa_prime(const BranchingChars& c, double z);

/// Psi(s) = kappa(theta + i s) - kappa(theta).
std::complex<double> psi_spine(const BranchingChars& c, double s);

}  // namespace lpl
