#pragma once

#include <limits>
#include <vector>

namespace lpl {

/// One atom of the branching measure: a finite non-increasing sequence
/// x1 >= x2 >= ... >= xm (entries real or -inf) arriving at the given rate.
/// -inf entries encode children that are not born.
struct SequenceAtom {
  double rate = 1.0;
  std::vector<double> sequence;
};

/// Characteristics (sigma^2, a, Pi) of a branching Levy process together
/// with the fixed tilt parameter theta > 0.
struct BranchingChars {
  double sigma2 = 0.0;
  double a = 0.0;
  std::vector<SequenceAtom> pi;
  double theta = 1.0;
};

inline double neg_inf() { return -std::numeric_limits<double>::infinity(); }

}  // namespace lpl
