#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "helicoid/rational.hpp"

namespace helicoid {

using RationalMatrix = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;
using RationalVector = Eigen::Matrix<Rational, Eigen::Dynamic, 1>;

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status;
  Rational value;       // optimal objective (valid when Optimal)
  RationalVector point; // optimal x (valid when Optimal)
};

// Exact two-phase simplex with Bland's rule:
//   maximize c'x  subject to  A x <= b,  x >= 0.
// All pivoting is done in Rational arithmetic, so strict feasibility
// questions (optimal slack > 0) are decided exactly. Intended for the small
// exponent-simplex programs (<= ~12 variables / constraints).
LpResult maximize(const RationalMatrix& A, const RationalVector& b,
                  const RationalVector& c);

// Feasibility of A x <= b, E x = e, x >= 0 via phase one only.
// Returns a feasible point when one exists.
std::optional<RationalVector> feasible_point(const RationalMatrix& A,
                                             const RationalVector& b,
                                             const RationalMatrix& E,
                                             const RationalVector& e);

}  // namespace helicoid
