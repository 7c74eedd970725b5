#pragma once

// Small dense linear programs in standard equality form
//
//   optimize  c . x   subject to  A x = b,  x >= 0.
//
// Two-phase tableau simplex with Bland's anti-cycling rule. Intended for the
// handful-of-variables instances that show up in consistency and coupling
// checks; there is no sparsity or degeneracy handling beyond Bland.

#include <optional>

#include <Eigen/Dense>

namespace llrd {

enum class LpSense { minimize, maximize };
enum class LpStatus { feasible, infeasible, unbounded };

struct LpProblem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  // Absent objective means a pure feasibility question.
  std::optional<Eigen::VectorXd> objective;
  LpSense sense = LpSense::minimize;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd witness;
  double objective = 0.0;
  // max |A w - b| of the returned witness, recomputed by substitution.
  double residual = 0.0;
};

inline constexpr double kLpFeasibilityTolerance = 1e-9;

// Throws ValidationError on non-finite or shape-mismatched input and
// ConvergenceError if a witness fails the substitution re-check.
LpSolution lp_solve(const LpProblem& problem);

}  // namespace llrd
