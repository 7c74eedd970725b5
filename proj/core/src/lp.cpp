#include "llrd/lp.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "llrd/errors.hpp"

namespace llrd {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

constexpr double kPivotEps = 1e-11;
constexpr int kNone = -1;
constexpr int kMaxPivots = 100000;

class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
      : m_(a.rows()), n_(a.cols()), t_(Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1)),
        basis_(static_cast<std::size_t>(m_)), active_(static_cast<std::size_t>(m_), true) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = b(i) < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * a.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign * b(i);
      basis_[static_cast<std::size_t>(i)] = n_ + i;
    }
  }

  Eigen::Index rhs() const { return n_ + m_; }

  // Phase 1: minimize the sum of artificials. Returns the optimal sum.
  double phase_one() {
    t_.row(m_).setZero();
    for (Eigen::Index i = 0; i < m_; ++i) {
      t_.row(m_).head(n_) -= t_.row(i).head(n_);
      t_(m_, rhs()) -= t_(i, rhs());
    }
    iterate(n_ + m_);
    return -t_(m_, rhs());
  }

  // Pivots artificials out of the basis; rows that cannot be cleared are
  // linearly dependent and are deactivated.
  void drop_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      Eigen::Index best = kNone;
      double best_abs = kPivotEps;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > best_abs) {
          best_abs = std::abs(t_(i, j));
          best = j;
        }
      }
      if (best == kNone) {
        active_[static_cast<std::size_t>(i)] = false;
      } else {
        pivot(i, best);
      }
    }
  }

  // Phase 2 over original columns only. Returns false if unbounded.
  bool phase_two(const Eigen::VectorXd& cost) {
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!active_[static_cast<std::size_t>(i)]) continue;
      const Eigen::Index bj = basis_[static_cast<std::size_t>(i)];
      const double cb = cost(bj);
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
    return iterate(n_);
  }

  Eigen::VectorXd primal() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index bj = basis_[static_cast<std::size_t>(i)];
      if (active_[static_cast<std::size_t>(i)] && bj < n_) x(bj) = t_(i, rhs());
    }
    return x;
  }

  std::vector<Eigen::Index> basic_columns() const {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index bj = basis_[static_cast<std::size_t>(i)];
      if (active_[static_cast<std::size_t>(i)] && bj < n_) cols.push_back(bj);
    }
    return cols;
  }

 private:
  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  // Bland's rule: lowest-index improving column, lowest-index basic variable
  // among ratio ties. Returns false when an improving column is unbounded.
  bool iterate(Eigen::Index allowed_cols) {
    for (int step = 0;; ++step) {
      if (step > kMaxPivots) throw ConvergenceError("lp: pivot limit exceeded");
      Eigen::Index enter = kNone;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (t_(m_, j) < -kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter == kNone) return true;

      Eigen::Index leave = kNone;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (!active_[static_cast<std::size_t>(i)] || t_(i, enter) <= kPivotEps) continue;
        const double ratio = t_(i, rhs()) / t_(i, enter);
        if (ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave == kNone) return false;
      pivot(leave, enter);
    }
  }

  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> active_;
};

double residual_of(const LpProblem& p, const Eigen::VectorXd& x) {
  if (p.a.rows() == 0) return 0.0;
  return (p.a * x - p.b).cwiseAbs().maxCoeff();
}

// Re-solves the basic variables against the original matrix to shed the
// round-off accumulated by tableau pivots.
Eigen::VectorXd polish(const LpProblem& p, const Eigen::VectorXd& x,
                       const std::vector<Eigen::Index>& basic) {
  if (basic.empty() || p.a.rows() == 0) return x;
  Eigen::MatrixXd sub(p.a.rows(), static_cast<Eigen::Index>(basic.size()));
  for (std::size_t k = 0; k < basic.size(); ++k) {
    sub.col(static_cast<Eigen::Index>(k)) = p.a.col(basic[k]);
  }
  const Eigen::VectorXd xb = sub.colPivHouseholderQr().solve(p.b);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (std::size_t k = 0; k < basic.size(); ++k) {
    const double v = xb(static_cast<Eigen::Index>(k));
    if (v < -1e-12 || !std::isfinite(v)) return x;
    out(basic[k]) = v < 0.0 ? 0.0 : v;
  }
  return residual_of(p, out) <= residual_of(p, x) ? out : x;
}

}  // namespace

LpSolution lp_solve(const LpProblem& problem) {
  const Eigen::Index m = problem.a.rows();
  const Eigen::Index n = problem.a.cols();
  if (problem.b.size() != m) throw ValidationError("lp: b has wrong length");
  if (problem.objective && problem.objective->size() != n) {
    throw ValidationError("lp: objective has wrong length");
  }
  if (!problem.a.allFinite() || !problem.b.allFinite() ||
      (problem.objective && !problem.objective->allFinite())) {
    throw ValidationError("lp: non-finite coefficients");
  }

  LpSolution sol;
  if (n == 0) {
    sol.witness = Eigen::VectorXd::Zero(0);
    sol.residual = m == 0 ? 0.0 : problem.b.cwiseAbs().maxCoeff();
    sol.status = sol.residual <= kLpFeasibilityTolerance ? LpStatus::feasible
                                                         : LpStatus::infeasible;
    return sol;
  }

  Tableau tab(problem.a, problem.b);
  const double scale = 1.0 + (m > 0 ? problem.b.cwiseAbs().maxCoeff() : 0.0);
  const double infeasibility = tab.phase_one();
  if (infeasibility > kLpFeasibilityTolerance * scale) {
    sol.status = LpStatus::infeasible;
    return sol;
  }
  tab.drop_artificials();

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n);
  if (problem.objective) {
    cost = problem.sense == LpSense::maximize ? Eigen::VectorXd(-*problem.objective)
                                              : *problem.objective;
  }
  if (!tab.phase_two(cost)) {
    sol.status = LpStatus::unbounded;
    sol.witness = tab.primal();
    sol.residual = residual_of(problem, sol.witness);
    return sol;
  }

  Eigen::VectorXd x = polish(problem, tab.primal(), tab.basic_columns());
  for (Eigen::Index j = 0; j < n; ++j) {
    if (x(j) < 0.0 && x(j) >= -1e-12) x(j) = 0.0;
  }
  sol.residual = residual_of(problem, x);
  if (sol.residual > kLpFeasibilityTolerance * scale || x.minCoeff() < -1e-12) {
    throw ConvergenceError("lp: witness failed substitution check (residual " +
                           fmt(sol.residual) + ")");
  }
  sol.status = LpStatus::feasible;
  sol.witness = std::move(x);
  sol.objective = problem.objective ? problem.objective->dot(sol.witness) : 0.0;
  return sol;
}

}  // namespace llrd
