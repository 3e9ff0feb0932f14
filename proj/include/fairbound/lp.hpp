#pragma once

#include <Eigen/Dense>

#include "fairbound/errors.hpp"

namespace fairbound {

// Dense linear program: maximize c'x subject to A_eq x = b_eq,
// A_ub x <= b_ub, x >= 0. Either constraint block may be empty (0 rows).
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_ub;
  Eigen::VectorXd b_ub;

  long num_vars() const { return c.size(); }
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-10;
  long max_iterations = 10000;
};

// Two-phase dense simplex with Bland's anti-cycling rule. Throws
// NumericalFailure if pivoting exceeds the iteration cap or the returned
// point fails an independent feasibility recheck.
LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts = {});

}  // namespace fairbound
