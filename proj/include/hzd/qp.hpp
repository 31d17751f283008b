#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hzd {

/// min 0.5 x'Hx + f'x  subject to  A x <= b, with H symmetric positive definite.
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd constraints;
  Eigen::VectorXd bounds;
};

struct QpResult {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // one per constraint row, zero when inactive
  std::vector<int> active;
  bool feasible = false;
  int iterations = 0;
};

/// Dense dual active-set method (Goldfarb-Idnani). Starts from the
/// unconstrained minimizer and adds the most violated constraint each outer
/// iteration, so no feasible starting point is needed. Sized for a handful of
/// variables and a few dozen rows.
QpResult solve_qp(const QpProblem& problem, double tol = 1e-12, int max_iterations = 200);

/// Largest absolute KKT residual (stationarity, primal and dual feasibility,
/// complementarity) of a candidate solution.
double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& multipliers);

}  // namespace hzd
