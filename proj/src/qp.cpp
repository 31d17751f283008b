#include "hzd/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hzd {

QpResult solve_qp(const QpProblem& problem, double tol, int max_iterations) {
  const Eigen::Index n = problem.hessian.rows();
  const Eigen::Index m = problem.constraints.rows();
  const Eigen::LLT<Eigen::MatrixXd> hinv(problem.hessian);

  // Work in the ">= " form  n_i' x >= c_i  with n_i = -A_i, c_i = -b_i.
  const Eigen::MatrixXd normals = -problem.constraints;
  const Eigen::VectorXd rhs = -problem.bounds;

  QpResult res;
  res.x = -hinv.solve(problem.linear);
  res.multipliers = Eigen::VectorXd::Zero(m);
  std::vector<int>& active = res.active;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  auto slack = [&](int i) { return normals.row(i).dot(res.x) - rhs(i); };

  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    int p = -1;
    double worst = -tol * (1.0 + rhs.cwiseAbs().maxCoeff());
    for (int i = 0; i < m; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double s = slack(i);
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) {
      res.feasible = true;
      return res;
    }

    double mult_p = 0.0;
    for (int inner = 0; inner < max_iterations; ++inner) {
      const Eigen::Index k = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd nact(n, k);
      for (Eigen::Index j = 0; j < k; ++j) nact.col(j) = normals.row(active[j]).transpose();
      const Eigen::VectorXd np = normals.row(p).transpose();
      const Eigen::VectorXd hnp = hinv.solve(np);

      Eigen::VectorXd r = Eigen::VectorXd::Zero(k);
      Eigen::VectorXd z = hnp;
      if (k > 0) {
        const Eigen::MatrixXd hn = hinv.solve(nact);
        const Eigen::MatrixXd schur = nact.transpose() * hn;
        r = schur.ldlt().solve(nact.transpose() * hnp);
        z = hnp - hn * r;
      }

      // Partial step: the first active multiplier to reach zero.
      double t1 = kInf;
      int drop = -1;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (r(j) > tol) {
          const double t = res.multipliers(active[j]) / r(j);
          if (t < t1) {
            t1 = t;
            drop = static_cast<int>(j);
          }
        }
      }
      const double curvature = z.dot(np);
      const bool primal_step = z.norm() > tol && curvature > tol;
      const double t2 = primal_step ? -slack(p) / curvature : kInf;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        res.feasible = false;
        return res;
      }

      if (primal_step) res.x += t * z;
      for (Eigen::Index j = 0; j < k; ++j) res.multipliers(active[j]) -= t * r(j);
      mult_p += t;

      if (primal_step && t2 <= t1) {
        res.multipliers(p) = mult_p;
        active.push_back(p);
        break;
      }
      res.multipliers(active[drop]) = 0.0;
      active.erase(active.begin() + drop);
    }
  }
  res.feasible = false;
  return res;
}

double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& multipliers) {
  const Eigen::VectorXd grad = problem.hessian * x + problem.linear +
                               problem.constraints.transpose() * multipliers;
  double r = grad.cwiseAbs().maxCoeff();
  const Eigen::VectorXd s = problem.constraints * x - problem.bounds;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    r = std::max(r, std::max(0.0, s(i)));
    r = std::max(r, std::max(0.0, -multipliers(i)));
    r = std::max(r, std::abs(multipliers(i) * s(i)));
  }
  return r;
}

}  // namespace hzd
