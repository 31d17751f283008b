#include "hzd/controller.hpp"

#include <algorithm>
#include <cmath>

#include "hzd/qp.hpp"

namespace hzd {

namespace {

// Solves A'P + PA = -I for the unit-time-scale loop A = [0 1; -kp -kd].
Eigen::Matrix2d lyapunov(double kp, double kd) {
  // Unknowns (p11, p12, p22).
  Eigen::Matrix3d m;
  m << 0.0, -2.0 * kp, 0.0,
       1.0, -kd, -kp,
       0.0, 2.0, -2.0 * kd;
  const Eigen::Vector3d sol = m.lu().solve(Eigen::Vector3d(-1.0, 0.0, -1.0));
  Eigen::Matrix2d p;
  p << sol(0), sol(1), sol(1), sol(2);
  return p;
}

Vec4 saturate(const Vec4& u, double limit) {
  return u.cwiseMax(-limit).cwiseMin(limit);
}

}  // namespace

void ControllerConfig::validate() const {
  if (!(kp > 0.0 && kd > 0.0 && epsilon > 0.0)) {
    throw Error(ErrorCode::kConfig, "controller gains and epsilon must be positive");
  }
  if (!(relaxation_penalty > 0.0)) {
    throw Error(ErrorCode::kConfig, "relaxation_penalty must be positive");
  }
}

Vec4 u_star(const LieDerivatives& lie) { return -lie.lg_lf_h.lu().solve(lie.lf2_h); }

Vec4 u_star(const State& x, const GaitParams& gait, const BipedModel& model) {
  return u_star(lie_derivatives(x, gait, model));
}

Vec4 aux_nu(const Vec4& y, const Vec4& dy, const ControllerConfig& cfg) {
  const double e = cfg.epsilon;
  return -(cfg.kp / (e * e)) * y - (cfg.kd / e) * dy;
}

ClfQpResult clf_qp_nu(const State& x, const LieDerivatives& lie, const BipedModel& model,
                      const ControllerConfig& cfg) {
  const ModelParams& mp = model.params();
  const double e = cfg.epsilon;
  const Vec4 nu_pd = aux_nu(lie.y, lie.lf_h, cfg);

  const Eigen::Matrix2d p = lyapunov(cfg.kp, cfg.kd);
  Eigen::Matrix2d f;
  f << 0.0, 1.0, 0.0, 0.0;
  const Eigen::Matrix2d fp = f.transpose() * p + p * f;
  const double rate =
      cfg.clf_rate > 0.0 ? cfg.clf_rate : 1.0 / p.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();

  double v = 0.0;
  double lf_v = 0.0;
  Vec4 lg_v;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d eta(lie.y(i) / e, lie.lf_h(i));
    v += eta.dot(p * eta);
    lf_v += eta.dot(fp * eta) / e;
    lg_v(i) = 2.0 * (p(1, 0) * eta(0) + p(1, 1) * eta(1));
  }

  const Mat4 a_inv = lie.lg_lf_h.inverse();
  const Vec4 u0 = u_star(lie);
  // q'' = drift + D^{-1}B (u0 + A^{-1} nu); contact force is affine in nu.
  const Vec5 ddq0 = lie.drift_acceleration + lie.input_acceleration * u0;
  const GroundForce f0 = model.ground_reaction_from_acceleration(x, ddq0);
  const Eigen::Matrix<double, 2, 4> f_nu =
      mp.total_mass() * model.com_jacobian(x.q) * lie.input_acceleration * a_inv;

  QpProblem qp;
  qp.hessian = Eigen::MatrixXd::Identity(5, 5);
  qp.hessian(4, 4) = cfg.relaxation_penalty;
  qp.linear = Eigen::VectorXd::Zero(5);
  qp.linear.head<4>() = -nu_pd;
  qp.constraints = Eigen::MatrixXd::Zero(13, 5);
  qp.bounds = Eigen::VectorXd::Zero(13);
  int row = 0;
  // CLF decrease, relaxed.
  qp.constraints.block<1, 4>(row, 0) = lg_v.transpose();
  qp.constraints(row, 4) = -1.0;
  qp.bounds(row++) = -(rate / e) * v - lf_v;
  qp.constraints(row, 4) = -1.0;
  qp.bounds(row++) = 0.0;
  // Torque box.
  for (int i = 0; i < 4; ++i) {
    qp.constraints.block<1, 4>(row, 0) = a_inv.row(i);
    qp.bounds(row++) = mp.torque_limit - u0(i);
    qp.constraints.block<1, 4>(row, 0) = -a_inv.row(i);
    qp.bounds(row++) = mp.torque_limit + u0(i);
  }
  // Normal-force floor and friction cone.
  qp.constraints.block<1, 4>(row, 0) = -f_nu.row(1);
  qp.bounds(row++) = f0.normal - mp.min_normal_force;
  qp.constraints.block<1, 4>(row, 0) = f_nu.row(0) - mp.friction_limit * f_nu.row(1);
  qp.bounds(row++) = mp.friction_limit * f0.normal - f0.tangential;
  qp.constraints.block<1, 4>(row, 0) = -f_nu.row(0) - mp.friction_limit * f_nu.row(1);
  qp.bounds(row++) = mp.friction_limit * f0.normal + f0.tangential;

  const QpResult sol = solve_qp(qp);
  ClfQpResult out;
  if (!sol.feasible) {
    out.fallback = true;
    const Vec4 u = saturate(u0 + a_inv * nu_pd, mp.torque_limit);
    out.nu = lie.lg_lf_h * (u - u0);
    return out;
  }
  out.nu = sol.x.head<4>();
  out.relaxation = sol.x(4);
  out.kkt_residual = kkt_residual(qp, sol.x, sol.multipliers);
  return out;
}

Controller::Controller(BipedModel model, ControllerConfig cfg)
    : model_(std::move(model)), cfg_(cfg) {
  cfg_.validate();
}

ControlOutput Controller::compute(const State& x, const GaitParams& gait) const {
  ControlOutput out;
  out.lie = lie_derivatives(x, gait, model_);
  if (cfg_.mode == ControlMode::kClfQp) {
    const ClfQpResult qp = clf_qp_nu(x, out.lie, model_, cfg_);
    out.nu = qp.nu;
    out.qp_fallback = qp.fallback;
  } else {
    out.nu = aux_nu(out.lie.y, out.lie.lf_h, cfg_);
  }
  const Eigen::PartialPivLU<Mat4> lu(out.lie.lg_lf_h);
  out.u = lu.solve(out.nu - out.lie.lf2_h);
  out.ddq = out.lie.drift_acceleration + out.lie.input_acceleration * out.u;
  return out;
}

}  // namespace hzd
