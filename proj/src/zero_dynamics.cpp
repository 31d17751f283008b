#include "hzd/zero_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hzd {

ZeroDynamics::ZeroDynamics(BipedModel model, GaitParams gait)
    : model_(std::move(model)), gait_(std::move(gait)) {}

Vec5 ZeroDynamics::configuration(double theta) const {
  const Vec4 qa = gait_.desired(theta).value;
  Vec5 q;
  q << theta - qa(0) - 0.5 * qa(2), qa;
  return q;
}

ZeroDynamicsPoint ZeroDynamics::at(double theta) const {
  const PhaseProfile h = gait_.desired(theta);
  ZeroDynamicsPoint p;
  p.theta = theta;
  p.q << theta - h.value(0) - 0.5 * h.value(2), h.value;
  p.dq << 1.0 - h.d1(0) - 0.5 * h.d1(2), h.d1;
  p.ddq << -h.d2(0) - 0.5 * h.d2(2), h.d2;

  const Mat5 d = model_.mass_matrix(p.q);
  const auto dd = model_.mass_matrix_partials(p.q);
  p.inertia = d.row(0).dot(p.dq);
  double slope = d.row(0).dot(p.ddq);
  for (int k = 0; k < 5; ++k) slope += dd[k].row(0).dot(p.dq) * p.dq(k);
  p.inertia_slope = slope;
  p.gravity_torque = model_.gravity_vector(p.q)(0);
  return p;
}

State ZeroDynamics::surface_state(double zeta) const {
  const ZeroDynamicsPoint p = at(theta_minus());
  const double dtheta = std::sqrt(2.0 * zeta) / p.inertia;
  return State{p.q, p.dq * dtheta};
}

State ZeroDynamics::post_impact_state(double zeta) const {
  const ZeroDynamicsPoint p = at(theta_plus());
  const double dtheta = std::sqrt(2.0 * zeta) / p.inertia;
  return State{p.q, p.dq * dtheta};
}

double ZeroDynamics::delta_z() const {
  const ZeroDynamicsPoint pm = at(theta_minus());
  const ImpactResult imp = model_.impact(State{pm.q, pm.dq});
  const double sigma_plus = model_.mass_matrix(imp.post.q).row(0).dot(imp.post.dq);
  return sigma_plus / pm.inertia;
}

double ZeroDynamics::impact_invariance_residual() const {
  const ZeroDynamicsPoint pm = at(theta_minus());
  const ImpactResult imp = model_.impact(State{pm.q, pm.dq});
  const ZeroDynamicsPoint pp = at(theta_plus());
  const double dtheta = BipedModel::theta_gradient().dot(imp.post.dq);
  const double pos = (output(imp.post.q, gait_)).cwiseAbs().maxCoeff();
  const double vel = (imp.post.dq - pp.dq * dtheta).cwiseAbs().maxCoeff();
  return std::max(pos, vel);
}

std::vector<ZeroDynamicsSample> ZeroDynamics::potential_profile(int n) const {
  const double a = theta_plus();
  const double h = (theta_minus() - a) / n;
  auto rate = [this](double th) {
    const ZeroDynamicsPoint p = at(th);
    return p.gravity_torque * p.inertia;
  };
  std::vector<ZeroDynamicsSample> out(static_cast<std::size_t>(n) + 1);
  double v = 0.0;
  double f0 = rate(a);
  for (int i = 0; i <= n; ++i) {
    const double th = a + i * h;
    out[i].theta = th;
    out[i].potential = v;
    if (i == n) break;
    // dV/dtheta does not depend on V, so RK4 reduces to Simpson's rule.
    const double fm = rate(th + 0.5 * h);
    const double f1 = rate(th + h);
    v += h * (f0 + 4.0 * fm + f1) / 6.0;
    f0 = f1;
  }
  return out;
}

double ZeroDynamics::potential_at_end(int n) const { return potential_profile(n).back().potential; }

ZeroDynamicsOrbit ZeroDynamics::orbit(double zeta_plus, int n) const {
  const double a = theta_plus();
  const double h = (theta_minus() - a) / n;
  // State (V, t) integrated in theta with classical RK4.
  auto rhs = [&](double th, double v, double& dv, double& dt) {
    const ZeroDynamicsPoint p = at(th);
    dv = p.gravity_torque * p.inertia;
    const double z = zeta_plus - v;
    if (!(z > 0.0)) {
      std::ostringstream msg;
      msg << "zero dynamics stall at theta " << th << " (zeta " << z << ")";
      throw Error(ErrorCode::kGaitInvalid, msg.str());
    }
    dt = p.inertia / std::sqrt(2.0 * z);
  };

  ZeroDynamicsOrbit out;
  out.samples.resize(static_cast<std::size_t>(n) + 1);
  out.min_zeta = zeta_plus;
  double v = 0.0;
  double t = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double th = a + i * h;
    ZeroDynamicsSample& s = out.samples[i];
    s.theta = th;
    s.potential = v;
    s.time = t;
    s.zeta = zeta_plus - v;
    out.min_zeta = std::min(out.min_zeta, s.zeta);

    const ZeroDynamicsPoint p = at(th);
    s.dtheta = std::sqrt(2.0 * std::max(s.zeta, 0.0)) / p.inertia;
    const double ddtheta = (-p.gravity_torque - p.inertia_slope * s.dtheta * s.dtheta) / p.inertia;
    const Vec5 dq = p.dq * s.dtheta;
    const Vec5 ddq = p.ddq * s.dtheta * s.dtheta + p.dq * ddtheta;
    const Vec5 tau = model_.mass_matrix(p.q) * ddq + model_.bias_forces(p.q, dq);
    s.u = tau.tail<4>();
    s.force = model_.ground_reaction_from_acceleration(State{p.q, dq}, ddq);
    s.swing_height = model_.swing_foot_height(p.q);

    if (i == n) break;
    double k1v, k1t, k2v, k2t, k3v, k3t, k4v, k4t;
    rhs(th, v, k1v, k1t);
    rhs(th + 0.5 * h, v + 0.5 * h * k1v, k2v, k2t);
    rhs(th + 0.5 * h, v + 0.5 * h * k2v, k3v, k3t);
    rhs(th + h, v + h * k3v, k4v, k4t);
    v += h * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0;
    t += h * (k1t + 2 * k2t + 2 * k3t + k4t) / 6.0;
  }
  out.period = t;
  return out;
}

}  // namespace hzd
