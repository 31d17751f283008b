#pragma once

#include <vector>

#include "hzd/biped_model.hpp"
#include "hzd/virtual_constraints.hpp"

namespace hzd {

/// Configuration on the zero-dynamics surface and its phase derivatives.
struct ZeroDynamicsPoint {
  double theta = 0.0;
  Vec5 q = Vec5::Zero();
  Vec5 dq = Vec5::Zero();   // dq/dtheta
  Vec5 ddq = Vec5::Zero();  // d2q/dtheta2
  double inertia = 0.0;     // D_1(q) dq/dtheta, so that sigma = inertia * dtheta
  double inertia_slope = 0.0;
  double gravity_torque = 0.0;  // G_1(q)
};

struct ZeroDynamicsSample {
  double theta = 0.0;
  double potential = 0.0;  // V(theta)
  double time = 0.0;       // s, only when a zeta_plus was supplied
  double zeta = 0.0;
  double dtheta = 0.0;
  Vec4 u = Vec4::Zero();
  GroundForce force;
  double swing_height = 0.0;
};

struct ZeroDynamicsOrbit {
  std::vector<ZeroDynamicsSample> samples;
  double period = 0.0;
  double min_zeta = 0.0;
};

/// Restricted dynamics on Z_beta in the coordinates (theta, zeta): along a
/// step zeta(theta) = zeta_plus - V(theta) with dV/dtheta = G_1 * inertia, and
/// the impact scales the momentum by delta_z. Computed by quadrature along
/// theta, independently of the full-order simulation.
class ZeroDynamics {
 public:
  ZeroDynamics(BipedModel model, GaitParams gait);

  ZeroDynamicsPoint at(double theta) const;
  Vec5 configuration(double theta) const;
  /// State on S intersect Z with the given zeta (positive momentum).
  State surface_state(double zeta) const;
  /// State just after the impact, on Z, with the given zeta.
  State post_impact_state(double zeta) const;

  double theta_plus() const { return gait_.base.theta_plus; }
  double theta_minus() const { return gait_.base.theta_minus; }
  const GaitParams& gait() const { return gait_; }

  /// Momentum ratio across the impact for a pre-impact state on S intersect Z.
  double delta_z() const;
  /// Residual of the post-impact velocity against the surface Z (zero for an
  /// impact-invariant design).
  double impact_invariance_residual() const;

  /// V on a uniform grid of n steps (classical RK4 in theta), K = max V.
  std::vector<ZeroDynamicsSample> potential_profile(int n) const;
  double potential_at_end(int n = 2000) const;

  /// Orbit starting from zeta_plus at theta_plus: time, velocities, torques
  /// and contact forces on a grid of n steps. Throws Error(kGaitInvalid) if
  /// zeta reaches zero before theta_minus.
  ZeroDynamicsOrbit orbit(double zeta_plus, int n) const;

 private:
  BipedModel model_;
  GaitParams gait_;
};

}  // namespace hzd
