#pragma once

#include <string>

namespace hzd {

struct LinkParams {
  double mass = 0.0;     // kg
  double length = 0.0;   // m
  double com = 0.0;      // m, from the proximal joint
  double inertia = 0.0;  // kg m^2 about the COM
};

/// Planar five-link biped. The proximal joint is the hip for the torso and
/// the femurs, and the knee for the shanks. Defaults approximate RABBIT.
struct ModelParams {
  LinkParams torso{12.0, 0.625, 0.24, 1.33};
  LinkParams femur{6.8, 0.4, 0.11, 0.47};
  LinkParams shank{3.2, 0.4, 0.24, 0.20};
  double gravity = 9.81;         // m/s^2
  double torque_limit = 100.0;   // N m
  double friction_limit = 0.8;   // |F_t| / F_n
  double min_normal_force = 100.0;  // N

  double total_mass() const { return torso.mass + 2.0 * (femur.mass + shank.mass); }

  /// Throws Error(kConfig) when an invariant is violated.
  void validate() const;
};

}  // namespace hzd
