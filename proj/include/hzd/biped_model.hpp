#pragma once

#include <array>

#include "hzd/model_params.hpp"
#include "hzd/types.hpp"

namespace hzd {

struct ImpactResult {
  State post;                    // relabeled post-impact state
  Vec2 impulse = Vec2::Zero();   // impulse on the new stance toe, N s
  double lift_velocity = 0.0;    // vertical velocity of the new swing toe, m/s
  bool valid = false;            // impulse compressive and new swing toe lifting
};

/// Rigid-body model of the planar five-link biped pinned at the stance toe.
///
/// Equations of motion: D(q) ddq + C(q, dq) dq + G(q) = B u, with C built
/// from the Christoffel symbols of D. Torques u act on (q2, q3, q4, q5).
/// See State for the coordinate convention.
class BipedModel {
 public:
  enum Link { kTorso = 0, kStanceFemur, kStanceShank, kSwingFemur, kSwingShank };

  explicit BipedModel(ModelParams params = {});

  const ModelParams& params() const { return params_; }

  Mat5 mass_matrix(const Vec5& q) const;
  /// dD/dq_k for k = 0..4.
  std::array<Mat5, 5> mass_matrix_partials(const Vec5& q) const;
  Mat5 coriolis_matrix(const Vec5& q, const Vec5& dq) const;
  Vec5 gravity_vector(const Vec5& q) const;
  /// C(q, dq) dq + G(q).
  Vec5 bias_forces(const Vec5& q, const Vec5& dq) const;
  static Mat5x4 input_matrix();

  /// Solves D ddq = B u - C dq - G.
  Vec5 forward_dynamics(const Vec5& q, const Vec5& dq, const Vec4& u) const;

  double kinetic_energy(const Vec5& q, const Vec5& dq) const;
  double potential_energy(const Vec5& q) const;

  /// Link angles measured from the upward vertical, indexed by Link.
  static Vec5 link_angles(const Vec5& q);

  Vec2 hip(const Vec5& q) const;
  Vec2 swing_toe(const Vec5& q) const;
  Mat2x5 swing_toe_jacobian(const Vec5& q) const;
  Vec2 center_of_mass(const Vec5& q) const;
  Mat2x5 com_jacobian(const Vec5& q) const;
  /// d/dt(J_com) dq.
  Vec2 com_bias_acceleration(const Vec5& q, const Vec5& dq) const;

  double swing_foot_height(const Vec5& q) const { return swing_toe(q).y(); }
  double swing_foot_velocity(const Vec5& q, const Vec5& dq) const {
    return swing_toe_jacobian(q).row(1).dot(dq);
  }
  /// Horizontal distance from the stance toe to the swing toe.
  double step_length(const Vec5& q) const { return swing_toe(q).x(); }

  static double theta(const Vec5& q) { return q(0) + q(1) + 0.5 * q(3); }
  static Vec5 theta_gradient() {
    Vec5 c;
    c << 1.0, 1.0, 0.0, 0.5, 0.0;
    return c;
  }

  /// Swaps stance and swing labels. The map is an involution.
  static Mat5 relabel_matrix();

  /// Plastic impact of the swing toe solved on the floating-base extension
  /// (q, stance-toe position), followed by relabeling.
  /// Throws Error(kSingularImpact) if the extended system is ill-conditioned.
  ImpactResult impact(const State& pre) const;

  /// Contact force at the stance pivot, F = m (a_com + g e_y).
  GroundForce ground_reaction(const State& x, const Vec4& u) const;
  GroundForce ground_reaction_from_acceleration(const State& x, const Vec5& ddq) const;

  /// Extended 7x7 inertia of the floating-base model (q, p_x, p_y).
  Mat7 extended_mass_matrix(const Vec5& q) const;

 private:
  struct Term {
    double coef;
    int link;
  };
  struct Point {
    std::array<Term, 4> terms{};
    int size = 0;
  };
  struct Body {
    double mass;
    double inertia;
    int link;
    Point com;
  };

  Vec2 position(const Point& p, const Vec5& phi) const;
  Mat2x5 jacobian(const Point& p, const Vec5& phi) const;
  Vec2 jdot_dq(const Point& p, const Vec5& phi, const Vec5& dphi) const;

  ModelParams params_;
  std::array<Body, 5> bodies_;
  Point hip_;
  Point swing_toe_;
};

}  // namespace hzd
