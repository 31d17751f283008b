#pragma once

#include <Eigen/Dense>

#include "hzd/zero_dynamics.hpp"

namespace hzd {

/// Double-support posture at the end of a step, stance toe at the origin.
struct ImpactPosture {
  double theta_minus = 0.25;  // rad
  double stance_knee = 0.2;   // rad
  double swing_knee = 0.2;    // rad
  double torso = 0.05;        // rad, absolute pitch
};

/// Pre-impact configuration for a posture; the swing hip is solved so the
/// swing toe touches the ground ahead of the stance toe.
/// Throws Error(kDesignFailed) if no such configuration exists.
Vec5 impact_configuration(const BipedModel& model, const ImpactPosture& posture);

/// Bezier outputs whose zero-dynamics surface is invariant under the impact.
/// The end coefficients come from the impact posture and its relabeled image,
/// the second coefficient matches the post-impact velocity direction and the
/// interior ones are offsets from the straight line between the two ends
/// (4 x (degree - 2) values, column-major).
BezierOutputs impact_invariant_outputs(const BipedModel& model, const ImpactPosture& posture,
                                       const Eigen::MatrixXd& offsets, int degree = 6);

/// Adjusts the last interior offsets (least change) so the swing toe lands
/// with the given velocity, in m per rad of phase.
Eigen::MatrixXd match_impact_toe_velocity(const BipedModel& model, const ImpactPosture& posture,
                                          const Eigen::MatrixXd& offsets, const Vec2& toe_velocity,
                                          int degree = 6);

/// Steady-state orbit predicted by the restricted dynamics.
struct ReducedGaitSummary {
  double delta_sq = 0.0;
  double v_minus = 0.0;        // V(theta_minus)
  double k = 0.0;              // max V over the step
  double zeta_star = 0.0;      // pre-impact fixed point
  double period = 0.0;         // s
  double step_length = 0.0;    // m
  double speed = 0.0;          // m/s
  double max_torque = 0.0;     // N m
  double min_normal = 0.0;     // N
  double max_friction_ratio = 0.0;
  double min_clearance = 0.0;  // m, swing toe height over the middle of the step
  double min_height = 0.0;     // m, swing toe height strictly inside the step
  double min_inertia = 0.0;
  double min_knee = 0.0;       // rad
  double pre_impact_toe_velocity = 0.0;  // m/s, vertical
  bool impact_valid = false;
  bool exists = false;  // a positive fixed point inside the domain
};

/// Throws Error on degenerate gaits (e.g. singular impact); an orbit that
/// stalls is reported through exists = false.
ReducedGaitSummary summarize_reduced(const BipedModel& model, const GaitParams& gait,
                                     int grid = 200);

struct BaseDesignConfig {
  double target_speed = 0.75;     // m/s
  double speed_tolerance = 0.02;  // m/s
  int degree = 6;
  int grid = 120;                 // theta steps per cost evaluation
  double torque_fraction = 0.7;   // of the torque limit
  double normal_factor = 1.3;     // times the normal-force floor
  double friction_fraction = 0.8; // of the friction limit
  double domain_factor = 2.0;     // zeta_plus / K
  double clearance = 0.03;        // m
  int max_evaluations = 12000;
  int restarts = 4;
  // Second stage: the gaits reached by modulation at +-speed_range of the
  // target must also keep these margins.
  double speed_range = 0.16;
  int range_grid = 60;
  int range_evaluations = 4000;
  double range_torque_fraction = 0.95;
  double range_normal_factor = 1.05;
  double range_friction_fraction = 0.95;
  double range_domain_factor = 1.2;
  ImpactPosture initial;
  double initial_swing_flexion = 0.2;  // rad, interior swing-knee offset
  double initial_toe_descent = -0.3;   // m/rad, swing toe vertical velocity at impact
  double max_delta_sq = 0.85;
};

struct BaseDesignResult {
  ImpactPosture posture;
  Eigen::MatrixXd offsets;
  BezierOutputs outputs;
  ReducedGaitSummary summary;
  double cost = 0.0;
  int evaluations = 0;
};

/// Penalized design cost; zero only at the target speed with every margin met.
double design_cost(const ReducedGaitSummary& s, const BipedModel& model,
                   const BaseDesignConfig& cfg);

/// Speed of one step that starts on the surface with momentum zeta_plus.
double reduced_step_speed(const BipedModel& model, const GaitParams& gait, double zeta_plus,
                          int grid);
/// Central-difference gradient of reduced_step_speed with respect to beta.
Vec4 reduced_speed_sensitivity(const BipedModel& model, const GaitParams& gait, double zeta_plus,
                               int grid, double step = 1e-4);

/// Gaits on the line beta = s * J / |J|^2 whose fixed points run at
/// (1 +- fraction) times the base speed.
struct SpeedRangeProbe {
  bool found = false;
  Vec4 direction = Vec4::Zero();
  double s_slow = 0.0;
  double s_fast = 0.0;
  ReducedGaitSummary base;
  ReducedGaitSummary slow;
  ReducedGaitSummary fast;
};
SpeedRangeProbe probe_speed_range(const BipedModel& model, const GaitParams& base,
                                  double fraction, int grid = 60);
double range_cost(const SpeedRangeProbe& probe, const BipedModel& model,
                  const BaseDesignConfig& cfg);

/// Nelder-Mead over the impact posture and the interior Bezier offsets.
/// Throws Error(kDesignFailed) when the best design misses a margin.
BaseDesignResult design_base_outputs(const BipedModel& model, const BaseDesignConfig& cfg = {});

}  // namespace hzd
