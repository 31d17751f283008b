#pragma once

#include <string>
#include <vector>

#include "hzd/base_design.hpp"
#include "hzd/hybrid_sim.hpp"

namespace hzd {

struct NewtonOptions {
  double tolerance = 1e-10;  // on |P(x) - x|
  int max_iterations = 50;
  double fd_step = 1e-6;     // relative, for the Poincare Jacobian
  /// Rebuild the Jacobian when an iteration shrinks the residual by less than this.
  double refresh_ratio = 0.1;
};

struct FixedPointResult {
  State x;
  double residual = 0.0;
  int iterations = 0;
  int jacobians = 0;
};

/// Newton on H(x) = P(x) - x with finite-difference Jacobians. A supplied
/// Jacobian (e.g. from a neighbouring gait) is used until convergence slows.
/// Throws Error(kNewtonDivergence) after max_iterations or on a growing
/// residual, Error(kSingularJacobian) when DP - I is numerically singular.
FixedPointResult fixed_point_solve(const State& guess, const GaitParams& gait,
                                   const Controller& controller, const NewtonOptions& newton = {},
                                   const SimOptions& sim = {}, const Mat10* jacobian = nullptr);

/// zeta_out = delta_sq * zeta_in - v_minus, fitted from full-order steps that
/// start on S intersect Z.
struct ReducedMap {
  double delta_sq = 0.0;
  double v_minus = 0.0;  // V(theta_minus)
  double residual = 0.0;  // worst relative misfit over all samples
  std::vector<double> zeta_in;
  std::vector<double> zeta_out;

  double zeta_star() const { return -v_minus / (1.0 - delta_sq); }
  double apply(double zeta) const { return delta_sq * zeta - v_minus; }
};

/// Fixed-point momentum of an affine map; also the closed form used by the
/// fit oracle.
inline double affine_fixed_point(double delta_sq, double v_minus) {
  return -v_minus / (1.0 - delta_sq);
}

/// Fits from the two extreme samples of `zeta_in` and validates affinity on
/// the rest. Throws Error(kModelViolation) when the residual exceeds
/// `tolerance`, Error(kInvalidArgument) with fewer than three samples.
ReducedMap fit_reduced_map(const GaitParams& gait, const Controller& controller,
                           const std::vector<double>& zeta_in, double tolerance = 1e-8,
                           const SimOptions& sim = {});

/// Five samples spread around zeta_ref, kept inside the domain delta_sq * zeta > k.
std::vector<double> reduced_map_samples(double zeta_ref, double delta_sq, double k,
                                        double spread = 0.05);

struct PotentialProfile {
  std::vector<double> theta;
  std::vector<double> potential;  // V(theta) = zeta(theta_plus) - zeta(theta)
  double k = 0.0;                 // max V
  double v_minus = 0.0;
};

/// Simulates one step from Delta(on_surface) with the integrator step capped
/// so that at least `min_samples` phase samples are recorded.
/// Throws Error(kGaitInvalid) when the phase is not strictly increasing.
PotentialProfile v_profile_and_k(const State& on_surface, const GaitParams& gait,
                                 const Controller& controller, int min_samples = 1000,
                                 const SimOptions& sim = {});

/// Average speed of one step from a state on S.
double step_speed(const State& on_surface, const GaitParams& gait, const Controller& controller,
                  const SimOptions& sim = {});

/// Central differences of step_speed with respect to beta around gait.beta.
Vec4 speed_sensitivity(const State& on_surface, const GaitParams& gait,
                       const Controller& controller, double step = 1e-4,
                       const SimOptions& sim = {});

/// beta = J^T (v_des - v0) / |J|^2. Throws Error(kInvalidArgument) for J = 0.
Vec4 beta_for_speed(double v_des, double v0, const Vec4& sensitivity);

struct ConstraintMargins {
  double max_torque = 0.0;
  double torque_headroom = 0.0;  // limit - max torque
  double min_normal = 0.0;
  double max_friction_ratio = 0.0;
};

struct LimitCycleRecord {
  int index = 0;
  double v_des = 0.0;
  Vec4 beta = Vec4::Zero();
  State x_star;
  double zeta_star = 0.0;     // zeta(x_star)
  double delta_sq = 0.0;
  double v_minus = 0.0;
  double k = 0.0;
  double speed = 0.0;         // m/s
  double period = 0.0;        // s
  double step_length = 0.0;   // m
  double theta_plus = 0.0;
  double theta_minus = 0.0;
  double spectral_radius = 0.0;
  double periodicity_error = 0.0;
  double affinity_residual = 0.0;
  double max_output_norm = 0.0;
  int newton_iterations = 0;
  ConstraintMargins margins;

  double predicted_zeta_star() const { return affine_fixed_point(delta_sq, v_minus); }
};

struct CertifyOptions {
  double periodicity_tol = 1e-8;
  double closure_tol = 1e-8;     // zeta(x*) against the affine fixed point, relative
  double affinity_tol = 1e-8;
  int profile_samples = 1000;
};

/// Checks a solved fixed point and fills a record. `why` lists the failed
/// checks; an empty string means certified.
struct Certification {
  LimitCycleRecord record;
  Mat10 jacobian = Mat10::Zero();
  std::string why;
  bool ok() const { return why.empty(); }
};

Certification certify(const State& x_star, const GaitParams& gait, const Controller& controller,
                      const CertifyOptions& opt = {}, const SimOptions& sim = {});

struct BaseGait {
  BaseDesignResult design;
  LimitCycleRecord record;
  Mat10 jacobian = Mat10::Zero();  // Poincare Jacobian at the fixed point
  Vec4 sensitivity = Vec4::Zero();
};

/// Designs the base outputs, solves the full-order fixed point and certifies it.
/// Throws Error(kDesignFailed) when certification fails.
BaseGait design_base_gait(const Controller& controller, const BaseDesignConfig& cfg = {});

/// Solves and certifies the base orbit of given outputs.
BaseGait certify_base(const BezierOutputs& outputs, const Controller& controller,
                      const CertifyOptions& opt = {});

struct GaitFamily {
  BezierOutputs base;
  BumpPolynomial bump;
  Vec4 sensitivity = Vec4::Zero();  // d speed / d beta at the base gait
  double base_speed = 0.0;
  double max_gap = 0.01;
  int base_index = 0;
  std::vector<LimitCycleRecord> gaits;  // increasing speed
  std::vector<std::string> warnings;

  double zeta_lb() const;
  double zeta_ub() const;
  double k_max() const;
  double delta_sq() const;  // of the base gait
  GaitParams params(std::size_t p) const;
  std::vector<GaitParams> all_params() const;
};

struct ContinuumOptions {
  double speed_lo = 0.0;
  double speed_hi = 0.0;
  double max_gap = 0.01;        // m/s between neighbours
  double target_gap_fraction = 0.8;
  double initial_dv = 0.002;    // first change in v_des, m/s
  double min_dv = 1e-5;
  int max_gaits = 400;
  CertifyOptions certify;
  NewtonOptions newton;
};

/// Continuation outward from the base speed in both directions. Each gait is
/// warm-started from its neighbour and certified; the continuation in a
/// direction stops at the first failure or when its speed bound is passed.
GaitFamily generate_continuum(const BaseGait& base, const Controller& controller,
                              const ContinuumOptions& opt);

}  // namespace hzd
