#pragma once

#include <Eigen/Dense>

#include "hzd/biped_model.hpp"
#include "hzd/types.hpp"

namespace hzd {

/// Value and first two phase derivatives of a vector-valued function of theta.
struct PhaseProfile {
  Vec4 value = Vec4::Zero();
  Vec4 d1 = Vec4::Zero();
  Vec4 d2 = Vec4::Zero();
};

/// Bezier virtual constraints h_d(theta) on the normalized phase
/// s = (theta - theta_plus) / (theta_minus - theta_plus).
struct BezierOutputs {
  Eigen::Matrix<double, 4, Eigen::Dynamic> coeffs;  // 4 x (degree + 1)
  double theta_plus = 0.0;
  double theta_minus = 1.0;

  int degree() const { return static_cast<int>(coeffs.cols()) - 1; }
  double phase(double theta) const {
    return (theta - theta_plus) / (theta_minus - theta_plus);
  }
  PhaseProfile evaluate(double theta) const;
};

/// Degree-5 bump b(theta) supported on [theta_plus, theta_switch]: it vanishes
/// with its first derivative at theta_plus, vanishes with its first two
/// derivatives at theta_switch, and is identically zero past theta_switch.
/// Coefficients are monomial in u = (theta - theta_plus) / (theta_switch - theta_plus)
/// and scaled so that max |b| = 1.
struct BumpPolynomial {
  Eigen::Matrix<double, 6, 1> coeffs = Eigen::Matrix<double, 6, 1>::Zero();
  double theta_plus = 0.0;
  double theta_switch = 0.9;

  /// Returns (b, db/dtheta, d2b/dtheta2).
  Eigen::Vector3d evaluate(double theta) const;
};

/// Fraction of the step after which the modulation is switched off.
inline constexpr double kBumpSupportFraction = 0.9;

/// Throws Error(kInvalidArgument) when theta_plus == theta_minus.
BumpPolynomial build_bump(double theta_plus, double theta_minus);

/// Base outputs plus the modulation h_s(theta, beta) = beta * b(theta).
struct GaitParams {
  BezierOutputs base;
  BumpPolynomial bump;
  Vec4 beta = Vec4::Zero();

  static GaitParams from_base(BezierOutputs base, const Vec4& beta = Vec4::Zero());
  GaitParams with_beta(const Vec4& b) const {
    GaitParams g = *this;
    g.beta = b;
    return g;
  }
  /// h_d(theta) + h_s(theta, beta) and its phase derivatives.
  PhaseProfile desired(double theta) const;
  /// h_s(theta, beta) alone.
  Vec4 modulation(double theta) const { return beta * bump.evaluate(theta)(0); }
};

/// y = q_a - h_d(theta(q)) - h_s(theta(q), beta).
Vec4 output(const Vec5& q, const GaitParams& gait);
Mat4x5 output_jacobian(const Vec5& q, const GaitParams& gait);

struct LieDerivatives {
  Vec4 y = Vec4::Zero();
  Vec4 lf_h = Vec4::Zero();     // dy/dt
  Vec4 lf2_h = Vec4::Zero();    // drift part of d2y/dt2
  Mat4 lg_lf_h = Mat4::Zero();  // decoupling matrix
  Mat4x5 jacobian = Mat4x5::Zero();
  Vec5 drift_acceleration = Vec5::Zero();  // -D^{-1}(C dq + G)
  Mat5x4 input_acceleration = Mat5x4::Zero();  // D^{-1} B
  double condition = 0.0;       // 1-norm condition estimate of lg_lf_h
};

/// Condition number above which the decoupling matrix is treated as singular.
inline constexpr double kDecouplingConditionLimit = 1e10;

/// Relative-degree-two quantities for the closed loop. Since h depends on q
/// only through q_a and the linear phase theta, the Hessian term reduces to
/// -h''(theta) dtheta^2 and is evaluated exactly.
/// Throws Error(kSingularDecoupling) past kDecouplingConditionLimit.
LieDerivatives lie_derivatives(const State& x, const GaitParams& gait, const BipedModel& model);

}  // namespace hzd
