#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace hzd {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat2x5 = Eigen::Matrix<double, 2, 5>;
using Mat4 = Eigen::Matrix4d;
using Mat4x5 = Eigen::Matrix<double, 4, 5>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat5x4 = Eigen::Matrix<double, 5, 4>;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Mat10 = Eigen::Matrix<double, 10, 10>;

enum class ErrorCode {
  kConfig,
  kSingularImpact,
  kInvalidImpact,
  kSingularDecoupling,
  kNoImpact,
  kGaitInvalid,
  kIntegration,
  kNewtonDivergence,
  kSingularJacobian,
  kModelViolation,
  kDesignFailed,
  kUnreachable,
  kMissingArtifact,
  kInvalidArgument,
  kConstraintViolation,
};

std::string_view to_string(ErrorCode code);

/// Error type thrown by every module. `code()` is stable and is what the CLI
/// reports in its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Full robot state x = (q, dq).
///
/// Coordinates (all angles in rad, measured clockwise from the upward
/// vertical, so that a positive angle leans the upper end of a link toward
/// the walking direction +x):
///   q1  absolute torso pitch (the unactuated coordinate)
///   q2  stance hip: stance femur relative to torso
///   q3  swing hip: swing femur relative to torso
///   q4  stance knee: stance shank relative to stance femur
///   q5  swing knee: swing shank relative to swing femur
/// Leg links are oriented from their lower joint to their upper joint, so
/// the absolute stance-femur angle is q1 + q2 and the absolute stance-shank
/// angle is q1 + q2 + q4. With equal femur and shank lengths the phase
/// theta = q1 + q2 + q4/2 is exactly the angle of the stance toe-to-hip line.
struct State {
  Vec5 q = Vec5::Zero();
  Vec5 dq = Vec5::Zero();

  Vec10 stacked() const {
    Vec10 x;
    x << q, dq;
    return x;
  }
  static State from_stacked(const Vec10& x) {
    return State{x.head<5>(), x.tail<5>()};
  }
  bool finite() const { return q.allFinite() && dq.allFinite(); }
};

struct GroundForce {
  double tangential = 0.0;  // N
  double normal = 0.0;      // N
};

}  // namespace hzd
