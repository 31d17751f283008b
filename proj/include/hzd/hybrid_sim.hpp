#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "hzd/controller.hpp"

namespace hzd {

struct SimOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double event_tol = 1e-10;  // m, |p_v| at the located impact
  double max_step_time = 2.0;  // s
  double max_dt = std::numeric_limits<double>::infinity();  // s, caps the integrator step
  bool record = true;          // keep dense samples
};

struct Sample {
  double t = 0.0;
  State x;
  Vec4 u = Vec4::Zero();
  GroundForce force;
  double theta = 0.0;
  double zeta = 0.0;
  double output_norm = 0.0;
};

/// Worst values seen along a trajectory and whether any limit was crossed.
struct ConstraintMonitor {
  double max_torque = 0.0;
  double min_normal = std::numeric_limits<double>::infinity();
  double max_friction_ratio = 0.0;
  bool torque_violated = false;
  bool normal_violated = false;
  bool friction_violated = false;

  void observe(const Vec4& u, const GroundForce& f, const ModelParams& limits);
  void merge(const ConstraintMonitor& other);
  bool violated() const { return torque_violated || normal_violated || friction_violated; }
  /// Human-readable list of violated limits, empty when none.
  std::string reason() const;
};

struct StepResult {
  State start;           // post-impact state the flow started from
  State pre_impact;      // state on S at the end of the step
  double t_start = 0.0;  // s, absolute
  double duration = 0.0; // s
  double step_length = 0.0;  // m
  double speed = 0.0;        // m/s
  double max_output_norm = 0.0;
  ConstraintMonitor constraints;
  std::vector<Sample> samples;
  int gait = -1;
  int index = 0;
};

/// Flows the closed loop from a post-impact state to the next downward
/// crossing of the switching surface.
/// Throws Error(kNoImpact) past max_step_time, Error(kGaitInvalid) if the phase
/// stops increasing, Error(kIntegration) on non-finite states.
StepResult integrate_step(const State& post_impact, const GaitParams& gait,
                          const Controller& controller, const SimOptions& opt = {});

/// Impact first, then flow: P(x) = phi(T_I, Delta(x)).
State poincare(const State& on_surface, const GaitParams& gait, const Controller& controller,
               const SimOptions& opt = {});

/// One full step from a state on S (impact, then flow); the returned result
/// also records the impact that started it.
StepResult step_from_surface(const State& on_surface, const GaitParams& gait,
                             const Controller& controller, const SimOptions& opt = {});

struct PoincareJacobian {
  Mat10 full = Mat10::Zero();
  Eigen::MatrixXd section;            // 9x9 restriction to the tangent of S
  Eigen::Matrix<double, 10, 9> basis; // orthonormal basis of that tangent space
  Eigen::VectorXcd eigenvalues;       // of the section Jacobian
  double spectral_radius = 0.0;
};

/// Central differences with step rel_step * max(1, |x_i|) per coordinate.
PoincareJacobian poincare_jacobian(const State& x, const GaitParams& gait,
                                   const Controller& controller, const SimOptions& opt = {},
                                   double rel_step = 1e-6);

/// zeta = (D_1(q) dq)^2 / 2, the squared angular momentum about the stance toe.
double zeta(const State& x, const BipedModel& model);

/// Gait index applied at each step k.
struct SwitchSignal {
  std::vector<int> gaits;
  int at(std::size_t k) const { return gaits.at(k); }
  std::size_t size() const { return gaits.size(); }
};

/// Iterates x[k+1] = P_{sigma(k)}(x[k]) from a state on S.
std::vector<StepResult> run_switched(const State& x0, const SwitchSignal& signal,
                                     const std::vector<GaitParams>& gaits,
                                     const Controller& controller, const SimOptions& opt = {});

/// Column order of the trajectory CSV.
inline constexpr const char* kTrajectoryHeader =
    "t,q1,q2,q3,q4,q5,dq1,dq2,dq3,dq4,dq5,u1,u2,u3,u4,F_t,F_n,theta,zeta,y_norm,step,gait";

void write_trajectory_csv(std::ostream& out, const std::vector<StepResult>& steps);

}  // namespace hzd
