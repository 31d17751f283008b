#pragma once

#include <vector>

#include "hzd/switch_graph.hpp"

namespace hzd {

struct ScheduleEntry {
  double time = 0.0;   // s, when the request becomes active
  double speed = 0.0;  // m/s
};

struct SpeedSchedule {
  std::vector<ScheduleEntry> entries;

  /// Throws Error(kInvalidArgument) for an empty schedule, non-increasing
  /// triggers or speeds outside [lo, hi].
  void validate(double lo, double hi) const;
};

/// Family member with the speed nearest v; ties go to the slower gait.
int nearest_gait(const GaitFamily& family, double v);

struct SupervisorOptions {
  double epsilon = 2.0;
  double duration = 60.0;  // s of walking
  int max_steps = 100000;
  bool record_trajectory = true;
  bool abort_on_violation = true;
  SimOptions sim;
};

struct StepLog {
  int step = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  int gait = 0;
  double speed = 0.0;
  double v_des = 0.0;
  double zeta = 0.0;         // at the end of the step
  double zeta_target = 0.0;  // of the gait being held
  bool in_ball = false;
};

struct SwitchEvent {
  int step = 0;  // first step walked with the new gait
  double time = 0.0;
  int from = 0;
  int to = 0;
  double zeta = 0.0;
  double zeta_target = 0.0;  // of the new gait
  double v_des = 0.0;
};

/// What the supervisor knows between steps.
struct SupervisorState {
  int current = 0;
  std::vector<int> path;  // nodes still to visit
  double zeta = 0.0;
  bool converged = false;  // zeta in the eps-ball of the current node
};

struct SupervisorRun {
  std::vector<StepResult> steps;
  std::vector<StepLog> log;
  std::vector<SwitchEvent> switches;
  std::vector<PlannedPath> plans;
  std::vector<double> zeta;  // pre-impact zeta before each step and after the last
  std::vector<int> signal;   // gait applied at each step
  ConstraintMonitor constraints;
  SupervisorState state;
};

/// Walks the schedule: on each request, plans from the current node to the
/// node nearest the desired speed and moves to the next node of the plan
/// only once zeta has entered the eps-ball of the current node.
/// Throws Error(kConstraintViolation) on a violated limit when
/// abort_on_violation is set, Error(kUnreachable) from the planner.
SupervisorRun supervise(const SpeedSchedule& schedule, const GaitFamily& family,
                        const SwitchGraph& graph, const Controller& controller,
                        const SupervisorOptions& opt = {});

/// zeta[k+1] = delta_sq(p) zeta[k] - V_p(theta_minus) along a switching signal.
std::vector<double> affine_replay(const GaitFamily& family, const std::vector<int>& signal,
                                  double zeta0);

}  // namespace hzd
