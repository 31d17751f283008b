#include "hzd/supervisor.hpp"

#include <cmath>
#include <sstream>

namespace hzd {

void SpeedSchedule::validate(double lo, double hi) const {
  if (entries.empty()) throw Error(ErrorCode::kInvalidArgument, "speed schedule is empty");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ScheduleEntry& e = entries[i];
    if (i > 0 && !(e.time > entries[i - 1].time)) {
      throw Error(ErrorCode::kInvalidArgument, "schedule triggers must be increasing");
    }
    if (!(e.speed >= lo && e.speed <= hi)) {
      std::ostringstream msg;
      msg << "scheduled speed " << e.speed << " m/s outside the family range [" << lo << ", "
          << hi << "]";
      throw Error(ErrorCode::kInvalidArgument, msg.str());
    }
  }
}

int nearest_gait(const GaitFamily& family, double v) {
  if (family.gaits.empty()) throw Error(ErrorCode::kInvalidArgument, "empty gait family");
  int best = 0;
  double best_d = std::abs(family.gaits[0].speed - v);
  for (std::size_t p = 1; p < family.gaits.size(); ++p) {
    const double d = std::abs(family.gaits[p].speed - v);
    // Gaits are sorted by speed, so keeping the first minimum favours the slower one.
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(p);
    }
  }
  return best;
}

SupervisorRun supervise(const SpeedSchedule& schedule, const GaitFamily& family,
                        const SwitchGraph& graph, const Controller& controller,
                        const SupervisorOptions& opt) {
  if (family.gaits.empty()) throw Error(ErrorCode::kInvalidArgument, "empty gait family");
  schedule.validate(family.gaits.front().speed - family.max_gap,
                    family.gaits.back().speed + family.max_gap);
  const BipedModel& model = controller.model();
  const std::vector<GaitParams> gaits = family.all_params();
  auto zeta_of = [&](int p) { return family.gaits.at(static_cast<std::size_t>(p)).zeta_star; };

  SupervisorRun run;
  SupervisorState& st = run.state;
  std::size_t next_entry = 0;
  double v_des = schedule.entries.front().speed;
  st.current = nearest_gait(family, v_des);
  State x = family.gaits.at(static_cast<std::size_t>(st.current)).x_star;
  st.zeta = zeta(x, model);
  run.zeta.push_back(st.zeta);
  SimOptions sim = opt.sim;
  sim.record = opt.record_trajectory;

  double t = 0.0;
  for (int k = 0; k < opt.max_steps && t < opt.duration; ++k) {
    while (next_entry < schedule.entries.size() && t >= schedule.entries[next_entry].time) {
      v_des = schedule.entries[next_entry].speed;
      ++next_entry;
      const PlannedPath plan = plan_path(graph, st.current, nearest_gait(family, v_des));
      run.plans.push_back(plan);
      st.path.assign(plan.nodes.empty() ? plan.nodes.begin() : plan.nodes.begin() + 1,
                     plan.nodes.end());
    }
    st.converged = std::abs(st.zeta - zeta_of(st.current)) < opt.epsilon;
    if (st.converged && !st.path.empty()) {
      SwitchEvent ev;
      ev.step = k;
      ev.time = t;
      ev.from = st.current;
      ev.to = st.path.front();
      ev.zeta = st.zeta;
      ev.zeta_target = zeta_of(ev.to);
      ev.v_des = v_des;
      run.switches.push_back(ev);
      st.current = st.path.front();
      st.path.erase(st.path.begin());
    }

    StepResult r =
        step_from_surface(x, gaits.at(static_cast<std::size_t>(st.current)), controller, sim);
    r.gait = st.current;
    r.index = k;
    r.t_start = t;
    for (Sample& s : r.samples) s.t += t;
    if (r.constraints.violated() && opt.abort_on_violation) {
      std::ostringstream msg;
      msg << "constraint violated at step " << k << " (" << r.constraints.reason()
          << "): max torque " << r.constraints.max_torque << " N m, min normal force "
          << r.constraints.min_normal << " N, friction ratio "
          << r.constraints.max_friction_ratio;
      throw Error(ErrorCode::kConstraintViolation, msg.str());
    }
    run.constraints.merge(r.constraints);
    x = r.pre_impact;
    st.zeta = zeta(x, model);

    StepLog log;
    log.step = k;
    log.t_start = t;
    log.t_end = t + r.duration;
    log.gait = st.current;
    log.speed = r.speed;
    log.v_des = v_des;
    log.zeta = st.zeta;
    log.zeta_target = zeta_of(st.current);
    log.in_ball = std::abs(st.zeta - log.zeta_target) < opt.epsilon;
    run.log.push_back(log);
    run.signal.push_back(st.current);
    run.zeta.push_back(st.zeta);
    t = log.t_end;
    run.steps.push_back(std::move(r));
  }
  st.converged = std::abs(st.zeta - zeta_of(st.current)) < opt.epsilon;
  return run;
}

std::vector<double> affine_replay(const GaitFamily& family, const std::vector<int>& signal,
                                  double zeta0) {
  std::vector<double> z{zeta0};
  for (int p : signal) {
    const LimitCycleRecord& g = family.gaits.at(static_cast<std::size_t>(p));
    z.push_back(g.delta_sq * z.back() - g.v_minus);
  }
  return z;
}

}  // namespace hzd
