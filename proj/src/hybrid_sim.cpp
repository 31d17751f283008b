#include "hzd/hybrid_sim.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

namespace hzd {

namespace {

using OdeState = std::array<double, 10>;
namespace odeint = boost::numeric::odeint;

State to_state(const OdeState& s) {
  State x;
  for (int i = 0; i < 5; ++i) {
    x.q(i) = s[i];
    x.dq(i) = s[i + 5];
  }
  return x;
}

OdeState to_ode(const State& x) {
  OdeState s;
  for (int i = 0; i < 5; ++i) {
    s[i] = x.q(i);
    s[i + 5] = x.dq(i);
  }
  return s;
}

struct ClosedLoop {
  const GaitParams& gait;
  const Controller& controller;

  void operator()(const OdeState& s, OdeState& ds, double /*t*/) const {
    const State x = to_state(s);
    const ControlOutput c = controller.compute(x, gait);
    for (int i = 0; i < 5; ++i) {
      ds[i] = x.dq(i);
      ds[i + 5] = c.ddq(i);
    }
  }
};

Sample make_sample(double t, const State& x, const GaitParams& gait, const Controller& controller) {
  const ControlOutput c = controller.compute(x, gait);
  Sample s;
  s.t = t;
  s.x = x;
  s.u = c.u;
  s.force = controller.model().ground_reaction_from_acceleration(x, c.ddq);
  s.theta = BipedModel::theta(x.q);
  s.zeta = zeta(x, controller.model());
  s.output_norm = c.lie.y.norm();
  return s;
}

bool finite(const OdeState& s) {
  for (double v : s) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

void ConstraintMonitor::observe(const Vec4& u, const GroundForce& f, const ModelParams& limits) {
  const double torque = u.cwiseAbs().maxCoeff();
  max_torque = std::max(max_torque, torque);
  min_normal = std::min(min_normal, f.normal);
  const double ratio = f.normal > 0.0 ? std::abs(f.tangential) / f.normal
                                      : std::numeric_limits<double>::infinity();
  max_friction_ratio = std::max(max_friction_ratio, ratio);
  torque_violated |= torque > limits.torque_limit;
  normal_violated |= f.normal < limits.min_normal_force;
  friction_violated |= ratio > limits.friction_limit;
}

void ConstraintMonitor::merge(const ConstraintMonitor& other) {
  max_torque = std::max(max_torque, other.max_torque);
  min_normal = std::min(min_normal, other.min_normal);
  max_friction_ratio = std::max(max_friction_ratio, other.max_friction_ratio);
  torque_violated |= other.torque_violated;
  normal_violated |= other.normal_violated;
  friction_violated |= other.friction_violated;
}

std::string ConstraintMonitor::reason() const {
  std::string r;
  auto add = [&r](const char* what) {
    if (!r.empty()) r += ';';
    r += what;
  };
  if (torque_violated) add("torque");
  if (normal_violated) add("normal_force");
  if (friction_violated) add("friction");
  return r;
}

double zeta(const State& x, const BipedModel& model) {
  const double sigma = model.mass_matrix(x.q).row(0).dot(x.dq);
  return 0.5 * sigma * sigma;
}

StepResult integrate_step(const State& post_impact, const GaitParams& gait,
                          const Controller& controller, const SimOptions& opt) {
  const BipedModel& model = controller.model();
  const ModelParams& limits = model.params();
  const ClosedLoop system{gait, controller};
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol,
                                         odeint::runge_kutta_dopri5<OdeState>());
  odeint::runge_kutta_dopri5<OdeState> single;

  StepResult res;
  res.start = post_impact;
  OdeState s = to_ode(post_impact);
  double t = 0.0;
  double dt = 1e-3;
  double height = model.swing_foot_height(post_impact.q);
  double theta_prev = BipedModel::theta(post_impact.q);
  const double breakpoint = gait.bump.theta_switch;
  bool breakpoint_pending = !gait.beta.isZero(0.0) && theta_prev < breakpoint;

  auto observe = [&](double time, const State& x) {
    const Sample smp = make_sample(time, x, gait, controller);
    res.constraints.observe(smp.u, smp.force, limits);
    res.max_output_norm = std::max(res.max_output_norm, smp.output_norm);
    if (opt.record) res.samples.push_back(smp);
  };
  observe(0.0, post_impact);

  for (;;) {
    const OdeState s_prev = s;
    const double t_prev = t;
    int rejected = 0;
    dt = std::min(dt, opt.max_dt);
    while (stepper.try_step(system, s, t, dt) == odeint::fail) {
      if (++rejected > 100 || dt < 1e-14) {
        throw Error(ErrorCode::kIntegration, "step size underflow in swing-phase integration");
      }
    }
    if (!finite(s)) throw Error(ErrorCode::kIntegration, "non-finite state during swing phase");

    State x = to_state(s);
    double h_new = model.swing_foot_height(x.q);
    // Single steps of the same scheme from s_prev, for locating events.
    OdeState ds_prev;
    system(s_prev, ds_prev, t_prev);
    auto advance = [&](double tau) {
      OdeState out, ds_out;
      single.do_step(system, s_prev, ds_prev, t_prev, out, ds_out, tau);
      return out;
    };
    if (breakpoint_pending && BipedModel::theta(x.q) > breakpoint && h_new > 0.0) {
      // Restart the integration exactly where the modulation ends, where the
      // outputs lose third-order smoothness.
      auto g = [&](double tau) { return BipedModel::theta(to_state(advance(tau)).q) - breakpoint; };
      std::uintmax_t iters = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          g, 0.0, t - t_prev, BipedModel::theta(to_state(s_prev).q) - breakpoint,
          BipedModel::theta(x.q) - breakpoint, boost::math::tools::eps_tolerance<double>(52),
          iters);
      const double tau = bracket.second;
      s = advance(tau);
      t = t_prev + tau;
      x = to_state(s);
      h_new = model.swing_foot_height(x.q);
      stepper.reset();
      breakpoint_pending = false;
    }
    if (height > 0.0 && h_new <= 0.0) {
      auto g = [&](double tau) { return model.swing_foot_height(to_state(advance(tau)).q); };
      const double span = t - t_prev;
      std::uintmax_t iters = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          g, 0.0, span, height, h_new, boost::math::tools::eps_tolerance<double>(52), iters);
      double tau = 0.5 * (bracket.first + bracket.second);
      if (std::abs(g(bracket.first)) < std::abs(g(tau))) tau = bracket.first;
      if (std::abs(g(bracket.second)) < std::abs(g(tau))) tau = bracket.second;
      x = to_state(advance(tau));
      if (std::abs(model.swing_foot_height(x.q)) > opt.event_tol) {
        std::ostringstream msg;
        msg << "impact event not resolved: |p_v| = " << std::abs(model.swing_foot_height(x.q));
        throw Error(ErrorCode::kIntegration, msg.str());
      }
      t = t_prev + tau;
      observe(t, x);
      res.pre_impact = x;
      res.duration = t;
      res.step_length = model.step_length(x.q);
      res.speed = res.step_length / t;
      return res;
    }

    const double theta = BipedModel::theta(x.q);
    if (!(theta > theta_prev)) {
      std::ostringstream msg;
      msg << "phase variable stopped increasing at t = " << t << " (theta " << theta << ")";
      throw Error(ErrorCode::kGaitInvalid, msg.str());
    }
    theta_prev = theta;
    height = h_new;
    observe(t, x);
    if (t > opt.max_step_time) {
      throw Error(ErrorCode::kNoImpact, "no impact within the maximum step time (fall)");
    }
  }
}

StepResult step_from_surface(const State& on_surface, const GaitParams& gait,
                             const Controller& controller, const SimOptions& opt) {
  const ImpactResult imp = controller.model().impact(on_surface);
  return integrate_step(imp.post, gait, controller, opt);
}

State poincare(const State& on_surface, const GaitParams& gait, const Controller& controller,
               const SimOptions& opt) {
  SimOptions o = opt;
  o.record = false;
  return step_from_surface(on_surface, gait, controller, o).pre_impact;
}

PoincareJacobian poincare_jacobian(const State& x, const GaitParams& gait,
                                   const Controller& controller, const SimOptions& opt,
                                   double rel_step) {
  PoincareJacobian out;
  const Vec10 x0 = x.stacked();
  for (int i = 0; i < 10; ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x0(i)));
    Vec10 xp = x0;
    Vec10 xm = x0;
    xp(i) += h;
    xm(i) -= h;
    const Vec10 fp = poincare(State::from_stacked(xp), gait, controller, opt).stacked();
    const Vec10 fm = poincare(State::from_stacked(xm), gait, controller, opt).stacked();
    out.full.col(i) = (fp - fm) / (2.0 * h);
  }
  if (!out.full.allFinite()) {
    throw Error(ErrorCode::kIntegration, "non-finite Poincare Jacobian");
  }
  // Tangent space of S = {p_v(q) = 0}: orthogonal complement of the height gradient.
  Vec10 normal = Vec10::Zero();
  normal.head<5>() = controller.model().swing_toe_jacobian(x.q).row(1).transpose();
  normal.normalize();
  const Eigen::HouseholderQR<Vec10> qr(normal);
  const Mat10 q = qr.householderQ();
  out.basis = q.rightCols<9>();
  out.section = out.basis.transpose() * out.full * out.basis;
  out.eigenvalues = out.section.eigenvalues();
  out.spectral_radius = out.eigenvalues.cwiseAbs().maxCoeff();
  return out;
}

std::vector<StepResult> run_switched(const State& x0, const SwitchSignal& signal,
                                     const std::vector<GaitParams>& gaits,
                                     const Controller& controller, const SimOptions& opt) {
  std::vector<StepResult> out;
  out.reserve(signal.size());
  State x = x0;
  double t = 0.0;
  for (std::size_t k = 0; k < signal.size(); ++k) {
    const int p = signal.at(k);
    StepResult r = step_from_surface(x, gaits.at(static_cast<std::size_t>(p)), controller, opt);
    r.gait = p;
    r.index = static_cast<int>(k);
    r.t_start = t;
    for (Sample& s : r.samples) s.t += t;
    t += r.duration;
    x = r.pre_impact;
    out.push_back(std::move(r));
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<StepResult>& steps) {
  out << kTrajectoryHeader << '\n';
  out << std::setprecision(12);
  for (const StepResult& r : steps) {
    for (const Sample& s : r.samples) {
      out << s.t;
      for (int i = 0; i < 5; ++i) out << ',' << s.x.q(i);
      for (int i = 0; i < 5; ++i) out << ',' << s.x.dq(i);
      for (int i = 0; i < 4; ++i) out << ',' << s.u(i);
      out << ',' << s.force.tangential << ',' << s.force.normal << ',' << s.theta << ','
          << s.zeta << ',' << s.output_norm << ',' << r.index << ',' << r.gait << '\n';
    }
  }
}

}  // namespace hzd
