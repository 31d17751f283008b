#include "hzd/base_design.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace hzd {

Vec5 impact_configuration(const BipedModel& model, const ImpactPosture& p) {
  Vec5 q;
  q(0) = p.torso;
  q(3) = p.stance_knee;
  q(1) = p.theta_minus - p.torso - 0.5 * p.stance_knee;
  q(4) = p.swing_knee;
  q(2) = -p.theta_minus - p.torso - 0.5 * p.swing_knee;
  for (int it = 0; it < 50 && std::abs(model.swing_foot_height(q)) > 1e-14; ++it) {
    const double slope = model.swing_toe_jacobian(q)(1, 2);
    if (std::abs(slope) < 1e-9) break;
    q(2) -= model.swing_foot_height(q) / slope;
  }
  if (std::abs(model.swing_foot_height(q)) > 1e-12 || model.step_length(q) <= 0.0) {
    throw Error(ErrorCode::kDesignFailed, "impact posture has no forward double-support solution");
  }
  return q;
}

BezierOutputs impact_invariant_outputs(const BipedModel& model, const ImpactPosture& posture,
                                       const Eigen::MatrixXd& offsets, int degree) {
  if (degree < 4 || offsets.rows() != 4 || offsets.cols() != degree - 2) {
    throw Error(ErrorCode::kInvalidArgument, "Bezier offsets must be 4 x (degree - 2)");
  }
  const Vec5 q_minus = impact_configuration(model, posture);
  const Vec5 q_plus = BipedModel::relabel_matrix() * q_minus;

  BezierOutputs out;
  out.theta_minus = BipedModel::theta(q_minus);
  out.theta_plus = BipedModel::theta(q_plus);
  const double span = out.theta_minus - out.theta_plus;
  if (!(span > 0.0)) throw Error(ErrorCode::kDesignFailed, "impact posture gives theta_plus >= theta_minus");

  const int m = degree;
  out.coeffs.resize(4, m + 1);
  const Vec4 a0 = q_plus.tail<4>();
  const Vec4 am = q_minus.tail<4>();
  for (int k = 0; k <= m; ++k) out.coeffs.col(k) = a0 + (am - a0) * (double(k) / m);
  for (int k = 2; k <= m - 1; ++k) out.coeffs.col(k) += offsets.col(k - 2);

  // Velocity direction just before impact, per unit phase rate.
  const Vec4 slope_minus = m * (am - out.coeffs.col(m - 1)) / span;
  Vec5 dq_minus;
  dq_minus << 1.0 - slope_minus(0) - 0.5 * slope_minus(2), slope_minus;
  const ImpactResult imp = model.impact(State{q_minus, dq_minus});
  const double dtheta_plus = BipedModel::theta_gradient().dot(imp.post.dq);
  if (!(dtheta_plus > 1e-9)) throw Error(ErrorCode::kDesignFailed, "impact reverses the phase rate");
  out.coeffs.col(1) = a0 + span / m * imp.post.dq.tail<4>() / dtheta_plus;
  return out;
}

Eigen::MatrixXd match_impact_toe_velocity(const BipedModel& model, const ImpactPosture& posture,
                                          const Eigen::MatrixXd& offsets, const Vec2& toe_velocity,
                                          int degree) {
  const BezierOutputs out = impact_invariant_outputs(model, posture, offsets, degree);
  const Vec5 q_minus = impact_configuration(model, posture);
  const double span = out.theta_minus - out.theta_plus;
  const int m = degree;
  const Vec4 slope = m * (out.coeffs.col(m) - out.coeffs.col(m - 1)) / span;
  Mat5x4 lift = Mat5x4::Zero();
  lift(0, 0) = -1.0;
  lift(0, 2) = -0.5;
  lift.bottomRows<4>().setIdentity();
  const Mat2x5 j = model.swing_toe_jacobian(q_minus);
  const Eigen::Matrix<double, 2, 4> a = j * lift * (-m / span);
  const Vec2 residual = toe_velocity - j * (Vec5::Unit(0) + lift * slope);
  Eigen::MatrixXd result = offsets;
  result.col(m - 3) += a.completeOrthogonalDecomposition().solve(residual);
  return result;
}

ReducedGaitSummary summarize_reduced(const BipedModel& model, const GaitParams& gait, int grid) {
  ReducedGaitSummary s;
  const ZeroDynamics zd(model, gait);
  const double delta = zd.delta_z();
  s.delta_sq = delta * delta;

  const auto profile = zd.potential_profile(grid);
  s.v_minus = profile.back().potential;
  s.k = 0.0;
  for (const auto& p : profile) s.k = std::max(s.k, p.potential);

  const ZeroDynamicsPoint pm = zd.at(zd.theta_minus());
  s.step_length = model.step_length(pm.q);
  s.pre_impact_toe_velocity = model.swing_foot_velocity(pm.q, pm.dq);
  s.impact_valid = model.impact(State{pm.q, pm.dq}).valid;

  s.min_inertia = std::numeric_limits<double>::infinity();
  s.min_knee = std::numeric_limits<double>::infinity();
  s.min_clearance = std::numeric_limits<double>::infinity();
  s.min_height = std::numeric_limits<double>::infinity();
  const double span = zd.theta_minus() - zd.theta_plus();
  for (int i = 0; i <= grid; ++i) {
    const double th = zd.theta_plus() + span * i / grid;
    const ZeroDynamicsPoint p = zd.at(th);
    s.min_inertia = std::min(s.min_inertia, p.inertia);
    s.min_knee = std::min({s.min_knee, p.q(3), p.q(4)});
    if (i >= grid / 5 && i <= grid - grid / 5) {
      s.min_clearance = std::min(s.min_clearance, model.swing_foot_height(p.q));
    }
    if (i > 0 && i < grid) s.min_height = std::min(s.min_height, model.swing_foot_height(p.q));
  }
  if (!(s.delta_sq < 1.0) || !(s.v_minus < 0.0) || !(s.min_inertia > 0.0)) return s;
  s.zeta_star = -s.v_minus / (1.0 - s.delta_sq);
  const double zeta_plus = s.delta_sq * s.zeta_star;
  if (!(zeta_plus > s.k)) return s;

  const ZeroDynamicsOrbit orbit = zd.orbit(zeta_plus, grid);
  s.period = orbit.period;
  s.speed = s.step_length / s.period;
  s.min_normal = std::numeric_limits<double>::infinity();
  for (const auto& sample : orbit.samples) {
    s.max_torque = std::max(s.max_torque, sample.u.cwiseAbs().maxCoeff());
    s.min_normal = std::min(s.min_normal, sample.force.normal);
    if (sample.force.normal > 0.0) {
      s.max_friction_ratio =
          std::max(s.max_friction_ratio, std::abs(sample.force.tangential) / sample.force.normal);
    } else {
      s.max_friction_ratio = std::numeric_limits<double>::infinity();
    }
  }
  s.exists = true;
  return s;
}

namespace {

double hinge(double shortfall) { return shortfall > 0.0 ? shortfall * shortfall : 0.0; }

}  // namespace

double design_cost(const ReducedGaitSummary& s, const BipedModel& model,
                   const BaseDesignConfig& cfg) {
  const ModelParams& lim = model.params();
  double c = 0.0;
  c += 1e3 * hinge(s.delta_sq - cfg.max_delta_sq);
  c += 1e4 * hinge(0.02 - s.min_inertia);
  c += 1e3 * hinge(s.pre_impact_toe_velocity + 0.05);
  c += s.impact_valid ? 0.0 : 10.0;
  c += 1e3 * hinge(cfg.clearance - s.min_clearance);
  c += 10.0 * hinge(-s.min_knee);
  c += 1e4 * hinge(-s.min_height);
  if (!s.exists) {
    // Graded push toward a fixed point inside the domain: the momentum after
    // impact must exceed the potential barrier K.
    const double shortfall = s.k * (1.0 - s.delta_sq) + s.delta_sq * s.v_minus;
    return c + 1e3 + 1e2 * hinge(s.delta_sq - 0.99) + 1e-2 * std::max(shortfall, 0.0);
  }
  c += hinge(cfg.domain_factor - s.delta_sq * s.zeta_star / std::max(s.k, 1e-9));
  c += 1e4 * std::pow((s.speed - cfg.target_speed) / cfg.target_speed, 2);
  c += 10.0 * hinge((s.max_torque - cfg.torque_fraction * lim.torque_limit) / lim.torque_limit);
  c += 10.0 * hinge((cfg.normal_factor * lim.min_normal_force - s.min_normal) / lim.min_normal_force);
  c += 10.0 * hinge(s.max_friction_ratio - cfg.friction_fraction * lim.friction_limit);
  c += 1e-2 * std::pow(s.max_torque / lim.torque_limit, 2);
  return c;
}

double reduced_step_speed(const BipedModel& model, const GaitParams& gait, double zeta_plus,
                          int grid) {
  const ZeroDynamics zd(model, gait);
  const ZeroDynamicsOrbit orbit = zd.orbit(zeta_plus, grid);
  return model.step_length(zd.configuration(zd.theta_minus())) / orbit.period;
}

Vec4 reduced_speed_sensitivity(const BipedModel& model, const GaitParams& gait, double zeta_plus,
                               int grid, double step) {
  Vec4 j;
  for (int i = 0; i < 4; ++i) {
    Vec4 e = Vec4::Zero();
    e(i) = step;
    j(i) = (reduced_step_speed(model, gait.with_beta(gait.beta + e), zeta_plus, grid) -
            reduced_step_speed(model, gait.with_beta(gait.beta - e), zeta_plus, grid)) /
           (2.0 * step);
  }
  return j;
}

SpeedRangeProbe probe_speed_range(const BipedModel& model, const GaitParams& base,
                                  double fraction, int grid) {
  SpeedRangeProbe r;
  const ReducedGaitSummary s0 = summarize_reduced(model, base, grid);
  if (!s0.exists) return r;
  const Vec4 j = reduced_speed_sensitivity(model, base, s0.delta_sq * s0.zeta_star, grid, 1e-4);
  if (!(j.squaredNorm() > 0.0)) return r;
  r.direction = j / j.squaredNorm();

  auto find = [&](double target, double& s_out, ReducedGaitSummary& out) {
    auto speed_at = [&](double s, ReducedGaitSummary& sum) {
      sum = summarize_reduced(model, base.with_beta(s * r.direction), grid);
      return sum.exists ? sum.speed : 0.0;
    };
    double a = 0.0, fa = s0.speed - target;
    double b = (target - s0.speed) * (1.0 - s0.delta_sq);
    ReducedGaitSummary sb;
    double fb = speed_at(b, sb) - target;
    for (int it = 0; it < 12; ++it) {
      if (std::abs(fb) < 1e-4 * target && sb.exists) {
        s_out = b;
        out = sb;
        return true;
      }
      double next = b - fb * (b - a) / (fb - fa);
      if (!sb.exists || !std::isfinite(next)) next = 0.5 * (a + b);
      a = b;
      fa = fb;
      b = next;
      fb = speed_at(b, sb) - target;
    }
    return false;
  };
  r.found = find(s0.speed * (1.0 + fraction), r.s_fast, r.fast) &&
            find(s0.speed * (1.0 - fraction), r.s_slow, r.slow);
  r.base = s0;
  return r;
}

double range_cost(const SpeedRangeProbe& p, const BipedModel& model, const BaseDesignConfig& cfg) {
  if (!p.found) return 50.0;
  const ModelParams& lim = model.params();
  double c = 0.0;
  for (const ReducedGaitSummary* s : {&p.slow, &p.fast}) {
    c += 10.0 * hinge((s->max_torque - cfg.range_torque_fraction * lim.torque_limit) / lim.torque_limit);
    c += 10.0 * hinge((cfg.range_normal_factor * lim.min_normal_force - s->min_normal) /
                      lim.min_normal_force);
    c += 10.0 * hinge(s->max_friction_ratio - cfg.range_friction_fraction * lim.friction_limit);
    c += 1e3 * hinge(cfg.clearance - s->min_clearance);
    c += 1e4 * hinge(-s->min_height);
  }
  // Boundedness under arbitrary switching needs the slowest fixed point above
  // every barrier.
  const double k = std::max({p.base.k, p.slow.k, p.fast.k});
  c += 10.0 * hinge(cfg.range_domain_factor - p.slow.delta_sq * p.slow.zeta_star / std::max(k, 1e-9));
  return c;
}

namespace {

struct DesignProblem {
  const BipedModel* model;
  const BaseDesignConfig* cfg;
  bool robust = false;
  int evaluations = 0;

  int offsets() const { return 4 * (cfg->degree - 2); }

  static ImpactPosture posture(const gsl_vector* x) {
    return {gsl_vector_get(x, 0), gsl_vector_get(x, 1), gsl_vector_get(x, 2), gsl_vector_get(x, 3)};
  }
  Eigen::MatrixXd offset_matrix(const gsl_vector* x) const {
    Eigen::MatrixXd off(4, cfg->degree - 2);
    for (int i = 0; i < offsets(); ++i) off(i % 4, i / 4) = gsl_vector_get(x, 4 + i);
    return off;
  }

  double cost(const gsl_vector* x) {
    ++evaluations;
    try {
      const BezierOutputs out =
          impact_invariant_outputs(*model, posture(x), offset_matrix(x), cfg->degree);
      const GaitParams gait = GaitParams::from_base(out);
      const ReducedGaitSummary s = summarize_reduced(*model, gait, cfg->grid);
      double c = design_cost(s, *model, *cfg);
      if (robust && s.exists) {
        c += range_cost(probe_speed_range(*model, gait, cfg->speed_range, cfg->range_grid), *model,
                        *cfg);
      } else if (robust) {
        c += 50.0;
      }
      return std::isfinite(c) ? std::min(c, 1e6) : 1e6;
    } catch (const Error&) {
      return 1e6;
    }
  }

  static double call(const gsl_vector* x, void* self) {
    return static_cast<DesignProblem*>(self)->cost(x);
  }
};

double minimize(DesignProblem& problem, gsl_vector* x, int budget, int restarts) {
  const std::size_t n = x->size;
  gsl_multimin_function fn{&DesignProblem::call, n, &problem};
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> nm(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n),
      gsl_multimin_fminimizer_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(n), gsl_vector_free);

  double best = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart <= restarts; ++restart) {
    const double scale = std::pow(0.5, restart);
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(step.get(), i, (i < 4 ? 0.04 : 0.1) * scale);
    gsl_multimin_fminimizer_set(nm.get(), &fn, x, step.get());
    const int start = problem.evaluations;
    while (problem.evaluations - start < budget / (restarts + 1)) {
      if (gsl_multimin_fminimizer_iterate(nm.get()) != GSL_SUCCESS) break;
      if (gsl_multimin_fminimizer_size(nm.get()) < 1e-7) break;
    }
    gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(nm.get()));
    const double value = gsl_multimin_fminimizer_minimum(nm.get());
    const bool stalled = value > best - 1e-9;
    best = std::min(best, value);
    if (stalled) break;
  }
  return best;
}

}  // namespace

BaseDesignResult design_base_outputs(const BipedModel& model, const BaseDesignConfig& cfg) {
  if (cfg.degree < 4) throw Error(ErrorCode::kInvalidArgument, "Bezier degree must be at least 4");
  gsl_set_error_handler_off();
  DesignProblem problem{&model, &cfg};
  const std::size_t n = 4 + static_cast<std::size_t>(problem.offsets());

  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
  gsl_vector_set(x.get(), 0, cfg.initial.theta_minus);
  gsl_vector_set(x.get(), 1, cfg.initial.stance_knee);
  gsl_vector_set(x.get(), 2, cfg.initial.swing_knee);
  gsl_vector_set(x.get(), 3, cfg.initial.torso);
  // Swing knee flexes during the step so the toe clears the ground, and the
  // swing leg retracts so the toe lands almost straight down.
  Eigen::MatrixXd start = Eigen::MatrixXd::Zero(4, cfg.degree - 2);
  start.row(3).setConstant(cfg.initial_swing_flexion);
  start = match_impact_toe_velocity(model, cfg.initial, start, Vec2(0.0, cfg.initial_toe_descent),
                                    cfg.degree);
  for (std::size_t i = 4; i < n; ++i) gsl_vector_set(x.get(), i, start((i - 4) % 4, (i - 4) / 4));

  minimize(problem, x.get(), cfg.max_evaluations, cfg.restarts);
  if (cfg.speed_range > 0.0) {
    problem.robust = true;
    minimize(problem, x.get(), cfg.range_evaluations, cfg.restarts);
  }

  BaseDesignResult r;
  r.posture = DesignProblem::posture(x.get());
  r.offsets = problem.offset_matrix(x.get());
  r.outputs = impact_invariant_outputs(model, r.posture, r.offsets, cfg.degree);
  r.summary = summarize_reduced(model, GaitParams::from_base(r.outputs), 2000);
  r.cost = design_cost(r.summary, model, cfg);
  r.evaluations = problem.evaluations;

  const ModelParams& lim = model.params();
  const ReducedGaitSummary& s = r.summary;
  std::ostringstream why;
  if (!s.exists) why << "no fixed point inside the domain; ";
  if (s.exists && std::abs(s.speed - cfg.target_speed) > cfg.speed_tolerance)
    why << "speed " << s.speed << " m/s; ";
  if (s.max_torque > lim.torque_limit) why << "torque " << s.max_torque << " N m; ";
  if (s.min_normal < lim.min_normal_force) why << "normal force " << s.min_normal << " N; ";
  if (s.max_friction_ratio > lim.friction_limit) why << "friction ratio " << s.max_friction_ratio << "; ";
  if (!s.impact_valid) why << "invalid impact; ";
  if (!why.str().empty()) {
    throw Error(ErrorCode::kDesignFailed, "base design failed: " + why.str() +
                                               "cost " + std::to_string(r.cost));
  }
  return r;
}

}  // namespace hzd
