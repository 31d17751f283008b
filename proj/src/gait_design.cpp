#include "hzd/gait_design.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hzd/zero_dynamics.hpp"

namespace hzd {

namespace {

SimOptions quiet(const SimOptions& sim) {
  SimOptions o = sim;
  o.record = false;
  return o;
}

void append(std::string& why, const std::string& what) {
  if (!why.empty()) why += "; ";
  why += what;
}

}  // namespace

FixedPointResult fixed_point_solve(const State& guess, const GaitParams& gait,
                                   const Controller& controller, const NewtonOptions& newton,
                                   const SimOptions& sim, const Mat10* jacobian) {
  const SimOptions opt = quiet(sim);
  auto residual = [&](const Vec10& v) {
    return Vec10(poincare(State::from_stacked(v), gait, controller, opt).stacked() - v);
  };

  FixedPointResult out;
  Vec10 x = guess.stacked();
  Vec10 h = residual(x);
  double norm = h.norm();
  Mat10 a;
  bool have = jacobian != nullptr;
  bool fresh = false;
  if (have) a = *jacobian - Mat10::Identity();

  while (!(norm < newton.tolerance)) {
    if (out.iterations >= newton.max_iterations) {
      std::ostringstream msg;
      msg << "Newton did not converge in " << newton.max_iterations << " iterations (|H| = "
          << norm << "); reduce the continuation step";
      throw Error(ErrorCode::kNewtonDivergence, msg.str());
    }
    if (!have) {
      a = poincare_jacobian(State::from_stacked(x), gait, controller, opt, newton.fd_step).full -
          Mat10::Identity();
      ++out.jacobians;
      have = true;
      fresh = true;
    }
    const Eigen::FullPivLU<Mat10> lu(a);
    if (lu.rank() < 10 || lu.rcond() < 1e-12) {
      throw Error(ErrorCode::kSingularJacobian,
                  "DP - I is singular: the Poincare map has an eigenvalue at 1");
    }
    Vec10 dx = lu.solve(-h);
    ++out.iterations;

    double scale = 1.0;
    Vec10 x_new;
    Vec10 h_new;
    double norm_new = 0.0;
    for (int damp = 0;; ++damp) {
      x_new = x + scale * dx;
      h_new = residual(x_new);
      norm_new = h_new.norm();
      if (norm_new < norm || !fresh) break;
      if (damp == 10) {
        std::ostringstream msg;
        msg << "Newton step does not reduce the residual (|H| = " << norm << ")";
        throw Error(ErrorCode::kNewtonDivergence, msg.str());
      }
      scale *= 0.5;
    }
    if (norm_new > newton.refresh_ratio * norm) {
      if (!fresh) {
        have = false;
        if (!(norm_new < norm)) continue;
      }
    }
    x = x_new;
    h = h_new;
    norm = norm_new;
    fresh = false;
  }
  out.x = State::from_stacked(x);
  out.residual = norm;
  return out;
}

std::vector<double> reduced_map_samples(double zeta_ref, double delta_sq, double k,
                                        double spread) {
  std::vector<double> z;
  for (double f : {-1.0, -0.5, 0.0, 0.5, 1.0}) z.push_back(zeta_ref * (1.0 + spread * f));
  const double floor = 1.02 * std::max(k, 0.0) / delta_sq;
  if (z.front() < floor) {
    const double shift = floor - z.front();
    for (double& v : z) v += shift;
  }
  return z;
}

ReducedMap fit_reduced_map(const GaitParams& gait, const Controller& controller,
                           const std::vector<double>& zeta_in, double tolerance,
                           const SimOptions& sim) {
  if (zeta_in.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "reduced-map fit needs at least three samples");
  }
  const SimOptions opt = quiet(sim);
  const ZeroDynamics zd(controller.model(), gait);
  ReducedMap m;
  m.zeta_in = zeta_in;
  for (double z : zeta_in) {
    if (!(z > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sample zeta must be positive");
    const State out = poincare(zd.surface_state(z), gait, controller, opt);
    m.zeta_out.push_back(zeta(out, controller.model()));
  }
  const auto [lo, hi] = std::minmax_element(zeta_in.begin(), zeta_in.end());
  const std::size_t i = static_cast<std::size_t>(lo - zeta_in.begin());
  const std::size_t j = static_cast<std::size_t>(hi - zeta_in.begin());
  if (!(zeta_in[j] > zeta_in[i])) {
    throw Error(ErrorCode::kInvalidArgument, "reduced-map samples must be distinct");
  }
  m.delta_sq = (m.zeta_out[j] - m.zeta_out[i]) / (zeta_in[j] - zeta_in[i]);
  m.v_minus = m.delta_sq * zeta_in[i] - m.zeta_out[i];
  for (std::size_t s = 0; s < zeta_in.size(); ++s) {
    const double err = std::abs(m.apply(zeta_in[s]) - m.zeta_out[s]) / std::abs(m.zeta_out[s]);
    m.residual = std::max(m.residual, err);
  }
  if (!(m.residual < tolerance)) {
    std::ostringstream msg;
    msg << "zeta map is not affine: relative residual " << m.residual << " (tolerance "
        << tolerance << ")";
    throw Error(ErrorCode::kModelViolation, msg.str());
  }
  return m;
}

PotentialProfile v_profile_and_k(const State& on_surface, const GaitParams& gait,
                                 const Controller& controller, int min_samples,
                                 const SimOptions& sim) {
  const BipedModel& model = controller.model();
  const State start = model.impact(on_surface).post;
  SimOptions opt = quiet(sim);
  const double duration = integrate_step(start, gait, controller, opt).duration;
  opt.record = true;
  opt.max_dt = duration / (min_samples + 10);
  const StepResult r = integrate_step(start, gait, controller, opt);

  PotentialProfile p;
  const double zeta0 = r.samples.front().zeta;
  for (const Sample& s : r.samples) {
    if (!p.theta.empty() && !(s.theta > p.theta.back())) {
      throw Error(ErrorCode::kGaitInvalid, "phase not strictly increasing along the step");
    }
    p.theta.push_back(s.theta);
    p.potential.push_back(zeta0 - s.zeta);
  }
  p.k = *std::max_element(p.potential.begin(), p.potential.end());
  p.v_minus = p.potential.back();
  return p;
}

double step_speed(const State& on_surface, const GaitParams& gait, const Controller& controller,
                  const SimOptions& sim) {
  return step_from_surface(on_surface, gait, controller, quiet(sim)).speed;
}

Vec4 speed_sensitivity(const State& on_surface, const GaitParams& gait,
                       const Controller& controller, double step, const SimOptions& sim) {
  Vec4 j;
  for (int i = 0; i < 4; ++i) {
    Vec4 bp = gait.beta;
    Vec4 bm = gait.beta;
    bp(i) += step;
    bm(i) -= step;
    j(i) = (step_speed(on_surface, gait.with_beta(bp), controller, sim) -
            step_speed(on_surface, gait.with_beta(bm), controller, sim)) /
           (2.0 * step);
  }
  return j;
}

Vec4 beta_for_speed(double v_des, double v0, const Vec4& sensitivity) {
  const double n2 = sensitivity.squaredNorm();
  if (!(n2 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "speed sensitivity is zero");
  }
  return sensitivity * ((v_des - v0) / n2);
}

Certification certify(const State& x_star, const GaitParams& gait, const Controller& controller,
                      const CertifyOptions& opt, const SimOptions& sim) {
  const BipedModel& model = controller.model();
  const ModelParams& limits = model.params();
  Certification c;
  LimitCycleRecord& r = c.record;
  r.beta = gait.beta;
  r.x_star = x_star;
  r.zeta_star = zeta(x_star, model);

  const StepResult step = step_from_surface(x_star, gait, controller, quiet(sim));
  r.periodicity_error = (step.pre_impact.stacked() - x_star.stacked()).norm();
  r.speed = step.speed;
  r.period = step.duration;
  r.step_length = step.step_length;
  r.theta_plus = BipedModel::theta(step.start.q);
  r.theta_minus = BipedModel::theta(x_star.q);
  r.max_output_norm = step.max_output_norm;
  r.margins.max_torque = step.constraints.max_torque;
  r.margins.torque_headroom = limits.torque_limit - step.constraints.max_torque;
  r.margins.min_normal = step.constraints.min_normal;
  r.margins.max_friction_ratio = step.constraints.max_friction_ratio;

  if (!(r.periodicity_error < opt.periodicity_tol)) {
    std::ostringstream msg;
    msg << "not periodic (|P(x) - x| = " << r.periodicity_error << ")";
    append(c.why, msg.str());
  }
  if (step.constraints.violated()) {
    append(c.why, "constraints violated on the orbit: " + step.constraints.reason());
  }

  const PoincareJacobian jac = poincare_jacobian(x_star, gait, controller, quiet(sim));
  c.jacobian = jac.full;
  r.spectral_radius = jac.spectral_radius;
  if (!(r.spectral_radius < 1.0)) append(c.why, "spectral radius not below 1");

  const PotentialProfile prof = v_profile_and_k(x_star, gait, controller, opt.profile_samples, sim);
  r.k = prof.k;
  const double dz = ZeroDynamics(model, gait).delta_z();
  try {
    const ReducedMap m = fit_reduced_map(
        gait, controller, reduced_map_samples(r.zeta_star, dz * dz, prof.k), opt.affinity_tol, sim);
    r.delta_sq = m.delta_sq;
    r.v_minus = m.v_minus;
    r.affinity_residual = m.residual;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kModelViolation) throw;
    append(c.why, e.what());
    return c;
  }
  if (!(r.delta_sq > 0.0 && r.delta_sq < 1.0)) append(c.why, "delta_z^2 outside (0, 1)");
  const double closure = std::abs(r.zeta_star - r.predicted_zeta_star()) / r.zeta_star;
  if (!(closure < opt.closure_tol)) {
    std::ostringstream msg;
    msg << "zeta* differs from the affine fixed point by " << closure << " (relative)";
    append(c.why, msg.str());
  }
  if (!(r.delta_sq * r.zeta_star > r.k)) append(c.why, "fixed point outside the map's domain");
  return c;
}

BaseGait certify_base(const BezierOutputs& outputs, const Controller& controller,
                      const CertifyOptions& opt) {
  const GaitParams gait = GaitParams::from_base(outputs);
  const ReducedGaitSummary s = summarize_reduced(controller.model(), gait, 2000);
  if (!s.exists) throw Error(ErrorCode::kDesignFailed, "base outputs admit no periodic orbit");
  const ZeroDynamics zd(controller.model(), gait);
  const FixedPointResult fp = fixed_point_solve(zd.surface_state(s.zeta_star), gait, controller);
  Certification c = certify(fp.x, gait, controller, opt);
  if (!c.ok()) throw Error(ErrorCode::kDesignFailed, "base gait not certified: " + c.why);
  BaseGait b;
  b.design.outputs = outputs;
  b.design.summary = s;
  b.record = c.record;
  b.record.v_des = b.record.speed;
  b.record.newton_iterations = fp.iterations;
  b.jacobian = c.jacobian;
  b.sensitivity = speed_sensitivity(fp.x, gait, controller);
  return b;
}

BaseGait design_base_gait(const Controller& controller, const BaseDesignConfig& cfg) {
  BaseDesignResult design = design_base_outputs(controller.model(), cfg);
  BaseGait b = certify_base(design.outputs, controller);
  b.design = std::move(design);
  if (!(std::abs(b.record.speed - cfg.target_speed) < cfg.speed_tolerance)) {
    std::ostringstream msg;
    msg << "full-order speed " << b.record.speed << " m/s misses the target "
        << cfg.target_speed;
    throw Error(ErrorCode::kDesignFailed, msg.str());
  }
  return b;
}

double GaitFamily::zeta_lb() const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& g : gaits) v = std::min(v, g.zeta_star);
  return v;
}

double GaitFamily::zeta_ub() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& g : gaits) v = std::max(v, g.zeta_star);
  return v;
}

double GaitFamily::k_max() const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& g : gaits) v = std::max(v, g.k);
  return v;
}

double GaitFamily::delta_sq() const { return gaits.at(static_cast<std::size_t>(base_index)).delta_sq; }

GaitParams GaitFamily::params(std::size_t p) const {
  GaitParams g;
  g.base = base;
  g.bump = bump;
  g.beta = gaits.at(p).beta;
  return g;
}

std::vector<GaitParams> GaitFamily::all_params() const {
  std::vector<GaitParams> out;
  for (std::size_t p = 0; p < gaits.size(); ++p) out.push_back(params(p));
  return out;
}

GaitFamily generate_continuum(const BaseGait& base, const Controller& controller,
                              const ContinuumOptions& opt) {
  if (!(opt.max_gap > 0.0)) throw Error(ErrorCode::kInvalidArgument, "max_gap must be positive");
  if (!(opt.speed_lo < opt.speed_hi)) {
    throw Error(ErrorCode::kInvalidArgument, "speed_lo must be below speed_hi");
  }
  const GaitParams base_gait = GaitParams::from_base(base.design.outputs);
  GaitFamily fam;
  fam.base = base_gait.base;
  fam.bump = base_gait.bump;
  fam.sensitivity = base.sensitivity;
  fam.base_speed = base.record.speed;
  fam.max_gap = opt.max_gap;

  std::vector<LimitCycleRecord> found{base.record};
  found.front().v_des = fam.base_speed;
  const double target_gap = opt.target_gap_fraction * opt.max_gap;

  for (int dir : {+1, -1}) {
    LimitCycleRecord prev = base.record;
    prev.v_des = fam.base_speed;
    Mat10 prev_jac = base.jacobian;
    double dv = opt.initial_dv;
    const double bound = dir > 0 ? opt.speed_hi : opt.speed_lo;
    while (static_cast<int>(found.size()) < opt.max_gaits) {
      if (dir > 0 ? prev.speed >= bound : prev.speed <= bound) break;
      const double v_des = prev.v_des + dir * dv;
      const GaitParams gait =
          base_gait.with_beta(beta_for_speed(v_des, fam.base_speed, fam.sensitivity));
      Certification c;
      FixedPointResult fp;
      try {
        fp = fixed_point_solve(prev.x_star, gait, controller, opt.newton, {}, &prev_jac);
        c = certify(fp.x, gait, controller, opt.certify);
      } catch (const Error& e) {
        if (dv * 0.5 >= opt.min_dv) {
          dv *= 0.5;
          continue;
        }
        std::ostringstream msg;
        msg << "continuation stalled near v_des " << v_des << " m/s: " << e.what();
        fam.warnings.push_back(msg.str());
        break;
      }
      const double gap = std::abs(c.record.speed - prev.speed);
      if (gap > opt.max_gap || (c.record.speed - prev.speed) * dir <= 0.0) {
        if (dv * 0.5 < opt.min_dv) {
          fam.warnings.push_back("continuation stalled: speed gap cannot be kept below max_gap");
          break;
        }
        dv *= gap > 0.0 && (c.record.speed - prev.speed) * dir > 0.0
                  ? std::min(0.5, 0.9 * target_gap / gap)
                  : 0.5;
        continue;
      }
      if (!c.ok()) {
        std::ostringstream msg;
        msg << "gait at " << c.record.speed << " m/s excluded (" << c.why
            << "); continuation stops";
        fam.warnings.push_back(msg.str());
        break;
      }
      c.record.v_des = v_des;
      c.record.newton_iterations = fp.iterations;
      found.push_back(c.record);
      dv *= std::clamp(target_gap / gap, 0.25, 4.0);
      prev = c.record;
      prev_jac = c.jacobian;
    }
  }

  std::sort(found.begin(), found.end(),
            [](const LimitCycleRecord& a, const LimitCycleRecord& b) { return a.speed < b.speed; });
  for (std::size_t p = 0; p < found.size(); ++p) {
    found[p].index = static_cast<int>(p);
    if (found[p].beta.isZero(0.0)) fam.base_index = static_cast<int>(p);
  }
  fam.gaits = std::move(found);
  return fam;
}

}  // namespace hzd
