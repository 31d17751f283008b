#pragma once

#include "hzd/biped_model.hpp"
#include "hzd/virtual_constraints.hpp"

namespace hzd {

enum class ControlMode { kPd, kClfQp };

struct ControllerConfig {
  ControlMode mode = ControlMode::kPd;
  double kp = 4.0;
  double kd = 4.0;
  double epsilon = 0.05;  // s, output time scale
  double relaxation_penalty = 1e4;
  /// CLF decrease rate, scaled by 1/epsilon. Non-positive selects the
  /// largest rate the PD law itself certifies.
  double clf_rate = 0.0;

  /// Throws Error(kConfig) on non-positive gains or a non-Hurwitz PD loop.
  void validate() const;
};

/// Nominal torque u* = -(L_g L_f h)^{-1} L_f^2 h.
Vec4 u_star(const LieDerivatives& lie);
Vec4 u_star(const State& x, const GaitParams& gait, const BipedModel& model);

/// nu = -(kp / eps^2) y - (kd / eps) dy.
Vec4 aux_nu(const Vec4& y, const Vec4& dy, const ControllerConfig& cfg);

struct ClfQpResult {
  Vec4 nu = Vec4::Zero();
  double relaxation = 0.0;
  bool fallback = false;  // QP infeasible, saturated PD returned
  double kkt_residual = 0.0;
};

/// CLF-QP: min |nu - nu_pd|^2 + penalty * delta^2 subject to a relaxed
/// exponential CLF decrease, the torque box, the friction cone and the
/// normal-force floor.
ClfQpResult clf_qp_nu(const State& x, const LieDerivatives& lie, const BipedModel& model,
                      const ControllerConfig& cfg);

struct ControlOutput {
  Vec4 u = Vec4::Zero();
  Vec4 nu = Vec4::Zero();
  Vec5 ddq = Vec5::Zero();
  LieDerivatives lie;
  bool qp_fallback = false;
};

class Controller {
 public:
  Controller(BipedModel model, ControllerConfig cfg);

  /// u = u* + (L_g L_f h)^{-1} nu and the resulting joint accelerations.
  ControlOutput compute(const State& x, const GaitParams& gait) const;

  const ControllerConfig& config() const { return cfg_; }
  const BipedModel& model() const { return model_; }

 private:
  BipedModel model_;
  ControllerConfig cfg_;
};

}  // namespace hzd
