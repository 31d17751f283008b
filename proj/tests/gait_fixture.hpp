#pragma once

// Base outputs produced by design_base_outputs with the default config,
// hardcoded so the tests do not rerun the optimizer.

#include "hzd/gait_design.hpp"

namespace hzd::fixture {

inline BezierOutputs base_outputs() {
  BezierOutputs b;
  b.theta_plus = -0.22516777439564206;
  b.theta_minus = 0.25335900347661133;
  b.coeffs.resize(4, 7);
  b.coeffs << -0.48459659545946071, -0.62816527362723262, -0.74882684871934069,
      0.31240950094013803, 0.32727597768735528, 0.21218802878179804, 0.1001678422672751,
      0.10016784226727508, -0.13447531518827149, -0.15739404564341813, 0.15966282975421614,
      0.22277022841658967, -0.44956604675923639, -0.48459659545946071, 0.23540634058459786,
      0.12282010572739037, 1.0745602903101827, -0.85314240975424915, 0.28042861193134061,
      0.0088327911143941951, 0.022931020875633062, 0.022931020875633069, 0.071638599984573947,
      0.91518263406847544, 1.0074372886155807, 1.901825305854522, 1.1354354976977858,
      0.23540634058459786;
  return b;
}

inline GaitParams base_gait() { return GaitParams::from_base(base_outputs()); }

inline const Controller& controller() {
  static const Controller c(BipedModel{}, ControllerConfig{});
  return c;
}

/// Certified base orbit, computed once per test binary.
inline const BaseGait& base() {
  static const BaseGait b = certify_base(base_outputs(), controller());
  return b;
}

/// Small family around the base speed, computed once per test binary.
inline const GaitFamily& small_family() {
  static const GaitFamily f = [] {
    ContinuumOptions opt;
    opt.speed_lo = base().record.speed - 0.02;
    opt.speed_hi = base().record.speed + 0.02;
    return generate_continuum(base(), controller(), opt);
  }();
  return f;
}

}  // namespace hzd::fixture
