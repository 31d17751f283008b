#include <gtest/gtest.h>

#include <random>

#include "gait_fixture.hpp"

namespace hzd {
namespace {

TEST(ZeroDynamicsTest, ReducedImpactRatioMatchesFullOrder) {
  const ZeroDynamics zd(BipedModel{}, fixture::base_gait());
  const double dz = zd.delta_z();
  EXPECT_NEAR(dz * dz, fixture::base().record.delta_sq, 1e-7);
}

TEST(ZeroDynamicsTest, ReducedFixedPointMatchesFullOrder) {
  const ReducedGaitSummary s = summarize_reduced(BipedModel{}, fixture::base_gait(), 2000);
  const LimitCycleRecord& r = fixture::base().record;
  ASSERT_TRUE(s.exists);
  EXPECT_NEAR(s.zeta_star / r.zeta_star, 1.0, 1e-6);
  EXPECT_NEAR(s.v_minus / r.v_minus, 1.0, 1e-6);
  EXPECT_NEAR(s.k / r.k, 1.0, 1e-5);
  EXPECT_NEAR(s.period / r.period, 1.0, 1e-5);
  EXPECT_NEAR(s.step_length, r.step_length, 1e-9);
  EXPECT_NEAR(s.speed / r.speed, 1.0, 1e-5);
}

TEST(ZeroDynamicsTest, ReducedPotentialMatchesFullOrderProfile) {
  const GaitParams gait = fixture::small_family().params(0);
  const LimitCycleRecord& r = fixture::small_family().gaits.front();
  const PotentialProfile full = v_profile_and_k(r.x_star, gait, fixture::controller());
  const ZeroDynamics zd(BipedModel{}, gait);
  const std::vector<ZeroDynamicsSample> red = zd.potential_profile(4000);
  double worst = 0.0;
  for (std::size_t i = 0; i < full.theta.size(); ++i) {
    const double u = (full.theta[i] - zd.theta_plus()) / (zd.theta_minus() - zd.theta_plus());
    const std::size_t j = std::min<std::size_t>(red.size() - 2, static_cast<std::size_t>(u * 4000));
    const double w = (full.theta[i] - red[j].theta) / (red[j + 1].theta - red[j].theta);
    const double v = (1 - w) * red[j].potential + w * red[j + 1].potential;
    worst = std::max(worst, std::abs(v - full.potential[i]));
  }
  EXPECT_LT(worst, 1e-3 * r.k);
  EXPECT_NEAR(zd.potential_at_end(4000), r.v_minus, 1e-6 * std::abs(r.v_minus));
}

TEST(ZeroDynamicsTest, ImpactInvarianceHoldsAcrossFamily) {
  const GaitFamily& f = fixture::small_family();
  for (std::size_t p = 0; p < f.gaits.size(); ++p) {
    EXPECT_LT(ZeroDynamics(BipedModel{}, f.params(p)).impact_invariance_residual(), 1e-10);
  }
}

TEST(ZeroDynamicsTest, SurfaceStateLiesOnSwitchingSurface) {
  const BipedModel model;
  const ZeroDynamics zd(model, fixture::base_gait());
  const State x = zd.surface_state(250.0);
  EXPECT_NEAR(zeta(x, model), 250.0, 1e-9);
  EXPECT_NEAR(model.swing_foot_height(x.q), 0.0, 1e-12);
  EXPECT_NEAR(BipedModel::theta(x.q), zd.theta_minus(), 1e-12);
  const State plus = zd.post_impact_state(250.0);
  EXPECT_NEAR(zeta(plus, model), 250.0, 1e-9);
  EXPECT_NEAR(BipedModel::theta(plus.q), zd.theta_plus(), 1e-12);
}

TEST(ZeroDynamicsTest, OrbitStallsBelowPotentialPeak) {
  const ZeroDynamics zd(BipedModel{}, fixture::base_gait());
  const double k = fixture::base().record.k;
  EXPECT_THROW(zd.orbit(0.9 * k, 400), Error);
  const ZeroDynamicsOrbit o = zd.orbit(1.1 * k, 400);
  EXPECT_GT(o.min_zeta, 0.0);
  EXPECT_NEAR(o.min_zeta, 0.1 * k, 1e-3 * k);
}

TEST(BaseDesignTest, ImpactConfigurationTouchesGround) {
  const BipedModel model;
  ImpactPosture p;
  const Vec5 q = impact_configuration(model, p);
  EXPECT_NEAR(model.swing_foot_height(q), 0.0, 1e-12);
  EXPECT_GT(model.step_length(q), 0.0);
  EXPECT_NEAR(BipedModel::theta(q), p.theta_minus, 1e-12);
  EXPECT_NEAR(q(0), p.torso, 1e-12);
}

TEST(BaseDesignTest, ImpactInvariantOutputsForRandomOffsets) {
  const BipedModel model;
  std::mt19937 rng(8);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd offsets(4, 4);
    for (int i = 0; i < offsets.size(); ++i) offsets(i) = n(rng);
    const BezierOutputs out = impact_invariant_outputs(model, ImpactPosture{}, offsets);
    const ZeroDynamics zd(model, GaitParams::from_base(out));
    EXPECT_LT(zd.impact_invariance_residual(), 1e-10);
  }
}

TEST(BaseDesignTest, FixtureMeetsDesignMargins) {
  const BipedModel model;
  const BaseDesignConfig cfg;
  const ReducedGaitSummary s = summarize_reduced(model, fixture::base_gait(), cfg.grid);
  ASSERT_TRUE(s.exists);
  EXPECT_TRUE(s.impact_valid);
  EXPECT_NEAR(s.speed, cfg.target_speed, cfg.speed_tolerance);
  EXPECT_LE(s.max_torque, cfg.torque_fraction * model.params().torque_limit * 1.001);
  EXPECT_GE(s.min_normal, model.params().min_normal_force);
  EXPECT_LE(s.max_friction_ratio, cfg.friction_fraction * model.params().friction_limit * 1.001);
  EXPECT_LT(s.delta_sq, cfg.max_delta_sq);
  EXPECT_GT(s.min_clearance, 0.0);
}

}  // namespace
}  // namespace hzd
