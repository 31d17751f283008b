#include <gtest/gtest.h>

#include <random>

#include "gait_fixture.hpp"
#include "hzd/zero_dynamics.hpp"

namespace hzd {
namespace {

double monomial(const Eigen::Matrix<double, 6, 1>& c, double u, int derivative) {
  double r = 0.0;
  for (int i = derivative; i < 6; ++i) {
    double f = 1.0;
    for (int k = 0; k < derivative; ++k) f *= i - k;
    r += f * c(i) * std::pow(u, i - derivative);
  }
  return r;
}

TEST(BumpTest, BoundaryConditions) {
  const BumpPolynomial b = build_bump(-0.2, 0.3);
  EXPECT_NEAR(monomial(b.coeffs, 0.0, 0), 0.0, 1e-12);
  EXPECT_NEAR(monomial(b.coeffs, 0.0, 1), 0.0, 1e-12);
  EXPECT_NEAR(monomial(b.coeffs, 1.0, 0), 0.0, 1e-12);
  EXPECT_NEAR(monomial(b.coeffs, 1.0, 1), 0.0, 1e-12);
  EXPECT_NEAR(monomial(b.coeffs, 1.0, 2), 0.0, 1e-12);
  EXPECT_NEAR(b.theta_switch, -0.2 + 0.9 * 0.5, 1e-15);
}

TEST(BumpTest, UnitPeakOnDenseGrid) {
  const BumpPolynomial b = build_bump(-0.2, 0.3);
  double peak = 0.0;
  constexpr int n = 1000000;
  for (int i = 0; i <= n; ++i) {
    const double th = b.theta_plus + (b.theta_switch - b.theta_plus) * i / n;
    peak = std::max(peak, std::abs(b.evaluate(th)(0)));
  }
  EXPECT_NEAR(peak, 1.0, 1e-10);
}

TEST(BumpTest, MatchesClosedForm) {
  // The null space is spanned by u^2 (1 - u)^3, whose peak at u = 2/5 is 0.03456.
  const BumpPolynomial b = build_bump(0.1, 0.9);
  const double sign = b.evaluate(0.3)(0) > 0.0 ? 1.0 : -1.0;
  for (int i = 0; i <= 50; ++i) {
    const double u = i / 50.0;
    const double th = b.theta_plus + u * (b.theta_switch - b.theta_plus);
    const double ref = u * u * std::pow(1.0 - u, 3) / 0.03456;
    EXPECT_NEAR(sign * b.evaluate(th)(0), ref, 1e-12) << "u = " << u;
  }
}

TEST(BumpTest, DegenerateIntervalRejected) {
  EXPECT_THROW(build_bump(0.2, 0.2), Error);
}

TEST(BumpTest, VanishesPastSwitchPoint) {
  const BumpPolynomial b = build_bump(-0.2, 0.3);
  for (double th = b.theta_switch; th <= 0.3; th += 0.001) {
    EXPECT_EQ(b.evaluate(th).norm(), 0.0);
  }
}

class OutputTest : public ::testing::Test {
 protected:
  GaitParams gait_ = fixture::base_gait();
  BipedModel model_;
  std::mt19937 rng_{11};

  Vec4 random_beta() {
    std::normal_distribution<double> n(0.0, 0.05);
    return Vec4(n(rng_), n(rng_), n(rng_), n(rng_));
  }
  Vec5 random_q(double theta) {
    std::normal_distribution<double> n(0.0, 0.05);
    Vec5 q = ZeroDynamics(model_, gait_).configuration(theta);
    for (int i = 0; i < 5; ++i) q(i) += n(rng_);
    return q;
  }
};

TEST_F(OutputTest, ZeroModulationLeavesBaseOutput) {
  const GaitParams zero = gait_.with_beta(Vec4::Zero());
  for (double th = gait_.base.theta_plus; th < gait_.base.theta_minus; th += 0.01) {
    EXPECT_EQ(zero.modulation(th).norm(), 0.0);
  }
}

TEST_F(OutputTest, ModulationIsLinearInBeta) {
  const Vec4 beta = random_beta();
  for (double a : {-2.0, 0.5, 3.0}) {
    for (double th = gait_.base.theta_plus; th < gait_.base.theta_minus; th += 0.013) {
      const Vec4 lhs = gait_.with_beta(a * beta).modulation(th);
      EXPECT_LT((lhs - a * gait_.with_beta(beta).modulation(th)).norm(), 1e-14 * (1.0 + lhs.norm()));
    }
  }
}

TEST_F(OutputTest, ModulationAbsentAfterSwitchPoint) {
  const GaitParams mod = gait_.with_beta(random_beta());
  for (double th = gait_.bump.theta_switch; th <= gait_.base.theta_minus; th += 0.002) {
    const Vec5 q = random_q(th);
    if (BipedModel::theta(q) < gait_.bump.theta_switch) continue;
    EXPECT_EQ(output(q, mod), output(q, gait_));
  }
}

TEST_F(OutputTest, SecondDerivativeContinuousAtSwitchPoint) {
  const GaitParams mod = gait_.with_beta(random_beta());
  const double ts = gait_.bump.theta_switch;
  const PhaseProfile left = mod.desired(std::nextafter(ts, -1.0));
  const PhaseProfile right = mod.desired(ts);
  EXPECT_LT((left.value - right.value).norm(), 1e-10);
  EXPECT_LT((left.d1 - right.d1).norm(), 1e-10);
  EXPECT_LT((left.d2 - right.d2).norm(), 1e-10);
}

TEST_F(OutputTest, DesiredDerivativesMatchFiniteDifferences) {
  const GaitParams mod = gait_.with_beta(random_beta());
  constexpr double h = 1e-5;
  for (double th = gait_.base.theta_plus + 0.01; th < gait_.base.theta_minus - 0.01; th += 0.037) {
    const PhaseProfile p = mod.desired(th);
    const Vec4 d1 = (mod.desired(th + h).value - mod.desired(th - h).value) / (2 * h);
    const Vec4 d2 = (mod.desired(th + h).d1 - mod.desired(th - h).d1) / (2 * h);
    EXPECT_LT((d1 - p.d1).norm(), 1e-6 * (1.0 + p.d1.norm()));
    EXPECT_LT((d2 - p.d2).norm(), 1e-5 * (1.0 + p.d2.norm()));
  }
}

TEST_F(OutputTest, JacobianMatchesFiniteDifferences) {
  const GaitParams mod = gait_.with_beta(random_beta());
  constexpr double h = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec5 q = random_q(std::uniform_real_distribution<double>(-0.2, 0.2)(rng_));
    const Mat4x5 j = output_jacobian(q, mod);
    Mat4x5 fd;
    for (int k = 0; k < 5; ++k) {
      Vec5 e = Vec5::Zero();
      e(k) = h;
      fd.col(k) = (output(q + e, mod) - output(q - e, mod)) / (2 * h);
    }
    EXPECT_LT((fd - j).norm(), 1e-6 * j.norm());
  }
}

TEST_F(OutputTest, LieDerivativeIsJacobianTimesVelocity) {
  const GaitParams mod = gait_.with_beta(random_beta());
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    State x;
    x.q = random_q(std::uniform_real_distribution<double>(-0.2, 0.2)(rng_));
    for (int i = 0; i < 5; ++i) x.dq(i) = n(rng_);
    const LieDerivatives lie = lie_derivatives(x, mod, model_);
    EXPECT_LT((lie.lf_h - output_jacobian(x.q, mod) * x.dq).norm(), 1e-10);
    EXPECT_EQ(lie.y, output(x.q, mod));
  }
}

TEST_F(OutputTest, SecondLieDerivativesMatchOutputAcceleration) {
  // d/dt(dy/dt) along the dynamics with an arbitrary torque equals
  // L_f^2 h + L_g L_f h u; the time derivative is taken numerically.
  const GaitParams mod = gait_.with_beta(random_beta());
  std::normal_distribution<double> n(0.0, 1.0);
  constexpr double h = 1e-6;
  for (int trial = 0; trial < 30; ++trial) {
    State x;
    x.q = random_q(std::uniform_real_distribution<double>(-0.2, 0.2)(rng_));
    Vec4 u;
    for (int i = 0; i < 5; ++i) x.dq(i) = n(rng_);
    for (int i = 0; i < 4; ++i) u(i) = 20.0 * n(rng_);
    const Vec5 ddq = model_.forward_dynamics(x.q, x.dq, u);
    auto dy = [&](double s) {
      const Vec5 q = x.q + s * x.dq + 0.5 * s * s * ddq;
      const Vec5 dq = x.dq + s * ddq;
      return Vec4(output_jacobian(q, mod) * dq);
    };
    const Vec4 fd = (dy(h) - dy(-h)) / (2 * h);
    const LieDerivatives lie = lie_derivatives(x, mod, model_);
    const Vec4 ref = lie.lf2_h + lie.lg_lf_h * u;
    EXPECT_LT((fd - ref).norm(), 1e-5 * (1.0 + ref.norm()));
  }
}

TEST_F(OutputTest, ZeroOnSurface) {
  const GaitParams mod = gait_.with_beta(random_beta());
  const ZeroDynamics zd(model_, mod);
  for (double th = gait_.base.theta_plus; th <= gait_.base.theta_minus; th += 0.01) {
    const ZeroDynamicsPoint p = zd.at(th);
    const State x{p.q, p.dq * 1.3};
    const LieDerivatives lie = lie_derivatives(x, mod, model_);
    EXPECT_LT(lie.y.norm(), 1e-8);
    EXPECT_LT(lie.lf_h.norm(), 1e-8);
  }
}

TEST_F(OutputTest, DecouplingMatrixWellConditionedOnBaseCycle) {
  const ZeroDynamics zd(model_, gait_);
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double th = gait_.base.theta_plus + (gait_.base.theta_minus - gait_.base.theta_plus) * i / 400;
    const ZeroDynamicsPoint p = zd.at(th);
    worst = std::max(worst, lie_derivatives(State{p.q, p.dq}, gait_, model_).condition);
  }
  EXPECT_LT(worst, 1e6);
}

}  // namespace
}  // namespace hzd
