#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>
#include <random>

#include "hzd/biped_model.hpp"
#include "kinematics_oracle.hpp"

namespace hzd {
namespace {

Vec5 random_posture(std::mt19937& rng) {
  std::uniform_real_distribution<double> torso(-0.4, 0.4);
  std::uniform_real_distribution<double> hip(-0.7, 0.7);
  std::uniform_real_distribution<double> knee(0.0, 1.2);
  Vec5 q;
  q << torso(rng), hip(rng), hip(rng), knee(rng), knee(rng);
  return q;
}

Vec5 random_velocity(std::mt19937& rng, double scale = 2.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vec5 v;
  for (int i = 0; i < 5; ++i) v(i) = n(rng);
  return v;
}

/// Symmetric double-support posture: both toes on the ground.
Vec5 double_support(double leg_angle, double knee, double torso) {
  Vec5 q;
  q << torso, leg_angle - 0.5 * knee - torso, -leg_angle - 0.5 * knee - torso, knee, knee;
  return q;
}

class BipedModelTest : public ::testing::Test {
 protected:
  BipedModel model_;
  std::mt19937 rng_{7};
};

TEST_F(BipedModelTest, MassMatrixSymmetricPositiveDefinite) {
  std::uniform_real_distribution<double> any(-3.2, 3.2);
  for (int trial = 0; trial < 10000; ++trial) {
    Vec5 q;
    for (int i = 0; i < 5; ++i) q(i) = any(rng_);
    const Mat5 d = model_.mass_matrix(q);
    ASSERT_EQ((d - d.transpose()).norm(), 0.0);
    const double min_eig = Eigen::SelfAdjointEigenSolver<Mat5>(d).eigenvalues().minCoeff();
    ASSERT_GT(min_eig, 0.0);
  }
}

TEST_F(BipedModelTest, KineticEnergyMatchesLinkByLinkSum) {
  for (int trial = 0; trial < 200; ++trial) {
    const Vec5 q = random_posture(rng_);
    const Vec5 dq = random_velocity(rng_);
    const double ke = model_.kinetic_energy(q, dq);
    const double ref = oracle::kinetic_energy(q, dq, model_.params());
    ASSERT_NEAR(ke, ref, 1e-10 * ref);
  }
}

TEST_F(BipedModelTest, GravityOnlyBiasIsPotentialGradient) {
  for (int trial = 0; trial < 100; ++trial) {
    const Vec5 q = random_posture(rng_);
    const Vec5 bias = model_.bias_forces(q, Vec5::Zero());
    const Vec5 ref = oracle::potential_gradient(q, model_.params());
    ASSERT_LT((bias - ref).norm(), 1e-10 * (1.0 + ref.norm()));
    ASSERT_NEAR(model_.potential_energy(q), oracle::potential_energy(q, model_.params()), 1e-10);
  }
}

TEST_F(BipedModelTest, CoriolisSkewSymmetry) {
  // Fourth-order central stencil for dD/dt along dq.
  constexpr double h = 1e-3;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec5 q = random_posture(rng_);
    const Vec5 dq = random_velocity(rng_);
    const double speed = dq.norm();
    const Vec5 dir = dq / speed;
    auto d_at = [&](double s) { return model_.mass_matrix(q + s * h * dir); };
    const Mat5 ddot =
        speed * (d_at(-2.0) - 8.0 * d_at(-1.0) + 8.0 * d_at(1.0) - d_at(2.0)) / (12.0 * h);
    const Mat5 n = ddot - 2.0 * model_.coriolis_matrix(q, dq);
    ASSERT_NEAR(dq.dot(n * dq), 0.0, 1e-10 * (1.0 + dq.squaredNorm()));
    ASSERT_LT((n + n.transpose()).norm(), 1e-7);
  }
}

TEST_F(BipedModelTest, BiasForcesMatchChristoffelForm) {
  for (int trial = 0; trial < 200; ++trial) {
    const Vec5 q = random_posture(rng_);
    const Vec5 dq = random_velocity(rng_);
    const Vec5 ref = model_.coriolis_matrix(q, dq) * dq + model_.gravity_vector(q);
    ASSERT_LT((model_.bias_forces(q, dq) - ref).norm(), 1e-10 * (1.0 + ref.norm()));
  }
}

TEST_F(BipedModelTest, MassMatrixPartialsMatchFiniteDifferences) {
  constexpr double h = 1e-6;
  const Vec5 q = random_posture(rng_);
  const auto dd = model_.mass_matrix_partials(q);
  for (int k = 0; k < 5; ++k) {
    Vec5 e = Vec5::Zero();
    e(k) = h;
    const Mat5 fd = (model_.mass_matrix(q + e) - model_.mass_matrix(q - e)) / (2 * h);
    EXPECT_LT((fd - dd[k]).norm(), 1e-7) << "k = " << k;
  }
}

TEST_F(BipedModelTest, UnforcedMotionConservesEnergy) {
  using OdeState = std::array<double, 10>;
  namespace odeint = boost::numeric::odeint;
  auto rhs = [this](const OdeState& s, OdeState& ds, double) {
    Vec5 q, dq;
    for (int i = 0; i < 5; ++i) {
      q(i) = s[i];
      dq(i) = s[i + 5];
    }
    const Vec5 ddq = model_.forward_dynamics(q, dq, Vec4::Zero());
    for (int i = 0; i < 5; ++i) {
      ds[i] = dq(i);
      ds[i + 5] = ddq(i);
    }
  };
  const Vec5 q0 = double_support(0.2, 0.3, 0.1);
  const Vec5 dq0 = random_velocity(rng_, 1.0);
  OdeState s;
  for (int i = 0; i < 5; ++i) {
    s[i] = q0(i);
    s[i + 5] = dq0(i);
  }
  auto energy = [this](const OdeState& st) {
    Vec5 q, dq;
    for (int i = 0; i < 5; ++i) {
      q(i) = st[i];
      dq(i) = st[i + 5];
    }
    return model_.kinetic_energy(q, dq) + model_.potential_energy(q);
  };
  const double e0 = energy(s);
  odeint::integrate_adaptive(
      odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<OdeState>()), rhs, s, 0.0,
      0.5, 1e-3);
  EXPECT_LT(std::abs(energy(s) - e0) / std::abs(e0), 1e-8);
}

TEST_F(BipedModelTest, PhaseAndSwitchingSurface) {
  EXPECT_EQ(BipedModel::theta(Vec5::Zero()), 0.0);
  for (double leg : {0.1, 0.2, 0.3}) {
    const Vec5 q = double_support(leg, 0.25, 0.05);
    EXPECT_NEAR(model_.swing_foot_height(q), 0.0, 1e-15);
    EXPECT_NEAR(BipedModel::theta(q), leg, 1e-15);
    const auto ps = oracle::pose(std::array<double, 5>{q(0), q(1), q(2), q(3), q(4)},
                                 model_.params());
    EXPECT_NEAR(model_.swing_toe(q).x(), ps.swing_toe[0], 1e-14);
    EXPECT_NEAR(model_.hip(q).y(), ps.hip[1], 1e-14);
    // theta is the angle of the toe-to-hip line for equal femur and shank.
    EXPECT_NEAR(std::atan2(ps.hip[0], ps.hip[1]), leg, 1e-14);
  }
}

TEST_F(BipedModelTest, RelabelingIsAnInvolution) {
  const Mat5 r = BipedModel::relabel_matrix();
  EXPECT_EQ((r * r - Mat5::Identity()).norm(), 0.0);
}

TEST_F(BipedModelTest, ImpactPreservesPositionsAndDissipates) {
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_real_distribution<double> leg(0.1, 0.35), knee(0.0, 0.5), torso(-0.2, 0.3);
    State pre;
    pre.q = double_support(leg(rng_), knee(rng_), torso(rng_));
    pre.dq = random_velocity(rng_, 1.5);
    const ImpactResult imp = model_.impact(pre);
    // Configuration only relabeled: link positions coincide after shifting
    // the origin to the old swing toe.
    EXPECT_EQ((imp.post.q - BipedModel::relabel_matrix() * pre.q).norm(), 0.0);
    const Vec2 old_toe = model_.swing_toe(pre.q);
    EXPECT_LT((model_.hip(imp.post.q) - (model_.hip(pre.q) - old_toe)).norm(), 1e-14);
    EXPECT_NEAR(model_.swing_foot_height(imp.post.q), 0.0, 1e-14);
    const double ke_pre = model_.kinetic_energy(pre.q, pre.dq);
    const double ke_post = model_.kinetic_energy(imp.post.q, imp.post.dq);
    EXPECT_LE(ke_post, ke_pre * (1.0 + 1e-12));
  }
}

TEST_F(BipedModelTest, ImpactAtRestStaysAtRest) {
  State pre;
  pre.q = double_support(0.2, 0.2, 0.1);
  const ImpactResult imp = model_.impact(pre);
  EXPECT_EQ(imp.post.dq.norm(), 0.0);
}

TEST_F(BipedModelTest, StaticBalanceGroundReaction) {
  // Lean the torso until the COM sits over the stance toe.
  Vec5 q = double_support(0.0, 0.2, 0.0);
  for (int it = 0; it < 50; ++it) {
    const double x = model_.center_of_mass(q).x();
    const Mat2x5 j = model_.com_jacobian(q);
    const double step = x / (j(0, 0) - j(0, 1));  // torso moves, stance leg fixed
    q(0) -= step;
    q(1) += step;
  }
  ASSERT_NEAR(model_.center_of_mass(q).x(), 0.0, 1e-12);
  const Vec5 g = model_.gravity_vector(q);
  ASSERT_NEAR(g(0), 0.0, 1e-9);
  State x{q, Vec5::Zero()};
  const GroundForce f = model_.ground_reaction(x, g.tail<4>());
  const double weight = model_.params().total_mass() * model_.params().gravity;
  EXPECT_NEAR(f.tangential, 0.0, 1e-6);
  EXPECT_NEAR(f.normal, weight, 1e-6);
}

TEST_F(BipedModelTest, GroundReactionEqualsMomentumRatePlusWeight) {
  std::normal_distribution<double> torque(0.0, 30.0);
  constexpr double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec5 q = random_posture(rng_);
    const Vec5 dq = random_velocity(rng_);
    Vec4 u;
    for (int i = 0; i < 4; ++i) u(i) = torque(rng_);
    const Vec5 ddq = model_.forward_dynamics(q, dq, u);
    const Vec2 rate = (oracle::momentum(q + h * dq, dq + h * ddq, model_.params()) -
                       oracle::momentum(q - h * dq, dq - h * ddq, model_.params())) /
                      (2 * h);
    const Vec2 ref = rate + Vec2(0.0, model_.params().total_mass() * model_.params().gravity);
    const GroundForce f = model_.ground_reaction(State{q, dq}, u);
    EXPECT_LT((Vec2(f.tangential, f.normal) - ref).norm(), 1e-6 * ref.norm());
  }
}

TEST(ModelParamsTest, RejectsInvalidValues) {
  ModelParams p;
  p.friction_limit = 1.5;
  EXPECT_THROW(p.validate(), Error);
  p = ModelParams{};
  p.femur.mass = 0.0;
  EXPECT_THROW(BipedModel{p}, Error);
  p = ModelParams{};
  p.min_normal_force = -1.0;
  EXPECT_THROW(p.validate(), Error);
}

}  // namespace
}  // namespace hzd
