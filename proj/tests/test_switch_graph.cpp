#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "gait_fixture.hpp"
#include "hzd/switch_graph.hpp"

namespace hzd {
namespace {

TEST(BoundednessTest, ReferenceMagnitudesPass) {
  const double delta_sq = 0.5;
  const BoundednessVerdict v = boundedness_check({120.8, 180.0, 247.2}, {45.15, 40.0, 30.0}, delta_sq);
  EXPECT_TRUE(v.pass);
  EXPECT_NEAR(v.bound, 90.3, 1e-12);
  EXPECT_NEAR(v.margin, 30.5, 1e-12);
  EXPECT_DOUBLE_EQ(v.zeta_lb, 120.8);
  EXPECT_DOUBLE_EQ(v.zeta_ub, 247.2);
  EXPECT_TRUE(v.offending.empty());
}

TEST(BoundednessTest, SingleGaitReducesToDomainCondition) {
  EXPECT_TRUE(boundedness_check({100.0}, {79.0}, 0.8).pass);
  EXPECT_FALSE(boundedness_check({100.0}, {81.0}, 0.8).pass);
}

TEST(BoundednessTest, OffendingGaitReported) {
  const BoundednessVerdict v = boundedness_check({150.0, 85.0, 200.0}, {40.0, 45.15, 20.0}, 0.5);
  EXPECT_FALSE(v.pass);
  ASSERT_EQ(v.offending.size(), 1u);
  EXPECT_EQ(v.offending[0], 1);
}

TEST(BoundednessTest, MismatchedInputsRejected) {
  EXPECT_THROW(boundedness_check({1.0, 2.0}, {1.0}, 0.5), Error);
  EXPECT_THROW(boundedness_check({}, {}, 0.5), Error);
}

TEST(DwellTimeTest, EqualFixedPointsNeedOneStep) {
  EXPECT_EQ(dwell_time_bound(200.0, 200.0, 0.8, 2.0), 1);
}

TEST(DwellTimeTest, WorkedExampleByDirectIteration) {
  EXPECT_EQ(dwell_time_bound(106.0, 100.0, 0.5, 2.0), 3);
  // Worst start inside the eps-ball of p is |zeta - zeta_q| < 6 + 2.
  double d = 8.0;
  for (int n = 0; n < 3; ++n) d *= 0.5;
  EXPECT_DOUBLE_EQ(d, 1.0);
  EXPECT_LT(d, 2.0);
  d = 8.0;
  for (int n = 0; n < 2; ++n) d *= 0.5;
  EXPECT_GE(d, 2.0);
}

TEST(DwellTimeTest, BoundIsSufficientForWorstStart) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> dz(0.0, 100.0), ds(0.3, 0.95), de(0.5, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double delta = dz(rng), delta_sq = ds(rng), eps = de(rng);
    const int n = dwell_time_bound(200.0 + delta, 200.0, delta_sq, eps);
    EXPECT_LT((delta + eps) * std::pow(delta_sq, n), eps) << trial;
    EXPECT_GE(n, 1);
  }
}

TEST(DwellTimeTest, InvalidArgumentsRejected) {
  EXPECT_THROW(dwell_time_bound(1.0, 2.0, 0.5, 0.0), Error);
  EXPECT_THROW(dwell_time_bound(1.0, 2.0, 1.0, 1.0), Error);
  EXPECT_THROW(dwell_time_bound(1.0, 2.0, 0.0, 1.0), Error);
}

SwitchGraph ring(int n) {
  std::vector<std::tuple<int, int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n, 1);
  return make_graph(n, e);
}

TEST(SccTest, RingIsStronglyConnected) {
  const SccResult r = strongly_connected(ring(6));
  EXPECT_TRUE(r.strongly_connected);
  EXPECT_EQ(r.components.size(), 1u);
}

TEST(SccTest, StarIsNot) {
  std::vector<std::tuple<int, int, int>> e;
  for (int i = 1; i < 5; ++i) e.emplace_back(0, i, 1);
  const SccResult r = strongly_connected(make_graph(5, e));
  EXPECT_FALSE(r.strongly_connected);
  EXPECT_EQ(r.components.size(), 5u);
}

TEST(SccTest, DisconnectedCycles) {
  const SccResult r = strongly_connected(make_graph(
      6, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}, {3, 4, 1}, {4, 5, 1}, {5, 3, 1}, {2, 3, 1}}));
  EXPECT_FALSE(r.strongly_connected);
  ASSERT_EQ(r.components.size(), 2u);
  EXPECT_EQ(r.component[0], r.component[2]);
  EXPECT_EQ(r.component[3], r.component[5]);
  EXPECT_NE(r.component[0], r.component[3]);
}

TEST(SccTest, CompleteGraph) {
  std::vector<std::tuple<int, int, int>> e;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      if (i != j) e.emplace_back(i, j, 2);
  EXPECT_TRUE(strongly_connected(make_graph(7, e)).strongly_connected);
}

TEST(SccTest, LongChainDoesNotOverflow) {
  EXPECT_TRUE(strongly_connected(ring(200000)).strongly_connected);
}

// Exhaustive search over simple paths.
int brute_force(const SwitchGraph& g, int src, int dst) {
  const auto adj = g.adjacency();
  std::vector<bool> seen(g.size(), false);
  int best = std::numeric_limits<int>::max();
  std::function<void(int, int)> dfs = [&](int u, int cost) {
    if (u == dst) {
      best = std::min(best, cost);
      return;
    }
    seen[u] = true;
    for (const auto& [v, w] : adj[u])
      if (!seen[v]) dfs(v, cost + w);
    seen[u] = false;
  };
  dfs(src, 0);
  return best;
}

SwitchGraph random_graph(std::mt19937& rng, int n, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> w(1, 20);
  std::vector<std::tuple<int, int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && u(rng) < density) e.emplace_back(i, j, w(rng));
  return make_graph(n, e);
}

TEST(PlannerTest, SourceEqualsDestination) {
  const PlannedPath p = plan_path(ring(5), 2, 2);
  EXPECT_TRUE(p.nodes.empty());
  EXPECT_EQ(p.steps, 0);
}

TEST(PlannerTest, RingPath) {
  const PlannedPath p = plan_path(ring(5), 0, 3);
  EXPECT_EQ(p.nodes, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(p.steps, 3);
}

TEST(PlannerTest, TieBreakPrefersLowerIndex) {
  const SwitchGraph g = make_graph(4, {{0, 2, 1}, {0, 1, 1}, {2, 3, 1}, {1, 3, 1}});
  EXPECT_EQ(plan_path(g, 0, 3).nodes, (std::vector<int>{0, 1, 3}));
}

TEST(PlannerTest, MatchesBruteForceOnSmallGraphs) {
  std::mt19937 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 9;
    const SwitchGraph g = random_graph(rng, n, 0.35);
    for (int s = 0; s < n; ++s)
      for (int d = 0; d < n; ++d) {
        if (s == d) continue;
        const int ref = brute_force(g, s, d);
        if (ref == std::numeric_limits<int>::max()) {
          EXPECT_THROW(plan_path(g, s, d), Error);
          continue;
        }
        const PlannedPath p = plan_path(g, s, d);
        EXPECT_EQ(p.steps, ref) << "trial " << trial;
        int sum = 0;
        for (std::size_t k = 1; k < p.nodes.size(); ++k) {
          const EdgeRecord* e = g.edge(p.nodes[k - 1], p.nodes[k]);
          ASSERT_NE(e, nullptr);
          sum += e->weight;
        }
        EXPECT_EQ(sum, p.steps);
        ++checked;
      }
  }
  EXPECT_GT(checked, 500);
}

TEST(PlannerTest, MatchesBruteForceOnTwentyNodes) {
  std::mt19937 rng(23);
  const SwitchGraph g = random_graph(rng, 20, 0.15);
  for (int d = 1; d < 20; ++d) {
    const int ref = brute_force(g, 0, d);
    if (ref == std::numeric_limits<int>::max()) continue;
    EXPECT_EQ(plan_path(g, 0, d).steps, ref);
  }
}

TEST(PlannerTest, UnreachableListsSourceComponent) {
  const SwitchGraph g = make_graph(4, {{0, 1, 1}, {1, 0, 1}, {2, 3, 1}});
  try {
    plan_path(g, 0, 3);
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnreachable);
    EXPECT_NE(std::string(e.what()).find("0"), std::string::npos);
  }
}

class FeasibilityTest : public ::testing::Test {
 protected:
  const GaitFamily& f_ = fixture::small_family();
  const int last_ = static_cast<int>(f_.gaits.size()) - 1;
};

TEST_F(FeasibilityTest, SelfSwitchIsImmediate) {
  const EdgeRecord e = feasibility_sim(f_, 1, 1, fixture::controller());
  EXPECT_TRUE(e.feasible);
  EXPECT_EQ(e.measured_steps, 0);
}

TEST_F(FeasibilityTest, ZetaSequenceFollowsAffineMap) {
  FeasibilityOptions opt;
  opt.epsilon = 0.01;
  const EdgeRecord e = feasibility_sim(f_, 0, 1, fixture::controller(), opt);
  ASSERT_TRUE(e.feasible) << e.reason;
  ASSERT_GE(e.zeta.size(), 3u);
  const LimitCycleRecord& q = f_.gaits[1];
  for (std::size_t k = 1; k < e.zeta.size(); ++k) {
    const double pred = q.delta_sq * e.zeta[k - 1] - q.v_minus;
    EXPECT_NEAR(e.zeta[k] / pred, 1.0, 1e-6) << "step " << k;
  }
}

TEST_F(FeasibilityTest, MeasuredStepsWithinBound) {
  for (int q = 0; q <= last_; ++q) {
    const EdgeRecord e = feasibility_sim(f_, 0, q, fixture::controller());
    ASSERT_TRUE(e.feasible) << e.reason;
    EXPECT_LE(e.measured_steps, e.weight);
    EXPECT_EQ(e.weight, dwell_time_bound(f_, 0, q, 2.0));
  }
}

TEST_F(FeasibilityTest, TightTorqueLimitRejectsEdge) {
  ModelParams mp;
  mp.torque_limit = 0.5 * f_.gaits[last_].margins.max_torque;
  const Controller tight(BipedModel(mp), ControllerConfig{});
  const EdgeRecord e = feasibility_sim(f_, last_, 0, tight);
  EXPECT_FALSE(e.feasible);
  EXPECT_TRUE(e.constraints.torque_violated);
  EXPECT_NE(e.reason.find("torque"), std::string::npos);
}

TEST_F(FeasibilityTest, FeasibilityMonotoneInTorqueLimit) {
  const double base = f_.gaits[last_].margins.max_torque;
  bool was_feasible = false;
  for (double factor : {0.5, 0.8, 0.95, 1.0, 1.05, 1.5, 3.0}) {
    ModelParams mp;
    mp.torque_limit = factor * base;
    const Controller c(BipedModel(mp), ControllerConfig{});
    const bool ok = feasibility_sim(f_, last_, 0, c).feasible;
    if (was_feasible) EXPECT_TRUE(ok) << "factor " << factor;
    was_feasible = was_feasible || ok;
  }
  EXPECT_TRUE(was_feasible);
}

TEST_F(FeasibilityTest, GraphOverSmallFamily) {
  const SwitchGraph g = build_graph(f_, fixture::controller(), {}, 2);
  EXPECT_EQ(g.size(), static_cast<int>(f_.gaits.size()));
  EXPECT_EQ(g.edges.size() + g.rejected.size(), f_.gaits.size() * (f_.gaits.size() - 1));
  for (const EdgeRecord& e : g.edges) {
    EXPECT_TRUE(e.feasible);
    EXPECT_LE(e.measured_steps, e.weight);
    EXPECT_NE(e.from, e.to);
  }
  for (const EdgeRecord& e : g.rejected) EXPECT_FALSE(e.reason.empty());
  EXPECT_TRUE(strongly_connected(g).strongly_connected);
}

TEST_F(FeasibilityTest, FamilyPassesBoundedness) {
  const BoundednessVerdict v = boundedness_check(f_);
  EXPECT_TRUE(v.pass);
  EXPECT_NEAR(v.zeta_lb, f_.zeta_lb(), 0.0);
  EXPECT_NEAR(v.k, f_.k_max(), 0.0);
}

}  // namespace
}  // namespace hzd
