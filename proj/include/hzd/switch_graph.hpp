#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "hzd/gait_design.hpp"

namespace hzd {

struct BoundednessVerdict {
  bool pass = false;
  double zeta_lb = 0.0;
  double zeta_ub = 0.0;
  double k = 0.0;          // max over the family of K_p
  double delta_sq = 0.0;
  double bound = 0.0;      // K / delta_sq
  double margin = 0.0;     // zeta_lb - bound
  std::vector<int> offending;  // gaits with zeta* below the bound
};

/// Boundedness check zeta*_lb >= K / delta_z^2 on raw family data.
BoundednessVerdict boundedness_check(const std::vector<double>& zeta_stars,
                               const std::vector<double>& ks, double delta_sq);
BoundednessVerdict boundedness_check(const GaitFamily& family);

/// Smallest integer N > log(|zeta_p - zeta_q| / eps + 1) / (2 log(1 / delta_z)).
/// Throws Error(kInvalidArgument) for eps <= 0 or delta_sq outside (0, 1).
int dwell_time_bound(double zeta_p, double zeta_q, double delta_sq, double eps);
int dwell_time_bound(const GaitFamily& family, int p, int q, double eps);

struct EdgeRecord {
  int from = 0;
  int to = 0;
  bool feasible = false;
  int weight = 0;          // analytic dwell-time bound, steps
  int measured_steps = 0;  // until zeta enters the eps-ball of the target
  ConstraintMonitor constraints;
  double max_output_norm = 0.0;
  std::vector<double> zeta;  // zeta at each pre-impact state, starting from the source
  std::string reason;        // why the edge is infeasible
};

struct FeasibilityOptions {
  double epsilon = 2.0;
  int cap_factor = 2;  // simulate at most cap_factor * bound + cap_extra steps
  int cap_extra = 10;
  SimOptions sim;
};

/// Starts at the fixed point of p and walks with the controller of q until
/// zeta enters B_eps(zeta*_q), checking the limits at every integrator sample.
EdgeRecord feasibility_sim(const GaitFamily& family, int p, int q, const Controller& controller,
                           const FeasibilityOptions& opt = {});

struct GraphNode {
  int index = 0;
  double speed = 0.0;
  double zeta_star = 0.0;
};

struct SwitchGraph {
  std::vector<GraphNode> nodes;
  std::vector<EdgeRecord> edges;     // feasible edges only
  std::vector<EdgeRecord> rejected;  // infeasible ordered pairs with reasons
  double epsilon = 2.0;
  double torque_limit = 0.0;
  double friction_limit = 0.0;
  double min_normal_force = 0.0;

  int size() const { return static_cast<int>(nodes.size()); }
  /// Out-neighbours of each node with the edge weight, ordered by target index.
  std::vector<std::vector<std::pair<int, int>>> adjacency() const;
  const EdgeRecord* edge(int from, int to) const;
};

/// Simulates every ordered pair (p != q) on `workers` threads (0: hardware concurrency).
SwitchGraph build_graph(const GaitFamily& family, const Controller& controller,
                        const FeasibilityOptions& opt = {}, unsigned workers = 0);

/// Graph from explicit weighted edges, for planning on hand-built fixtures.
SwitchGraph make_graph(int n, const std::vector<std::tuple<int, int, int>>& edges);

struct SccResult {
  std::vector<int> component;  // component id of each node
  std::vector<std::vector<int>> components;
  bool strongly_connected = false;
};

/// Tarjan's algorithm (iterative).
SccResult strongly_connected(const SwitchGraph& graph);

struct PlannedPath {
  std::vector<int> nodes;  // source first; empty when source == destination
  int steps = 0;           // summed dwell-time weights
};

/// Dijkstra on the dwell-time weights; among equal-cost paths the one whose
/// predecessors have lower indices wins. Throws Error(kUnreachable).
PlannedPath plan_path(const SwitchGraph& graph, int src, int dst);

}  // namespace hzd
