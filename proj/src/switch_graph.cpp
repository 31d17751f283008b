#include "hzd/switch_graph.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <thread>
#include <tuple>

namespace hzd {

BoundednessVerdict boundedness_check(const std::vector<double>& zeta_stars,
                               const std::vector<double>& ks, double delta_sq) {
  if (zeta_stars.empty() || zeta_stars.size() != ks.size()) {
    throw Error(ErrorCode::kInvalidArgument, "boundedness_check needs one K per fixed point");
  }
  BoundednessVerdict v;
  v.delta_sq = delta_sq;
  v.zeta_lb = *std::min_element(zeta_stars.begin(), zeta_stars.end());
  v.zeta_ub = *std::max_element(zeta_stars.begin(), zeta_stars.end());
  v.k = *std::max_element(ks.begin(), ks.end());
  v.bound = v.k / delta_sq;
  v.margin = v.zeta_lb - v.bound;
  for (std::size_t p = 0; p < zeta_stars.size(); ++p) {
    if (zeta_stars[p] < v.bound) v.offending.push_back(static_cast<int>(p));
  }
  v.pass = v.offending.empty();
  return v;
}

BoundednessVerdict boundedness_check(const GaitFamily& family) {
  std::vector<double> z;
  std::vector<double> k;
  for (const auto& g : family.gaits) {
    z.push_back(g.zeta_star);
    k.push_back(g.k);
  }
  return boundedness_check(z, k, family.delta_sq());
}

int dwell_time_bound(double zeta_p, double zeta_q, double delta_sq, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  if (!(delta_sq > 0.0 && delta_sq < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "delta_z^2 must lie in (0, 1)");
  }
  const double x = std::log(std::abs(zeta_p - zeta_q) / eps + 1.0) / -std::log(delta_sq);
  return static_cast<int>(std::floor(x)) + 1;
}

int dwell_time_bound(const GaitFamily& family, int p, int q, double eps) {
  return dwell_time_bound(family.gaits.at(static_cast<std::size_t>(p)).zeta_star,
                          family.gaits.at(static_cast<std::size_t>(q)).zeta_star,
                          family.delta_sq(), eps);
}

EdgeRecord feasibility_sim(const GaitFamily& family, int p, int q, const Controller& controller,
                           const FeasibilityOptions& opt) {
  EdgeRecord e;
  e.from = p;
  e.to = q;
  e.weight = dwell_time_bound(family, p, q, opt.epsilon);
  const LimitCycleRecord& src = family.gaits.at(static_cast<std::size_t>(p));
  const LimitCycleRecord& dst = family.gaits.at(static_cast<std::size_t>(q));
  const GaitParams gait = family.params(static_cast<std::size_t>(q));
  SimOptions sim = opt.sim;
  sim.record = false;

  State x = src.x_star;
  double z = zeta(x, controller.model());
  e.zeta.push_back(z);
  const int cap = opt.cap_factor * e.weight + opt.cap_extra;
  while (!(std::abs(z - dst.zeta_star) < opt.epsilon)) {
    if (e.measured_steps >= cap) {
      std::ostringstream msg;
      msg << "eps-ball not reached within " << cap << " steps";
      e.reason = msg.str();
      return e;
    }
    StepResult r;
    try {
      r = step_from_surface(x, gait, controller, sim);
    } catch (const Error& err) {
      e.reason = std::string("simulation failed: ") + err.what();
      return e;
    }
    ++e.measured_steps;
    e.constraints.merge(r.constraints);
    e.max_output_norm = std::max(e.max_output_norm, r.max_output_norm);
    x = r.pre_impact;
    z = zeta(x, controller.model());
    e.zeta.push_back(z);
  }
  if (e.constraints.violated()) {
    e.reason = "constraint violated: " + e.constraints.reason();
    return e;
  }
  e.feasible = true;
  return e;
}

std::vector<std::vector<std::pair<int, int>>> SwitchGraph::adjacency() const {
  std::vector<std::vector<std::pair<int, int>>> adj(nodes.size());
  for (const EdgeRecord& e : edges) adj.at(static_cast<std::size_t>(e.from)).emplace_back(e.to, e.weight);
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

const EdgeRecord* SwitchGraph::edge(int from, int to) const {
  for (const EdgeRecord& e : edges) {
    if (e.from == from && e.to == to) return &e;
  }
  return nullptr;
}

SwitchGraph build_graph(const GaitFamily& family, const Controller& controller,
                        const FeasibilityOptions& opt, unsigned workers) {
  SwitchGraph g;
  g.epsilon = opt.epsilon;
  const ModelParams& limits = controller.model().params();
  g.torque_limit = limits.torque_limit;
  g.friction_limit = limits.friction_limit;
  g.min_normal_force = limits.min_normal_force;
  const int n = static_cast<int>(family.gaits.size());
  for (int p = 0; p < n; ++p) {
    g.nodes.push_back({p, family.gaits[static_cast<std::size_t>(p)].speed,
                       family.gaits[static_cast<std::size_t>(p)].zeta_star});
  }

  std::vector<std::pair<int, int>> pairs;
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p != q) pairs.emplace_back(p, q);
    }
  }
  std::vector<EdgeRecord> results(pairs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      results[i] = feasibility_sim(family, pairs[i].first, pairs[i].second, controller, opt);
      results[i].zeta.clear();
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(pairs.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (EdgeRecord& e : results) (e.feasible ? g.edges : g.rejected).push_back(std::move(e));
  return g;
}

SwitchGraph make_graph(int n, const std::vector<std::tuple<int, int, int>>& edges) {
  SwitchGraph g;
  for (int p = 0; p < n; ++p) g.nodes.push_back({p, 0.0, 0.0});
  for (const auto& [from, to, w] : edges) {
    if (from < 0 || from >= n || to < 0 || to >= n) {
      throw Error(ErrorCode::kInvalidArgument, "edge endpoint out of range");
    }
    EdgeRecord e;
    e.from = from;
    e.to = to;
    e.weight = w;
    e.feasible = true;
    g.edges.push_back(e);
  }
  return g;
}

SccResult strongly_connected(const SwitchGraph& graph) {
  const int n = graph.size();
  const auto adj = graph.adjacency();
  std::vector<int> index(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  SccResult out;
  out.component.assign(static_cast<std::size_t>(n), -1);
  int counter = 0;

  // Explicit DFS frames: (node, next neighbour position).
  std::vector<std::pair<int, std::size_t>> frames;
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    frames.emplace_back(root, 0);
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      const auto sv = static_cast<std::size_t>(v);
      if (pos == 0 && index[sv] < 0) {
        index[sv] = low[sv] = counter++;
        stack.push_back(v);
        on_stack[sv] = 1;
      }
      if (pos < adj[sv].size()) {
        const int w = adj[sv][pos].first;
        ++pos;
        const auto sw = static_cast<std::size_t>(w);
        if (index[sw] < 0) {
          frames.emplace_back(w, 0);
        } else if (on_stack[sw]) {
          low[sv] = std::min(low[sv], index[sw]);
        }
        continue;
      }
      if (low[sv] == index[sv]) {
        std::vector<int> comp;
        int w = -1;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          out.component[static_cast<std::size_t>(w)] = static_cast<int>(out.components.size());
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.components.push_back(std::move(comp));
      }
      const int finished = v;
      frames.pop_back();
      if (!frames.empty()) {
        const auto parent = static_cast<std::size_t>(frames.back().first);
        low[parent] = std::min(low[parent], low[static_cast<std::size_t>(finished)]);
      }
    }
  }
  out.strongly_connected = n > 0 && out.components.size() == 1;
  return out;
}

PlannedPath plan_path(const SwitchGraph& graph, int src, int dst) {
  const int n = graph.size();
  if (src < 0 || src >= n || dst < 0 || dst >= n) {
    throw Error(ErrorCode::kInvalidArgument, "plan endpoints out of range");
  }
  PlannedPath out;
  if (src == dst) return out;

  constexpr long long kInf = std::numeric_limits<long long>::max();
  const auto adj = graph.adjacency();
  std::vector<long long> dist(static_cast<std::size_t>(n), kInf);
  std::vector<int> prev(static_cast<std::size_t>(n), -1);
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  using Item = std::pair<long long, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(src)] = 0;
  heap.emplace(0, src);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    const auto sv = static_cast<std::size_t>(v);
    if (done[sv]) continue;
    done[sv] = 1;
    for (const auto& [w, weight] : adj[sv]) {
      const auto sw = static_cast<std::size_t>(w);
      const long long nd = d + weight;
      if (nd < dist[sw] || (nd == dist[sw] && !done[sw] && v < prev[sw])) {
        dist[sw] = nd;
        prev[sw] = v;
        heap.emplace(nd, w);
      }
    }
  }
  if (dist[static_cast<std::size_t>(dst)] == kInf) {
    const SccResult scc = strongly_connected(graph);
    const auto& comp =
        scc.components[static_cast<std::size_t>(scc.component[static_cast<std::size_t>(src)])];
    std::ostringstream msg;
    msg << "gait " << dst << " is unreachable from gait " << src
        << "; strongly connected component of the source: {";
    for (std::size_t i = 0; i < comp.size(); ++i) msg << (i ? "," : "") << comp[i];
    msg << "}";
    throw Error(ErrorCode::kUnreachable, msg.str());
  }
  for (int v = dst; v != -1; v = prev[static_cast<std::size_t>(v)]) out.nodes.push_back(v);
  std::reverse(out.nodes.begin(), out.nodes.end());
  out.steps = static_cast<int>(dist[static_cast<std::size_t>(dst)]);
  return out;
}

}  // namespace hzd
