// Acceptance run: designs everything from scratch and prints one PASS/FAIL
// line per criterion. Exits nonzero when any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include <CLI11.hpp>

#include "hzd/config.hpp"
#include "hzd/io.hpp"

namespace fs = std::filesystem;
using namespace hzd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

bool base_gait_criterion(const BaseGait& g, const ModelParams& mp, double secs) {
  const LimitCycleRecord& r = g.record;
  const bool ok = r.periodicity_error < 1e-8 && r.delta_sq < 1.0 && r.spectral_radius < 1.0 &&
                  r.margins.max_torque <= mp.torque_limit &&
                  r.margins.max_friction_ratio <= mp.friction_limit &&
                  r.margins.min_normal >= mp.min_normal_force && secs < 600.0;
  report(ok, "base-gait",
         "|P(x*)-x*|=" + fmt(r.periodicity_error) + " delta_z^2=" + fmt(r.delta_sq, 6) +
             " rho=" + fmt(r.spectral_radius, 6) + " max|u|=" + fmt(r.margins.max_torque) +
             " max|Ft|/Fn=" + fmt(r.margins.max_friction_ratio) + " min Fn=" +
             fmt(r.margins.min_normal) + " speed=" + fmt(r.speed) + " time=" + fmt(secs) + "s");
  return ok;
}

void affinity_criterion(const GaitFamily& f, const Controller& ctl) {
  double worst = 0.0;
  for (const LimitCycleRecord& g : f.gaits) worst = std::max(worst, g.affinity_residual);
  // Independent refit with five fresh samples at the ends and the base.
  double refit = 0.0;
  for (std::size_t p : {std::size_t{0}, static_cast<std::size_t>(f.base_index), f.gaits.size() - 1}) {
    const LimitCycleRecord& g = f.gaits[p];
    const std::vector<double> zs = reduced_map_samples(g.zeta_star, g.delta_sq, g.k, 0.08);
    refit = std::max(refit, fit_reduced_map(f.params(p), ctl, zs, 1.0).residual);
  }
  report(worst < 1e-8 && refit < 1e-8, "affine-reduced-map",
         "max 5-sample residual over " + std::to_string(f.gaits.size()) + " gaits=" + fmt(worst) +
             ", refit at ends/base=" + fmt(refit));
}

void family_criterion(const GaitFamily& f) {
  const double d0 = f.gaits[f.base_index].delta_sq;
  double dd = 0.0, closure = 0.0, rho = 0.0;
  for (const LimitCycleRecord& g : f.gaits) {
    dd = std::max(dd, std::abs(g.delta_sq - d0));
    closure = std::max(closure, std::abs(g.zeta_star - g.predicted_zeta_star()) / g.zeta_star);
    rho = std::max(rho, g.spectral_radius);
  }
  report(dd < 1e-6 && closure < 1e-8 && rho < 1.0, "family-stability",
         "max |delta_z^2 - base|=" + fmt(dd) + " max rel |zeta* - fixed point of affine map|=" +
             fmt(closure) + " max rho=" + fmt(rho, 6));
}

void impact_geometry_criterion(const GaitFamily& f) {
  const LimitCycleRecord& b = f.gaits[f.base_index];
  double tp = 0.0, tm = 0.0, len = 0.0;
  for (const LimitCycleRecord& g : f.gaits) {
    tp = std::max(tp, std::abs(g.theta_plus - b.theta_plus));
    tm = std::max(tm, std::abs(g.theta_minus - b.theta_minus));
    len = std::max(len, std::abs(g.step_length - b.step_length));
  }
  report(tp < 1e-8 && tm < 1e-8 && len < 1e-8, "impact-geometry",
         "max deviation theta+=" + fmt(tp) + " theta-=" + fmt(tm) + " step length=" + fmt(len));
}

void continuum_criterion(const GaitFamily& f, double secs) {
  const double v0 = f.base_speed;
  double gap = 0.0;
  bool monotone = true, sign = true, order = true;
  for (std::size_t p = 0; p < f.gaits.size(); ++p) {
    const LimitCycleRecord& g = f.gaits[p];
    if (p > 0) {
      gap = std::max(gap, g.speed - f.gaits[p - 1].speed);
      if (!(g.speed > f.gaits[p - 1].speed)) monotone = false;
    }
    if (static_cast<int>(p) != f.base_index && (g.v_des > v0) != (g.speed > v0)) sign = false;
    for (std::size_t q = 0; q < f.gaits.size(); ++q) {
      if (g.v_des > f.gaits[q].v_des && !(g.speed > f.gaits[q].speed)) order = false;
    }
  }
  const double lo = f.gaits.front().speed, hi = f.gaits.back().speed;
  const bool span = lo <= 0.85 * v0 && hi >= 1.15 * v0;
  const bool ok = f.gaits.size() >= 20 && span && gap <= 0.01 && monotone && sign && order &&
                  secs < 1800.0 && f.warnings.empty();
  report(ok, "continuum",
         std::to_string(f.gaits.size()) + " gaits, " + fmt(lo) + "-" + fmt(hi) + " m/s (base " +
             fmt(v0) + ", +-15% = " + fmt(0.85 * v0) + "-" + fmt(1.15 * v0) + "), max gap=" +
             fmt(gap) + (monotone ? ", monotone" : ", NOT monotone") +
             (sign ? ", sign ok" : ", sign violated") + (order ? ", ordering ok" : ", ordering violated") +
             ", time=" + fmt(secs) + "s" +
             (f.warnings.empty() ? "" : ", warning: " + f.warnings.front()));
}

struct StressOutcome {
  double bound_violation = 0.0;  // relative, worst excursion outside [lb, ub]
  double replay_error = 0.0;     // relative
  std::string error;
};

StressOutcome stress_one(const GaitFamily& f, const std::vector<GaitParams>& gaits, const Controller& ctl,
                         unsigned seed, int steps) {
  StressOutcome out;
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(f.gaits.size()) - 1);
  SwitchSignal sig;
  const int start = pick(rng);
  for (int k = 0; k < steps; ++k) sig.gaits.push_back(pick(rng));
  SimOptions sim;
  sim.record = false;
  const BipedModel& model = ctl.model();
  try {
    const std::vector<StepResult> r = run_switched(f.gaits[start].x_star, sig, gaits, ctl, sim);
    std::vector<double> z{zeta(f.gaits[start].x_star, model)};
    for (const StepResult& s : r) z.push_back(zeta(s.pre_impact, model));
    const std::vector<double> replay = affine_replay(f, sig.gaits, z.front());
    const double lb = f.zeta_lb(), ub = f.zeta_ub();
    for (std::size_t k = 0; k < z.size(); ++k) {
      out.bound_violation = std::max(out.bound_violation, std::max(lb - z[k], z[k] - ub) / ub);
      out.replay_error = std::max(out.replay_error, std::abs(z[k] - replay[k]) / replay[k]);
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

void boundedness_criterion(const GaitFamily& f, const Controller& ctl, int seeds, int steps, unsigned workers) {
  const BoundednessVerdict v = boundedness_check(f);
  const std::vector<GaitParams> gaits = f.all_params();
  std::vector<StressOutcome> outcomes(static_cast<std::size_t>(seeds));
  const auto t0 = Clock::now();
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::max(1u, workers); ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < seeds; i = next++) {
        outcomes[static_cast<std::size_t>(i)] = stress_one(f, gaits, ctl, 1000u + static_cast<unsigned>(i), steps);
      }
    });
  }
  for (auto& t : pool) t.join();
  double excursion = -1.0, replay = 0.0;
  std::string error;
  for (const StressOutcome& o : outcomes) {
    excursion = std::max(excursion, o.bound_violation);
    replay = std::max(replay, o.replay_error);
    if (error.empty() && !o.error.empty()) error = o.error;
  }
  const bool ok = v.pass && error.empty() && excursion <= 1e-6 && replay < 1e-6;
  report(ok, "switching-boundedness",
         "zeta*_lb=" + fmt(v.zeta_lb) + " K/delta_z^2=" + fmt(v.bound) + " zeta*_ub=" + fmt(v.zeta_ub) +
             " margin=" + fmt(v.margin) + "; " + std::to_string(seeds) + " random signals x " +
             std::to_string(steps) + " steps: worst excursion outside [lb,ub]=" + fmt(excursion) +
             " (rel), max |zeta - affine replay|=" + fmt(replay) + " (rel), time=" + fmt(seconds_since(t0)) +
             "s" + (error.empty() ? "" : ", error: " + error));
}

void dwell_time_criterion(const SwitchGraph& g) {
  int worst_slack = std::numeric_limits<int>::max();
  int violations = 0;
  for (const EdgeRecord& e : g.edges) {
    if (e.measured_steps > e.weight) ++violations;
    worst_slack = std::min(worst_slack, e.weight - e.measured_steps);
  }
  // Worked example: delta_z^2 = 0.5, eps = 2, |dzeta*| = 6, worst start 8 away.
  const int n = dwell_time_bound(106.0, 100.0, 0.5, 2.0);
  double d = 8.0;
  for (int k = 0; k < n; ++k) d = 0.5 * d;
  double d_short = 8.0;
  for (int k = 0; k + 1 < n; ++k) d_short = 0.5 * d_short;
  const bool example = n == 3 && d < 2.0 && d_short >= 2.0;
  report(violations == 0 && example && !g.edges.empty(), "dwell-time",
         std::to_string(g.edges.size()) + " feasible edges at eps=" + fmt(g.epsilon) +
             ", measured > bound on " + std::to_string(violations) + ", min slack=" +
             std::to_string(worst_slack) + " steps; worked example N=" + std::to_string(n) +
             ", distance after N steps=" + fmt(d));
}

int brute_force(const SwitchGraph& g, int src, int dst) {
  const auto adj = g.adjacency();
  std::vector<bool> seen(static_cast<std::size_t>(g.size()), false);
  int best = std::numeric_limits<int>::max();
  std::function<void(int, int)> dfs = [&](int u, int cost) {
    if (u == dst) {
      best = std::min(best, cost);
      return;
    }
    seen[static_cast<std::size_t>(u)] = true;
    for (const auto& [w, c] : adj[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(w)]) dfs(w, cost + c);
    seen[static_cast<std::size_t>(u)] = false;
  };
  dfs(src, 0);
  return best;
}

void planner_criterion(const SwitchGraph& family_graph) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> w(1, 20);
  int mismatches = 0, pairs = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 9;
    std::vector<std::tuple<int, int, int>> e;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && u(rng) < 0.35) e.emplace_back(i, j, w(rng));
    const SwitchGraph g = make_graph(n, e);
    for (int s = 0; s < n; ++s)
      for (int d = 0; d < n; ++d) {
        if (s == d) continue;
        const int ref = brute_force(g, s, d);
        int got = std::numeric_limits<int>::max();
        try {
          got = plan_path(g, s, d).steps;
        } catch (const Error&) {
        }
        if (got != ref) ++mismatches;
        ++pairs;
      }
  }
  std::vector<std::tuple<int, int, int>> ring, star, split;
  for (int i = 0; i < 6; ++i) ring.emplace_back(i, (i + 1) % 6, 1);
  for (int i = 1; i < 6; ++i) star.emplace_back(0, i, 1);
  split = {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}, {3, 4, 1}, {4, 5, 1}, {5, 3, 1}, {2, 3, 1}};
  const SccResult r_ring = strongly_connected(make_graph(6, ring));
  const SccResult r_star = strongly_connected(make_graph(6, star));
  const SccResult r_split = strongly_connected(make_graph(6, split));
  const bool scc_ok = r_ring.strongly_connected && !r_star.strongly_connected &&
                      r_star.components.size() == 6 && !r_split.strongly_connected &&
                      r_split.components.size() == 2;
  const SccResult fam = strongly_connected(family_graph);
  report(mismatches == 0 && scc_ok, "graph-planner",
         "Dijkstra vs brute force on 100 random digraphs (" + std::to_string(pairs) +
             " pairs): " + std::to_string(mismatches) + " mismatches; SCC fixtures ring/star/disconnected " +
             (scc_ok ? "correct" : "WRONG") + "; family graph " + std::to_string(family_graph.size()) +
             " nodes, " + std::to_string(family_graph.edges.size()) + " edges, " +
             (fam.strongly_connected ? "strongly connected"
                                     : std::to_string(fam.components.size()) + " components"));
}

void end_to_end_criterion(const AppConfig& cfg, const GaitFamily& f, const SwitchGraph& g,
                          const Controller& ctl, const fs::path& out_dir) {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  try {
    const SupervisorRun r = supervise(cfg.schedule, f, g, ctl, cfg.supervisor);
    const double secs = seconds_since(t0);
    {
      std::ofstream steps(out_dir / "steps.csv");
      write_steps_csv(steps, r);
      std::ofstream sw(out_dir / "switches.csv");
      write_switches_csv(sw, r);
      std::ofstream traj(out_dir / "trajectory.csv");
      write_trajectory_csv(traj, r.steps);
    }
    const auto& entries = cfg.schedule.entries;
    std::vector<int> switch_count(entries.size(), 0);
    for (const SwitchEvent& s : r.switches) {
      std::size_t seg = 0;
      while (seg + 1 < entries.size() && s.time >= entries[seg + 1].time) ++seg;
      ++switch_count[seg];
    }
    int slow = 0, fast = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      // Speed at the end of each segment.
      const double t_end = i + 1 < entries.size() ? entries[i + 1].time : 1e300;
      double v_end = 0.0;
      for (const StepLog& l : r.log)
        if (l.t_end <= t_end) v_end = l.speed;
      const double err = std::abs(v_end - entries[i].speed);
      if (err > 0.01) ok = false;
      detail += "target " + fmt(entries[i].speed) + " reached " + fmt(v_end) + " (" +
                std::to_string(switch_count[i]) + " switches); ";
      if (i > 0) (entries[i].speed < entries[i - 1].speed ? slow : fast) += switch_count[i];
    }
    // Staircase: during the slow-down segment the gait index only decreases.
    bool staircase = true;
    int plateaus = 0, prev = -1;
    for (const StepLog& l : r.log) {
      if (entries.size() < 2 || l.t_start < entries[1].time) continue;
      if (entries.size() > 2 && l.t_start >= entries[2].time) break;
      if (prev >= 0 && l.gait > prev) staircase = false;
      if (l.gait != prev) ++plateaus;
      prev = l.gait;
    }
    const bool asym = slow >= fast;
    ok = ok && !r.constraints.violated() && asym && staircase && plateaus >= 2 && secs < 300.0;
    detail += "slow-down switches " + std::to_string(slow) + " >= speed-up " + std::to_string(fast) +
              (asym ? "" : " VIOLATED") + "; staircase " + (staircase ? "monotone" : "NOT monotone") +
              " with " + std::to_string(plateaus) + " plateaus; constraints " +
              (r.constraints.violated() ? "VIOLATED" : "respected") + " (max|u|=" +
              fmt(r.constraints.max_torque) + ", min Fn=" + fmt(r.constraints.min_normal) +
              ", max|Ft|/Fn=" + fmt(r.constraints.max_friction_ratio) + "); " +
              std::to_string(r.log.size()) + " steps in " + fmt(secs) + "s";
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("error: ") + e.what();
  }
  report(ok, "end-to-end", detail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run over the full pipeline"};
  std::string config_path;
  std::string out = "acceptance";
  int seeds = 100, steps = 1000;
  unsigned workers = 0;
  app.add_option("-c,--config", config_path, "YAML config file");
  app.add_option("-o,--out", out, "Directory for artifacts and CSVs");
  app.add_option("--seeds", seeds, "Random switching signals");
  app.add_option("--steps", steps, "Steps per switching signal");
  app.add_option("--workers", workers, "Threads (0: all cores)");
  CLI11_PARSE(app, argc, argv);

  try {
    const AppConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    const fs::path dir(out);
    fs::create_directories(dir);
    const Controller ctl(BipedModel(cfg.model), cfg.controller);
    const ModelParams& mp = cfg.model;

    auto t0 = Clock::now();
    const BaseGait base = design_base_gait(ctl, cfg.design);
    const double design_secs = seconds_since(t0);
    save_gait((dir / "base_gait.json").string(), base, mp);
    base_gait_criterion(base, mp, design_secs);

    ContinuumOptions copt = cfg.continuum;
    copt.speed_lo = std::min(copt.speed_lo, 0.85 * base.record.speed);
    copt.speed_hi = std::max(copt.speed_hi, 1.15 * base.record.speed);
    t0 = Clock::now();
    const GaitFamily fam = generate_continuum(base, ctl, copt);
    const double cont_secs = seconds_since(t0);
    save_family((dir / "family.json").string(), fam, mp);
    {
      std::ofstream c(dir / "continuum.csv");
      write_continuum_csv(c, fam, ctl);
      std::ofstream fcsv(dir / "family.csv");
      write_family_csv(fcsv, fam);
    }
    affinity_criterion(fam, ctl);
    family_criterion(fam);
    impact_geometry_criterion(fam);
    continuum_criterion(fam, cont_secs);

    boundedness_criterion(fam, ctl, seeds, steps, workers);

    t0 = Clock::now();
    const SwitchGraph graph = build_graph(fam, ctl, cfg.graph, workers);
    std::cout << "info graph built in " << fmt(seconds_since(t0)) << "s" << std::endl;
    save_graph((dir / "graph.json").string(), graph, mp);
    {
      std::ofstream e(dir / "edges.csv");
      write_edges_csv(e, graph);
    }
    dwell_time_criterion(graph);
    planner_criterion(graph);
    end_to_end_criterion(cfg, fam, graph, ctl, dir);
  } catch (const std::exception& e) {
    std::cout << "FAIL pipeline: " << e.what() << std::endl;
    ++failures;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
