// Command-line pipeline: design-base -> continuum -> analyze -> graph -> plan/run -> export.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hzd/config.hpp"
#include "hzd/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hzd;

namespace {

struct Paths {
  fs::path dir;
  std::string gait() const { return (dir / "base_gait.json").string(); }
  std::string family() const { return (dir / "family.json").string(); }
  std::string graph() const { return (dir / "graph.json").string(); }
  std::string file(const char* name) const { return (dir / name).string(); }
};

std::ofstream open_out(const std::string& path) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json record_summary(const LimitCycleRecord& r) {
  return {{"speed", r.speed},
          {"zeta_star", r.zeta_star},
          {"delta_sq", r.delta_sq},
          {"k", r.k},
          {"period", r.period},
          {"step_length", r.step_length},
          {"spectral_radius", r.spectral_radius},
          {"periodicity_error", r.periodicity_error},
          {"max_torque", r.margins.max_torque},
          {"min_normal", r.margins.min_normal},
          {"max_friction_ratio", r.margins.max_friction_ratio}};
}

json analyze(const GaitFamily& f) {
  const BoundednessVerdict v = boundedness_check(f);
  double d_delta = 0.0, closure = 0.0, affinity = 0.0, periodicity = 0.0, rho = 0.0;
  double d_theta_plus = 0.0, d_theta_minus = 0.0, d_length = 0.0;
  bool monotone = true;
  const LimitCycleRecord& b = f.gaits.at(static_cast<std::size_t>(f.base_index));
  for (std::size_t p = 0; p < f.gaits.size(); ++p) {
    const LimitCycleRecord& g = f.gaits[p];
    d_delta = std::max(d_delta, std::abs(g.delta_sq - b.delta_sq));
    closure = std::max(closure, std::abs(g.zeta_star - g.predicted_zeta_star()) / g.zeta_star);
    affinity = std::max(affinity, g.affinity_residual);
    periodicity = std::max(periodicity, g.periodicity_error);
    rho = std::max(rho, g.spectral_radius);
    d_theta_plus = std::max(d_theta_plus, std::abs(g.theta_plus - b.theta_plus));
    d_theta_minus = std::max(d_theta_minus, std::abs(g.theta_minus - b.theta_minus));
    d_length = std::max(d_length, std::abs(g.step_length - b.step_length));
    if (p > 0 && !(g.speed > f.gaits[p - 1].speed)) monotone = false;
  }
  return {{"gaits", f.gaits.size()},
          {"speed_range", {f.gaits.front().speed, f.gaits.back().speed}},
          {"boundedness",
           {{"pass", v.pass},
            {"zeta_lb", v.zeta_lb},
            {"zeta_ub", v.zeta_ub},
            {"k", v.k},
            {"delta_sq", v.delta_sq},
            {"k_over_delta_sq", v.bound},
            {"margin", v.margin},
            {"offending", v.offending}}},
          {"max_delta_sq_deviation", d_delta},
          {"max_fixed_point_closure", closure},
          {"max_affinity_residual", affinity},
          {"max_periodicity_error", periodicity},
          {"max_spectral_radius", rho},
          {"max_theta_plus_deviation", d_theta_plus},
          {"max_theta_minus_deviation", d_theta_minus},
          {"max_step_length_deviation", d_length},
          {"speed_monotone", monotone}};
}

int resolve_node(const GaitFamily& f, int index, double speed, const char* what) {
  if (index >= 0) {
    if (index >= static_cast<int>(f.gaits.size())) {
      throw Error(ErrorCode::kInvalidArgument, std::string(what) + " index out of range");
    }
    return index;
  }
  if (speed > 0.0) return nearest_gait(f, speed);
  throw Error(ErrorCode::kInvalidArgument, std::string("give --") + what + " or --" + what + "-speed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limit-cycle gait continuum, switching analysis and speed supervisor"};
  app.require_subcommand(1);
  std::string config_path;
  std::string artifacts;
  app.add_option("-c,--config", config_path, "YAML config file")->envname("HZD_CONFIG");
  app.add_option("-o,--artifacts", artifacts, "Artifact directory (overrides the config)");

  auto* design = app.add_subcommand("design-base", "Design and certify the base gait");
  double target = 0.0;
  design->add_option("--target", target, "Target speed, m/s");

  auto* cont = app.add_subcommand("continuum", "Generate the speed-indexed gait family");
  double lo = 0.0, hi = 0.0, gap = 0.0;
  cont->add_option("--lo", lo, "Lowest speed, m/s");
  cont->add_option("--hi", hi, "Highest speed, m/s");
  cont->add_option("--gap", gap, "Largest speed gap, m/s");

  auto* an = app.add_subcommand("analyze", "Check boundedness and family invariants");

  auto* gr = app.add_subcommand("graph", "Build the feasible-switch graph");
  double eps = 0.0;
  unsigned workers = 0;
  gr->add_option("--epsilon", eps, "Radius of the zeta ball");
  gr->add_option("--workers", workers, "Threads (0: all cores)");

  auto* pl = app.add_subcommand("plan", "Least-dwell path between two gaits");
  int from = -1, to = -1;
  double from_speed = 0.0, to_speed = 0.0;
  pl->add_option("--from", from, "Source gait index");
  pl->add_option("--to", to, "Destination gait index");
  pl->add_option("--from-speed", from_speed, "Source: gait nearest this speed");
  pl->add_option("--to-speed", to_speed, "Destination: gait nearest this speed");

  auto* rn = app.add_subcommand("run", "Execute the speed schedule with the supervisor");
  double duration = 0.0;
  rn->add_option("--duration", duration, "Walking time, s");

  auto* ex = app.add_subcommand("export", "Write CSVs for plotting");
  int samples = 200;
  ex->add_option("--samples", samples, "Phase-plane points per orbit");

  CLI11_PARSE(app, argc, argv);

  try {
    AppConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    Paths paths{artifacts.empty() ? fs::path(cfg.artifacts) : fs::path(artifacts)};
    const Controller controller(BipedModel(cfg.model), cfg.controller);
    const ModelParams& mp = cfg.model;
    const auto t0 = std::chrono::steady_clock::now();
    json out;

    if (design->parsed()) {
      if (target > 0.0) cfg.design.target_speed = target;
      const BaseGait g = design_base_gait(controller, cfg.design);
      save_gait(paths.gait(), g, mp);
      out = {{"command", "design-base"}, {"file", paths.gait()}, {"gait", record_summary(g.record)},
             {"evaluations", g.design.evaluations}};
    } else if (cont->parsed()) {
      const BaseGait g = load_gait(paths.gait(), mp);
      ContinuumOptions opt = cfg.continuum;
      if (lo > 0.0) opt.speed_lo = lo;
      if (hi > 0.0) opt.speed_hi = hi;
      if (gap > 0.0) opt.max_gap = gap;
      const GaitFamily f = generate_continuum(g, controller, opt);
      save_family(paths.family(), f, mp);
      out = {{"command", "continuum"},
             {"file", paths.family()},
             {"gaits", f.gaits.size()},
             {"requested", {opt.speed_lo, opt.speed_hi}},
             {"speed_range", {f.gaits.front().speed, f.gaits.back().speed}},
             {"warnings", f.warnings}};
    } else if (an->parsed()) {
      const GaitFamily f = load_family(paths.family(), mp);
      out = analyze(f);
      std::ofstream file = open_out(paths.file("analysis.json"));
      file << out.dump(1) << '\n';
      out["command"] = "analyze";
    } else if (gr->parsed()) {
      const GaitFamily f = load_family(paths.family(), mp);
      FeasibilityOptions opt = cfg.graph;
      if (eps > 0.0) opt.epsilon = eps;
      const SwitchGraph g = build_graph(f, controller, opt, workers ? workers : cfg.workers);
      save_graph(paths.graph(), g, mp);
      const SccResult scc = strongly_connected(g);
      out = {{"command", "graph"},
             {"file", paths.graph()},
             {"nodes", g.size()},
             {"edges", g.edges.size()},
             {"rejected", g.rejected.size()},
             {"strongly_connected", scc.strongly_connected},
             {"components", scc.components.size()}};
    } else if (pl->parsed()) {
      const GaitFamily f = load_family(paths.family(), mp);
      const SwitchGraph g = load_graph(paths.graph(), mp);
      const int src = resolve_node(f, from, from_speed, "from");
      const int dst = resolve_node(f, to, to_speed, "to");
      const PlannedPath path = plan_path(g, src, dst);
      std::ofstream file = open_out(paths.file("path.csv"));
      write_path_csv(file, g, path);
      out = {{"command", "plan"}, {"path", path.nodes}, {"steps", path.steps},
             {"file", paths.file("path.csv")}};
    } else if (rn->parsed()) {
      const GaitFamily f = load_family(paths.family(), mp);
      const SwitchGraph g = load_graph(paths.graph(), mp);
      SupervisorOptions opt = cfg.supervisor;
      if (duration > 0.0) opt.duration = duration;
      const SupervisorRun r = supervise(cfg.schedule, f, g, controller, opt);
      std::ofstream traj = open_out(paths.file("trajectory.csv"));
      write_trajectory_csv(traj, r.steps);
      std::ofstream steps = open_out(paths.file("steps.csv"));
      write_steps_csv(steps, r);
      std::ofstream sw = open_out(paths.file("switches.csv"));
      write_switches_csv(sw, r);
      out = {{"command", "run"},
             {"steps", r.log.size()},
             {"switches", r.switches.size()},
             {"final_gait", r.state.current},
             {"final_speed", r.log.empty() ? 0.0 : r.log.back().speed},
             {"max_torque", r.constraints.max_torque},
             {"min_normal", r.constraints.min_normal},
             {"max_friction_ratio", r.constraints.max_friction_ratio},
             {"files", {paths.file("trajectory.csv"), paths.file("steps.csv"), paths.file("switches.csv")}}};
    } else if (ex->parsed()) {
      const GaitFamily f = load_family(paths.family(), mp);
      std::ofstream c = open_out(paths.file("continuum.csv"));
      write_continuum_csv(c, f, controller, samples);
      std::ofstream fam = open_out(paths.file("family.csv"));
      write_family_csv(fam, f);
      json files = {paths.file("continuum.csv"), paths.file("family.csv")};
      if (fs::exists(paths.graph())) {
        const SwitchGraph g = load_graph(paths.graph(), mp);
        std::ofstream e = open_out(paths.file("edges.csv"));
        write_edges_csv(e, g);
        files.push_back(paths.file("edges.csv"));
      }
      out = {{"command", "export"}, {"files", files}};
    }
    out["seconds"] = seconds_since(t0);
    std::cout << out.dump() << std::endl;
    return 0;
  } catch (const Error& e) {
    std::cerr << json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}}.dump()
              << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
}
