#include "hzd/io.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace hzd {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

template <typename Derived>
json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j.at(i).size()) != cols) {
      throw Error(ErrorCode::kConfig, "ragged matrix in artifact");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

template <int N>
json vec_to_json(const Eigen::Matrix<double, N, 1>& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

template <int N>
Eigen::Matrix<double, N, 1> vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != static_cast<std::size_t>(N)) {
    throw Error(ErrorCode::kConfig, "vector of wrong length in artifact");
  }
  return Eigen::Map<const Eigen::Matrix<double, N, 1>>(v.data());
}

json outputs_to_json(const BezierOutputs& b) {
  return {{"theta_plus", b.theta_plus},
          {"theta_minus", b.theta_minus},
          {"degree", b.degree()},
          {"coeffs", matrix_to_json(b.coeffs)}};
}

BezierOutputs outputs_from_json(const json& j) {
  BezierOutputs b;
  b.theta_plus = j.at("theta_plus").get<double>();
  b.theta_minus = j.at("theta_minus").get<double>();
  b.coeffs = matrix_from_json(j.at("coeffs"));
  if (b.coeffs.rows() != 4 || b.coeffs.cols() < 2) {
    throw Error(ErrorCode::kConfig, "Bezier coefficients must be 4 x (degree + 1)");
  }
  return b;
}

json bump_to_json(const BumpPolynomial& b) {
  return {{"theta_plus", b.theta_plus},
          {"theta_switch", b.theta_switch},
          {"coeffs", vec_to_json<6>(b.coeffs)}};
}

BumpPolynomial bump_from_json(const json& j) {
  BumpPolynomial b;
  b.theta_plus = j.at("theta_plus").get<double>();
  b.theta_switch = j.at("theta_switch").get<double>();
  b.coeffs = vec_from_json<6>(j.at("coeffs"));
  return b;
}

json state_to_json(const State& x) { return {{"q", vec_to_json<5>(x.q)}, {"dq", vec_to_json<5>(x.dq)}}; }

State state_from_json(const json& j) {
  return State{vec_from_json<5>(j.at("q")), vec_from_json<5>(j.at("dq"))};
}

json record_to_json(const LimitCycleRecord& r) {
  return {{"index", r.index},
          {"v_des", r.v_des},
          {"beta", vec_to_json<4>(r.beta)},
          {"x_star", state_to_json(r.x_star)},
          {"zeta_star", r.zeta_star},
          {"delta_sq", r.delta_sq},
          {"v_minus", r.v_minus},
          {"k", r.k},
          {"speed", r.speed},
          {"period", r.period},
          {"step_length", r.step_length},
          {"theta_plus", r.theta_plus},
          {"theta_minus", r.theta_minus},
          {"spectral_radius", r.spectral_radius},
          {"periodicity_error", r.periodicity_error},
          {"affinity_residual", r.affinity_residual},
          {"max_output_norm", r.max_output_norm},
          {"newton_iterations", r.newton_iterations},
          {"margins",
           {{"max_torque", r.margins.max_torque},
            {"torque_headroom", r.margins.torque_headroom},
            {"min_normal", r.margins.min_normal},
            {"max_friction_ratio", r.margins.max_friction_ratio}}}};
}

LimitCycleRecord record_from_json(const json& j) {
  LimitCycleRecord r;
  r.index = j.at("index").get<int>();
  r.v_des = j.at("v_des").get<double>();
  r.beta = vec_from_json<4>(j.at("beta"));
  r.x_star = state_from_json(j.at("x_star"));
  r.zeta_star = j.at("zeta_star").get<double>();
  r.delta_sq = j.at("delta_sq").get<double>();
  r.v_minus = j.at("v_minus").get<double>();
  r.k = j.at("k").get<double>();
  r.speed = j.at("speed").get<double>();
  r.period = j.at("period").get<double>();
  r.step_length = j.at("step_length").get<double>();
  r.theta_plus = j.at("theta_plus").get<double>();
  r.theta_minus = j.at("theta_minus").get<double>();
  r.spectral_radius = j.at("spectral_radius").get<double>();
  r.periodicity_error = j.at("periodicity_error").get<double>();
  r.affinity_residual = j.at("affinity_residual").get<double>();
  r.max_output_norm = j.at("max_output_norm").get<double>();
  r.newton_iterations = j.at("newton_iterations").get<int>();
  const json& m = j.at("margins");
  r.margins.max_torque = m.at("max_torque").get<double>();
  r.margins.torque_headroom = m.at("torque_headroom").get<double>();
  r.margins.min_normal = m.at("min_normal").get<double>();
  r.margins.max_friction_ratio = m.at("max_friction_ratio").get<double>();
  return r;
}

json edge_to_json(const EdgeRecord& e) {
  json j = {{"from", e.from},
            {"to", e.to},
            {"weight", e.weight},
            {"measured_steps", e.measured_steps},
            {"max_torque", e.constraints.max_torque},
            {"min_normal", e.constraints.min_normal},
            {"max_friction_ratio", e.constraints.max_friction_ratio},
            {"max_output_norm", e.max_output_norm}};
  if (!e.feasible) j["reason"] = e.reason;
  return j;
}

EdgeRecord edge_from_json(const json& j, bool feasible) {
  EdgeRecord e;
  e.from = j.at("from").get<int>();
  e.to = j.at("to").get<int>();
  e.weight = j.at("weight").get<int>();
  e.measured_steps = j.at("measured_steps").get<int>();
  e.constraints.max_torque = j.at("max_torque").get<double>();
  // Infinity (no sample) is stored as null.
  e.constraints.min_normal = j.at("min_normal").is_null()
                                 ? std::numeric_limits<double>::infinity()
                                 : j.at("min_normal").get<double>();
  e.constraints.max_friction_ratio = j.at("max_friction_ratio").is_null()
                                         ? std::numeric_limits<double>::infinity()
                                         : j.at("max_friction_ratio").get<double>();
  e.max_output_norm = j.at("max_output_norm").get<double>();
  e.feasible = feasible;
  if (!feasible) e.reason = j.value("reason", "");
  return e;
}

void write_file(const std::string& path, const json& j) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path);
  out << std::setw(1) << j << '\n';
}

json read_file(const std::string& path, const char* kind, const char* producer,
               const ModelParams& params) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kMissingArtifact,
                std::string("missing ") + path + "; run `" + producer + "` first");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
  if (j.value("kind", "") != kind) {
    throw Error(ErrorCode::kConfig, path + " is not a " + kind + " file");
  }
  if (j.value("model_hash", "") != model_hash(params)) {
    throw Error(ErrorCode::kConfig, path + " was produced for different model parameters; rerun `" +
                                        producer + "`");
  }
  return j;
}

template <typename F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }
}

}  // namespace

std::string model_hash(const ModelParams& p) {
  std::ostringstream s;
  s << std::setprecision(17);
  for (const LinkParams* l : {&p.torso, &p.femur, &p.shank}) {
    s << l->mass << ',' << l->length << ',' << l->com << ',' << l->inertia << ';';
  }
  s << p.gravity << ',' << p.torque_limit << ',' << p.friction_limit << ',' << p.min_normal_force;
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_gait(const std::string& path, const BaseGait& gait, const ModelParams& params) {
  const BaseDesignResult& d = gait.design;
  const ReducedGaitSummary& s = d.summary;
  json j = {{"kind", "base_gait"},
            {"version", kFormatVersion},
            {"model_hash", model_hash(params)},
            {"outputs", outputs_to_json(d.outputs)},
            {"bump", bump_to_json(build_bump(d.outputs.theta_plus, d.outputs.theta_minus))},
            {"posture",
             {{"theta_minus", d.posture.theta_minus},
              {"stance_knee", d.posture.stance_knee},
              {"swing_knee", d.posture.swing_knee},
              {"torso", d.posture.torso}}},
            {"offsets", matrix_to_json(d.offsets)},
            {"design_cost", d.cost},
            {"design_evaluations", d.evaluations},
            {"reduced",
             {{"delta_sq", s.delta_sq},
              {"v_minus", s.v_minus},
              {"k", s.k},
              {"zeta_star", s.zeta_star},
              {"period", s.period},
              {"speed", s.speed}}},
            {"record", record_to_json(gait.record)},
            {"jacobian", matrix_to_json(gait.jacobian)},
            {"sensitivity", vec_to_json<4>(gait.sensitivity)}};
  write_file(path, j);
}

BaseGait load_gait(const std::string& path, const ModelParams& params) {
  const json j = read_file(path, "base_gait", "design-base", params);
  return guarded(path, [&] {
    BaseGait g;
    g.design.outputs = outputs_from_json(j.at("outputs"));
    const json& p = j.at("posture");
    g.design.posture.theta_minus = p.at("theta_minus").get<double>();
    g.design.posture.stance_knee = p.at("stance_knee").get<double>();
    g.design.posture.swing_knee = p.at("swing_knee").get<double>();
    g.design.posture.torso = p.at("torso").get<double>();
    g.design.offsets = matrix_from_json(j.at("offsets"));
    g.design.cost = j.at("design_cost").get<double>();
    g.design.evaluations = j.at("design_evaluations").get<int>();
    const json& s = j.at("reduced");
    g.design.summary.delta_sq = s.at("delta_sq").get<double>();
    g.design.summary.v_minus = s.at("v_minus").get<double>();
    g.design.summary.k = s.at("k").get<double>();
    g.design.summary.zeta_star = s.at("zeta_star").get<double>();
    g.design.summary.period = s.at("period").get<double>();
    g.design.summary.speed = s.at("speed").get<double>();
    g.design.summary.exists = true;
    g.record = record_from_json(j.at("record"));
    g.jacobian = matrix_from_json(j.at("jacobian"));
    g.sensitivity = vec_from_json<4>(j.at("sensitivity"));
    return g;
  });
}

void save_family(const std::string& path, const GaitFamily& family, const ModelParams& params) {
  const NewtonOptions newton;
  const CertifyOptions cert;
  const SimOptions sim;
  json gaits = json::array();
  for (const auto& g : family.gaits) gaits.push_back(record_to_json(g));
  json j = {{"kind", "gait_family"},
            {"version", kFormatVersion},
            {"model_hash", model_hash(params)},
            {"provenance",
             {{"newton_tolerance", newton.tolerance},
              {"periodicity_tolerance", cert.periodicity_tol},
              {"closure_tolerance", cert.closure_tol},
              {"affinity_tolerance", cert.affinity_tol},
              {"integrator_abs_tol", sim.abs_tol},
              {"integrator_rel_tol", sim.rel_tol},
              {"event_tolerance", sim.event_tol}}},
            {"outputs", outputs_to_json(family.base)},
            {"bump", bump_to_json(family.bump)},
            {"sensitivity", vec_to_json<4>(family.sensitivity)},
            {"base_speed", family.base_speed},
            {"max_gap", family.max_gap},
            {"base_index", family.base_index},
            {"speed_range", {family.gaits.front().speed, family.gaits.back().speed}},
            {"warnings", family.warnings},
            {"gaits", gaits}};
  write_file(path, j);
}

GaitFamily load_family(const std::string& path, const ModelParams& params) {
  const json j = read_file(path, "gait_family", "continuum", params);
  return guarded(path, [&] {
    GaitFamily f;
    f.base = outputs_from_json(j.at("outputs"));
    f.bump = bump_from_json(j.at("bump"));
    f.sensitivity = vec_from_json<4>(j.at("sensitivity"));
    f.base_speed = j.at("base_speed").get<double>();
    f.max_gap = j.at("max_gap").get<double>();
    f.base_index = j.at("base_index").get<int>();
    f.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const json& g : j.at("gaits")) f.gaits.push_back(record_from_json(g));
    if (f.gaits.empty()) throw Error(ErrorCode::kConfig, path + ": family has no gaits");
    return f;
  });
}

void save_graph(const std::string& path, const SwitchGraph& graph, const ModelParams& params) {
  json nodes = json::array();
  for (const auto& n : graph.nodes) {
    nodes.push_back({{"index", n.index}, {"speed", n.speed}, {"zeta_star", n.zeta_star}});
  }
  json edges = json::array();
  for (const auto& e : graph.edges) edges.push_back(edge_to_json(e));
  json rejected = json::array();
  for (const auto& e : graph.rejected) rejected.push_back(edge_to_json(e));
  const SccResult scc = strongly_connected(graph);
  json j = {{"kind", "switch_graph"},
            {"version", kFormatVersion},
            {"model_hash", model_hash(params)},
            {"epsilon", graph.epsilon},
            {"limits",
             {{"torque", graph.torque_limit},
              {"friction", graph.friction_limit},
              {"min_normal_force", graph.min_normal_force}}},
            {"strongly_connected", scc.strongly_connected},
            {"components", scc.components},
            {"nodes", nodes},
            {"edges", edges},
            {"rejected", rejected}};
  write_file(path, j);
}

SwitchGraph load_graph(const std::string& path, const ModelParams& params) {
  const json j = read_file(path, "switch_graph", "graph", params);
  return guarded(path, [&] {
    SwitchGraph g;
    g.epsilon = j.at("epsilon").get<double>();
    const json& l = j.at("limits");
    g.torque_limit = l.at("torque").get<double>();
    g.friction_limit = l.at("friction").get<double>();
    g.min_normal_force = l.at("min_normal_force").get<double>();
    for (const json& n : j.at("nodes")) {
      g.nodes.push_back(
          {n.at("index").get<int>(), n.at("speed").get<double>(), n.at("zeta_star").get<double>()});
    }
    for (const json& e : j.at("edges")) g.edges.push_back(edge_from_json(e, true));
    for (const json& e : j.at("rejected")) g.rejected.push_back(edge_from_json(e, false));
    return g;
  });
}

std::string gait_to_json(const GaitParams& gait) {
  const json j = {{"outputs", outputs_to_json(gait.base)},
                  {"bump", bump_to_json(gait.bump)},
                  {"beta", vec_to_json<4>(gait.beta)}};
  return j.dump();
}

GaitParams gait_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    GaitParams g;
    g.base = outputs_from_json(j.at("outputs"));
    g.bump = bump_from_json(j.at("bump"));
    g.beta = vec_from_json<4>(j.at("beta"));
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("gait JSON: ") + e.what());
  }
}

void write_continuum_csv(std::ostream& out, const GaitFamily& family, const Controller& controller,
                         int samples) {
  out << kContinuumHeader << '\n' << std::setprecision(12);
  for (std::size_t p = 0; p < family.gaits.size(); ++p) {
    const LimitCycleRecord& g = family.gaits[p];
    const StepResult r = step_from_surface(g.x_star, family.params(p), controller);
    const std::size_t n = r.samples.size();
    const std::size_t stride = std::max<std::size_t>(1, n / static_cast<std::size_t>(samples));
    for (std::size_t i = 0; i < n; i += stride) {
      out << p << ',' << g.speed << ',' << r.samples[i].theta << ',' << r.samples[i].zeta << '\n';
    }
    if ((n - 1) % stride != 0) {
      out << p << ',' << g.speed << ',' << r.samples.back().theta << ',' << r.samples.back().zeta
          << '\n';
    }
  }
}

void write_family_csv(std::ostream& out, const GaitFamily& family) {
  out << kFamilyHeader << '\n' << std::setprecision(12);
  for (const auto& g : family.gaits) {
    out << g.index << ',' << g.v_des << ',' << g.speed << ',' << g.zeta_star << ',' << g.delta_sq
        << ',' << g.v_minus << ',' << g.k << ',' << g.period << ',' << g.step_length << ','
        << g.spectral_radius << ',' << g.margins.max_torque << ',' << g.margins.min_normal << ','
        << g.margins.max_friction_ratio << '\n';
  }
}

void write_edges_csv(std::ostream& out, const SwitchGraph& graph) {
  out << kEdgeHeader << '\n' << std::setprecision(12);
  for (const auto& e : graph.edges) {
    out << e.from << ',' << e.to << ',' << graph.nodes.at(static_cast<std::size_t>(e.from)).speed
        << ',' << graph.nodes.at(static_cast<std::size_t>(e.to)).speed << ',' << e.weight << ','
        << e.measured_steps << ',' << e.constraints.max_torque << ',' << e.constraints.min_normal
        << ',' << e.constraints.max_friction_ratio << '\n';
  }
}

void write_path_csv(std::ostream& out, const SwitchGraph& graph, const PlannedPath& path) {
  out << kPathHeader << '\n' << std::setprecision(12);
  int cumulative = 0;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    const int v = path.nodes[i];
    if (i > 0) cumulative += graph.edge(path.nodes[i - 1], v)->weight;
    const GraphNode& n = graph.nodes.at(static_cast<std::size_t>(v));
    out << i << ',' << v << ',' << n.speed << ',' << n.zeta_star << ',' << cumulative << '\n';
  }
}

void write_steps_csv(std::ostream& out, const SupervisorRun& run) {
  out << kStepHeader << '\n' << std::setprecision(12);
  for (const StepLog& s : run.log) {
    out << s.step << ',' << s.t_start << ',' << s.t_end << ',' << s.gait << ',' << s.speed << ','
        << s.v_des << ',' << s.zeta << ',' << s.zeta_target << ',' << (s.in_ball ? 1 : 0) << '\n';
  }
}

void write_switches_csv(std::ostream& out, const SupervisorRun& run) {
  out << kSwitchHeader << '\n' << std::setprecision(12);
  for (const SwitchEvent& s : run.switches) {
    out << s.step << ',' << s.time << ',' << s.from << ',' << s.to << ',' << s.zeta << ','
        << s.zeta_target << ',' << s.v_des << '\n';
  }
}

}  // namespace hzd
