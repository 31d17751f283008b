#include "hzd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace hzd {

namespace {

void check_keys(const YAML::Node& node, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw Error(ErrorCode::kConfig, "config: '" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw Error(ErrorCode::kConfig, "config: unknown key '" + where + "." + key + "'");
    }
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::kConfig, "config: bad value for '" + where + "." + key + "'");
  }
}

void read_link(const YAML::Node& n, LinkParams& link, const std::string& where) {
  check_keys(n, where, {"mass", "length", "com", "inertia"});
  read(n, "mass", link.mass, where);
  read(n, "length", link.length, where);
  read(n, "com", link.com, where);
  read(n, "inertia", link.inertia, where);
}

void read_model(const YAML::Node& n, ModelParams& m) {
  check_keys(n, "model",
             {"torso", "femur", "shank", "gravity", "torque_limit", "friction_limit",
              "min_normal_force"});
  if (n["torso"]) read_link(n["torso"], m.torso, "model.torso");
  if (n["femur"]) read_link(n["femur"], m.femur, "model.femur");
  if (n["shank"]) read_link(n["shank"], m.shank, "model.shank");
  read(n, "gravity", m.gravity, "model");
  read(n, "torque_limit", m.torque_limit, "model");
  read(n, "friction_limit", m.friction_limit, "model");
  read(n, "min_normal_force", m.min_normal_force, "model");
}

void read_controller(const YAML::Node& n, ControllerConfig& c) {
  check_keys(n, "controller", {"mode", "kp", "kd", "epsilon", "relaxation_penalty", "clf_rate"});
  if (n["mode"]) {
    const auto mode = n["mode"].as<std::string>();
    if (mode == "pd") {
      c.mode = ControlMode::kPd;
    } else if (mode == "clf_qp") {
      c.mode = ControlMode::kClfQp;
    } else {
      throw Error(ErrorCode::kConfig, "config: controller.mode must be 'pd' or 'clf_qp'");
    }
  }
  read(n, "kp", c.kp, "controller");
  read(n, "kd", c.kd, "controller");
  read(n, "epsilon", c.epsilon, "controller");
  read(n, "relaxation_penalty", c.relaxation_penalty, "controller");
  read(n, "clf_rate", c.clf_rate, "controller");
}

void read_sim(const YAML::Node& n, SimOptions& s) {
  check_keys(n, "simulation", {"abs_tol", "rel_tol", "event_tol", "max_step_time"});
  read(n, "abs_tol", s.abs_tol, "simulation");
  read(n, "rel_tol", s.rel_tol, "simulation");
  read(n, "event_tol", s.event_tol, "simulation");
  read(n, "max_step_time", s.max_step_time, "simulation");
  if (!(s.abs_tol > 0.0 && s.rel_tol > 0.0 && s.event_tol > 0.0 && s.max_step_time > 0.0)) {
    throw Error(ErrorCode::kConfig, "config: simulation tolerances must be positive");
  }
}

void read_design(const YAML::Node& n, BaseDesignConfig& d) {
  check_keys(n, "design",
             {"target_speed", "speed_tolerance", "degree", "grid", "torque_fraction",
              "normal_factor", "friction_fraction", "domain_factor", "clearance",
              "max_evaluations", "restarts", "speed_range", "range_evaluations"});
  read(n, "target_speed", d.target_speed, "design");
  read(n, "speed_tolerance", d.speed_tolerance, "design");
  read(n, "degree", d.degree, "design");
  read(n, "grid", d.grid, "design");
  read(n, "torque_fraction", d.torque_fraction, "design");
  read(n, "normal_factor", d.normal_factor, "design");
  read(n, "friction_fraction", d.friction_fraction, "design");
  read(n, "domain_factor", d.domain_factor, "design");
  read(n, "clearance", d.clearance, "design");
  read(n, "max_evaluations", d.max_evaluations, "design");
  read(n, "restarts", d.restarts, "design");
  read(n, "speed_range", d.speed_range, "design");
  read(n, "range_evaluations", d.range_evaluations, "design");
  if (!(d.target_speed > 0.0) || d.degree < 3) {
    throw Error(ErrorCode::kConfig, "config: design.target_speed must be positive, degree >= 3");
  }
}

void read_continuum(const YAML::Node& n, ContinuumOptions& c) {
  check_keys(n, "continuum", {"speed_lo", "speed_hi", "max_gap", "max_gaits"});
  read(n, "speed_lo", c.speed_lo, "continuum");
  read(n, "speed_hi", c.speed_hi, "continuum");
  read(n, "max_gap", c.max_gap, "continuum");
  read(n, "max_gaits", c.max_gaits, "continuum");
}

void read_graph(const YAML::Node& n, AppConfig& cfg) {
  check_keys(n, "graph", {"epsilon", "workers"});
  read(n, "epsilon", cfg.graph.epsilon, "graph");
  read(n, "workers", cfg.workers, "graph");
  if (!(cfg.graph.epsilon > 0.0)) throw Error(ErrorCode::kConfig, "config: graph.epsilon must be positive");
}

void read_supervisor(const YAML::Node& n, AppConfig& cfg) {
  check_keys(n, "supervisor", {"epsilon", "duration", "schedule"});
  read(n, "epsilon", cfg.supervisor.epsilon, "supervisor");
  read(n, "duration", cfg.supervisor.duration, "supervisor");
  if (n["schedule"]) {
    if (!n["schedule"].IsSequence()) {
      throw Error(ErrorCode::kConfig, "config: supervisor.schedule must be a list");
    }
    cfg.schedule.entries.clear();
    for (const auto& e : n["schedule"]) {
      check_keys(e, "supervisor.schedule[]", {"time", "speed"});
      ScheduleEntry s;
      read(e, "time", s.time, "supervisor.schedule[]");
      read(e, "speed", s.speed, "supervisor.schedule[]");
      cfg.schedule.entries.push_back(s);
    }
  }
}

}  // namespace

AppConfig default_config() {
  AppConfig cfg;
  cfg.continuum.speed_lo = 0.6375;
  cfg.continuum.speed_hi = 0.8625;
  cfg.continuum.max_gap = 0.01;
  cfg.supervisor.duration = 100.0;
  cfg.schedule.entries = {{0.0, 0.86}, {20.0, 0.64}, {65.0, 0.86}};
  return cfg;
}

AppConfig parse_config(const std::string& yaml_text) {
  AppConfig cfg = default_config();
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
  if (root.IsNull()) return cfg;
  check_keys(root, "",
             {"model", "controller", "simulation", "design", "continuum", "graph", "supervisor",
              "artifacts"});
  if (root["model"]) read_model(root["model"], cfg.model);
  if (root["controller"]) read_controller(root["controller"], cfg.controller);
  if (root["simulation"]) read_sim(root["simulation"], cfg.sim);
  if (root["design"]) read_design(root["design"], cfg.design);
  if (root["continuum"]) read_continuum(root["continuum"], cfg.continuum);
  if (root["graph"]) read_graph(root["graph"], cfg);
  if (root["supervisor"]) read_supervisor(root["supervisor"], cfg);
  read(root, "artifacts", cfg.artifacts, "");
  cfg.model.validate();
  cfg.controller.validate();
  cfg.graph.sim = cfg.sim;
  cfg.supervisor.sim = cfg.sim;
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace hzd
