#pragma once

#include <string>

#include "hzd/supervisor.hpp"

namespace hzd {

/// Everything the command-line pipeline reads from the YAML config file.
struct AppConfig {
  ModelParams model;
  ControllerConfig controller;
  SimOptions sim;
  BaseDesignConfig design;
  ContinuumOptions continuum;
  FeasibilityOptions graph;
  unsigned workers = 0;  // 0: hardware concurrency
  SupervisorOptions supervisor;
  SpeedSchedule schedule;
  std::string artifacts = "artifacts";  // directory, relative to the working directory
};

/// Built-in defaults (the same values as config/default.yaml).
AppConfig default_config();

/// Reads a YAML file over the defaults. Unknown keys and invalid values
/// throw Error(kConfig).
AppConfig load_config(const std::string& path);
AppConfig parse_config(const std::string& yaml_text);

}  // namespace hzd
