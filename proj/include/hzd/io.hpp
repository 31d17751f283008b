#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hzd/supervisor.hpp"

namespace hzd {

/// Stable FNV-1a hash of the model parameters, stored with every artifact.
std::string model_hash(const ModelParams& params);

// JSON artifacts. Loaders throw Error(kMissingArtifact) naming the command
// that produces the file when it does not exist, Error(kConfig) when it is
// malformed or was produced for a different model.
void save_gait(const std::string& path, const BaseGait& gait, const ModelParams& params);
BaseGait load_gait(const std::string& path, const ModelParams& params);

void save_family(const std::string& path, const GaitFamily& family, const ModelParams& params);
GaitFamily load_family(const std::string& path, const ModelParams& params);

void save_graph(const std::string& path, const SwitchGraph& graph, const ModelParams& params);
SwitchGraph load_graph(const std::string& path, const ModelParams& params);

std::string gait_to_json(const GaitParams& gait);
GaitParams gait_from_json(const std::string& text);

// CSV exports.
inline constexpr const char* kContinuumHeader = "gait,speed,theta,zeta";
inline constexpr const char* kEdgeHeader =
    "from,to,speed_from,speed_to,weight,measured_steps,max_torque,min_normal,max_friction_ratio";
inline constexpr const char* kPathHeader = "order,node,speed,zeta_star,cumulative_steps";
inline constexpr const char* kStepHeader =
    "step,t_start,t_end,gait,speed,v_des,zeta,zeta_target,in_ball";
inline constexpr const char* kSwitchHeader = "step,time,from,to,zeta,zeta_target,v_des";
inline constexpr const char* kFamilyHeader =
    "gait,v_des,speed,zeta_star,delta_sq,v_minus,k,period,step_length,spectral_radius,"
    "max_torque,min_normal,max_friction_ratio";

/// Phase-plane projection (theta, zeta) of every orbit in the family, with
/// `samples` points per orbit.
void write_continuum_csv(std::ostream& out, const GaitFamily& family, const Controller& controller,
                         int samples = 200);
void write_family_csv(std::ostream& out, const GaitFamily& family);
void write_edges_csv(std::ostream& out, const SwitchGraph& graph);
void write_path_csv(std::ostream& out, const SwitchGraph& graph, const PlannedPath& path);
void write_steps_csv(std::ostream& out, const SupervisorRun& run);
void write_switches_csv(std::ostream& out, const SupervisorRun& run);

}  // namespace hzd
