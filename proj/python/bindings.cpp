#include <fstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hzd/config.hpp"
#include "hzd/io.hpp"

namespace py = pybind11;
using namespace hzd;

namespace {

template <typename F>
void write_file(const std::string& path, F&& write) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path);
  write(out);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Limit-cycle gait continuum, switching analysis and speed supervisor";

  static py::exception<Error> error(m, "HzdError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("gravity", &ModelParams::gravity)
      .def_readwrite("torque_limit", &ModelParams::torque_limit)
      .def_readwrite("friction_limit", &ModelParams::friction_limit)
      .def_readwrite("min_normal_force", &ModelParams::min_normal_force)
      .def("hash", [](const ModelParams& p) { return model_hash(p); });

  py::enum_<ControlMode>(m, "ControlMode")
      .value("PD", ControlMode::kPd)
      .value("CLF_QP", ControlMode::kClfQp);

  py::class_<ControllerConfig>(m, "ControllerConfig")
      .def(py::init<>())
      .def_readwrite("mode", &ControllerConfig::mode)
      .def_readwrite("kp", &ControllerConfig::kp)
      .def_readwrite("kd", &ControllerConfig::kd)
      .def_readwrite("epsilon", &ControllerConfig::epsilon);

  py::class_<Controller>(m, "Controller")
      .def(py::init([](const ModelParams& mp, const ControllerConfig& cfg) {
             return Controller(BipedModel(mp), cfg);
           }),
           py::arg("model") = ModelParams{}, py::arg("config") = ControllerConfig{});

  py::class_<State>(m, "State")
      .def(py::init<>())
      .def_readwrite("q", &State::q)
      .def_readwrite("dq", &State::dq);

  py::class_<BezierOutputs>(m, "BezierOutputs")
      .def(py::init([](double theta_plus, double theta_minus, const Eigen::MatrixXd& coeffs) {
             if (coeffs.rows() != 4) throw Error(ErrorCode::kInvalidArgument, "coeffs must have 4 rows");
             BezierOutputs b;
             b.theta_plus = theta_plus;
             b.theta_minus = theta_minus;
             b.coeffs = coeffs;
             return b;
           }),
           py::arg("theta_plus"), py::arg("theta_minus"), py::arg("coeffs"))
      .def_readonly("theta_plus", &BezierOutputs::theta_plus)
      .def_readonly("theta_minus", &BezierOutputs::theta_minus)
      .def_property_readonly("coeffs", [](const BezierOutputs& b) { return Eigen::MatrixXd(b.coeffs); });

  py::class_<GaitParams>(m, "GaitParams")
      .def_static("from_base", [](const BezierOutputs& b) { return GaitParams::from_base(b); })
      .def("with_beta", &GaitParams::with_beta)
      .def_readonly("beta", &GaitParams::beta)
      .def("to_json", [](const GaitParams& g) { return gait_to_json(g); })
      .def_static("from_json", &gait_from_json);

  py::class_<ConstraintMargins>(m, "ConstraintMargins")
      .def_readonly("max_torque", &ConstraintMargins::max_torque)
      .def_readonly("min_normal", &ConstraintMargins::min_normal)
      .def_readonly("max_friction_ratio", &ConstraintMargins::max_friction_ratio);

  py::class_<LimitCycleRecord>(m, "LimitCycleRecord")
      .def_readonly("index", &LimitCycleRecord::index)
      .def_readonly("v_des", &LimitCycleRecord::v_des)
      .def_readonly("beta", &LimitCycleRecord::beta)
      .def_readonly("x_star", &LimitCycleRecord::x_star)
      .def_readonly("zeta_star", &LimitCycleRecord::zeta_star)
      .def_readonly("delta_sq", &LimitCycleRecord::delta_sq)
      .def_readonly("v_minus", &LimitCycleRecord::v_minus)
      .def_readonly("k", &LimitCycleRecord::k)
      .def_readonly("speed", &LimitCycleRecord::speed)
      .def_readonly("period", &LimitCycleRecord::period)
      .def_readonly("step_length", &LimitCycleRecord::step_length)
      .def_readonly("theta_plus", &LimitCycleRecord::theta_plus)
      .def_readonly("theta_minus", &LimitCycleRecord::theta_minus)
      .def_readonly("spectral_radius", &LimitCycleRecord::spectral_radius)
      .def_readonly("periodicity_error", &LimitCycleRecord::periodicity_error)
      .def_readonly("affinity_residual", &LimitCycleRecord::affinity_residual)
      .def_readonly("margins", &LimitCycleRecord::margins)
      .def("predicted_zeta_star", &LimitCycleRecord::predicted_zeta_star);

  py::class_<BaseGait>(m, "BaseGait")
      .def_readonly("record", &BaseGait::record)
      .def_readonly("sensitivity", &BaseGait::sensitivity)
      .def_property_readonly("outputs", [](const BaseGait& g) { return g.design.outputs; });

  py::class_<GaitFamily>(m, "GaitFamily")
      .def_readonly("gaits", &GaitFamily::gaits)
      .def_readonly("base_index", &GaitFamily::base_index)
      .def_readonly("base_speed", &GaitFamily::base_speed)
      .def_readonly("warnings", &GaitFamily::warnings)
      .def("zeta_lb", &GaitFamily::zeta_lb)
      .def("zeta_ub", &GaitFamily::zeta_ub)
      .def("k_max", &GaitFamily::k_max)
      .def("params", &GaitFamily::params)
      .def("__len__", [](const GaitFamily& f) { return f.gaits.size(); });

  py::class_<BoundednessVerdict>(m, "BoundednessVerdict")
      .def_readonly("passed", &BoundednessVerdict::pass)
      .def_readonly("zeta_lb", &BoundednessVerdict::zeta_lb)
      .def_readonly("zeta_ub", &BoundednessVerdict::zeta_ub)
      .def_readonly("k", &BoundednessVerdict::k)
      .def_readonly("delta_sq", &BoundednessVerdict::delta_sq)
      .def_readonly("bound", &BoundednessVerdict::bound)
      .def_readonly("margin", &BoundednessVerdict::margin)
      .def_readonly("offending", &BoundednessVerdict::offending);

  py::class_<EdgeRecord>(m, "EdgeRecord")
      .def_readonly("source", &EdgeRecord::from)
      .def_readonly("target", &EdgeRecord::to)
      .def_readonly("feasible", &EdgeRecord::feasible)
      .def_readonly("weight", &EdgeRecord::weight)
      .def_readonly("measured_steps", &EdgeRecord::measured_steps)
      .def_readonly("zeta", &EdgeRecord::zeta)
      .def_readonly("reason", &EdgeRecord::reason);

  py::class_<SwitchGraph>(m, "SwitchGraph")
      .def_readonly("edges", &SwitchGraph::edges)
      .def_readonly("rejected", &SwitchGraph::rejected)
      .def_readonly("epsilon", &SwitchGraph::epsilon)
      .def("size", &SwitchGraph::size)
      .def("adjacency", &SwitchGraph::adjacency);

  py::class_<SccResult>(m, "SccResult")
      .def_readonly("component", &SccResult::component)
      .def_readonly("components", &SccResult::components)
      .def_readonly("strongly_connected", &SccResult::strongly_connected);

  py::class_<PlannedPath>(m, "PlannedPath")
      .def_readonly("nodes", &PlannedPath::nodes)
      .def_readonly("steps", &PlannedPath::steps);

  py::class_<ScheduleEntry>(m, "ScheduleEntry")
      .def(py::init([](double t, double v) { return ScheduleEntry{t, v}; }), py::arg("time"),
           py::arg("speed"))
      .def_readonly("time", &ScheduleEntry::time)
      .def_readonly("speed", &ScheduleEntry::speed);

  py::class_<SupervisorOptions>(m, "SupervisorOptions")
      .def(py::init<>())
      .def_readwrite("epsilon", &SupervisorOptions::epsilon)
      .def_readwrite("duration", &SupervisorOptions::duration)
      .def_readwrite("record_trajectory", &SupervisorOptions::record_trajectory);

  py::class_<StepLog>(m, "StepLog")
      .def_readonly("step", &StepLog::step)
      .def_readonly("t_start", &StepLog::t_start)
      .def_readonly("t_end", &StepLog::t_end)
      .def_readonly("gait", &StepLog::gait)
      .def_readonly("speed", &StepLog::speed)
      .def_readonly("v_des", &StepLog::v_des)
      .def_readonly("zeta", &StepLog::zeta)
      .def_readonly("in_ball", &StepLog::in_ball);

  py::class_<SwitchEvent>(m, "SwitchEvent")
      .def_readonly("step", &SwitchEvent::step)
      .def_readonly("time", &SwitchEvent::time)
      .def_readonly("source", &SwitchEvent::from)
      .def_readonly("target", &SwitchEvent::to)
      .def_readonly("zeta", &SwitchEvent::zeta);

  py::class_<SupervisorRun>(m, "SupervisorRun")
      .def_readonly("log", &SupervisorRun::log)
      .def_readonly("switches", &SupervisorRun::switches)
      .def_readonly("zeta", &SupervisorRun::zeta)
      .def_readonly("signal", &SupervisorRun::signal)
      .def_property_readonly("violated", [](const SupervisorRun& r) { return r.constraints.violated(); });

  py::class_<AppConfig>(m, "AppConfig")
      .def_readwrite("model", &AppConfig::model)
      .def_readwrite("controller", &AppConfig::controller)
      .def_readwrite("supervisor", &AppConfig::supervisor)
      .def_readwrite("artifacts", &AppConfig::artifacts)
      .def_property_readonly("speed_range",
                             [](const AppConfig& c) {
                               return std::make_pair(c.continuum.speed_lo, c.continuum.speed_hi);
                             })
      .def_property_readonly("schedule", [](const AppConfig& c) { return c.schedule.entries; })
      .def("controller_instance",
           [](const AppConfig& c) { return Controller(BipedModel(c.model), c.controller); });

  m.def("default_config", &default_config);
  m.def("load_config", &load_config, py::arg("path"));
  m.def("parse_config", &parse_config, py::arg("text"));

  m.def(
      "design_base",
      [](const AppConfig& cfg) {
        py::gil_scoped_release release;
        return design_base_gait(Controller(BipedModel(cfg.model), cfg.controller), cfg.design);
      },
      py::arg("config"), "Designs and certifies the base gait (minutes).");
  m.def(
      "certify_base",
      [](const BezierOutputs& outputs, const Controller& ctl) {
        py::gil_scoped_release release;
        return certify_base(outputs, ctl);
      },
      py::arg("outputs"), py::arg("controller"));
  m.def(
      "continuum",
      [](const BaseGait& base, const Controller& ctl, double lo, double hi, double max_gap) {
        ContinuumOptions opt;
        opt.speed_lo = lo;
        opt.speed_hi = hi;
        opt.max_gap = max_gap;
        py::gil_scoped_release release;
        return generate_continuum(base, ctl, opt);
      },
      py::arg("base"), py::arg("controller"), py::arg("speed_lo"), py::arg("speed_hi"),
      py::arg("max_gap") = 0.01);

  m.def("boundedness_check", py::overload_cast<const GaitFamily&>(&boundedness_check), py::arg("family"));
  m.def("boundedness_check",
        py::overload_cast<const std::vector<double>&, const std::vector<double>&, double>(&boundedness_check),
        py::arg("zeta_stars"), py::arg("ks"), py::arg("delta_sq"));
  m.def("dwell_time_bound", py::overload_cast<double, double, double, double>(&dwell_time_bound),
        py::arg("zeta_p"), py::arg("zeta_q"), py::arg("delta_sq"), py::arg("epsilon"));
  m.def("affine_replay", &affine_replay, py::arg("family"), py::arg("signal"), py::arg("zeta0"));
  m.def("nearest_gait", &nearest_gait, py::arg("family"), py::arg("speed"));

  m.def(
      "feasibility",
      [](const GaitFamily& f, int p, int q, const Controller& ctl, double eps) {
        FeasibilityOptions opt;
        opt.epsilon = eps;
        py::gil_scoped_release release;
        return feasibility_sim(f, p, q, ctl, opt);
      },
      py::arg("family"), py::arg("source"), py::arg("target"), py::arg("controller"),
      py::arg("epsilon") = 2.0);
  m.def(
      "build_graph",
      [](const GaitFamily& f, const Controller& ctl, double eps, unsigned workers) {
        FeasibilityOptions opt;
        opt.epsilon = eps;
        py::gil_scoped_release release;
        return build_graph(f, ctl, opt, workers);
      },
      py::arg("family"), py::arg("controller"), py::arg("epsilon") = 2.0, py::arg("workers") = 0);
  m.def("make_graph", &make_graph, py::arg("n"), py::arg("edges"));
  m.def("strongly_connected", &strongly_connected, py::arg("graph"));
  m.def("plan_path", &plan_path, py::arg("graph"), py::arg("source"), py::arg("target"));
  m.def(
      "supervise",
      [](const std::vector<ScheduleEntry>& schedule, const GaitFamily& f, const SwitchGraph& g,
         const Controller& ctl, const SupervisorOptions& opt) {
        py::gil_scoped_release release;
        return supervise(SpeedSchedule{schedule}, f, g, ctl, opt);
      },
      py::arg("schedule"), py::arg("family"), py::arg("graph"), py::arg("controller"),
      py::arg("options") = SupervisorOptions{});

  m.def("save_gait", &save_gait, py::arg("path"), py::arg("gait"), py::arg("model") = ModelParams{});
  m.def("load_gait", &load_gait, py::arg("path"), py::arg("model") = ModelParams{});
  m.def("save_family", &save_family, py::arg("path"), py::arg("family"), py::arg("model") = ModelParams{});
  m.def("load_family", &load_family, py::arg("path"), py::arg("model") = ModelParams{});
  m.def("save_graph", &save_graph, py::arg("path"), py::arg("graph"), py::arg("model") = ModelParams{});
  m.def("load_graph", &load_graph, py::arg("path"), py::arg("model") = ModelParams{});

  m.def(
      "export_continuum",
      [](const std::string& path, const GaitFamily& f, const Controller& ctl, int samples) {
        write_file(path, [&](std::ostream& o) { write_continuum_csv(o, f, ctl, samples); });
      },
      py::arg("path"), py::arg("family"), py::arg("controller"), py::arg("samples") = 200);
  m.def(
      "export_family",
      [](const std::string& path, const GaitFamily& f) {
        write_file(path, [&](std::ostream& o) { write_family_csv(o, f); });
      },
      py::arg("path"), py::arg("family"));
  m.def(
      "export_edges",
      [](const std::string& path, const SwitchGraph& g) {
        write_file(path, [&](std::ostream& o) { write_edges_csv(o, g); });
      },
      py::arg("path"), py::arg("graph"));
  m.def(
      "export_steps",
      [](const std::string& path, const SupervisorRun& r) {
        write_file(path, [&](std::ostream& o) { write_steps_csv(o, r); });
      },
      py::arg("path"), py::arg("run"));
}
