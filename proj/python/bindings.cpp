#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

#include "qvix/experiment.hpp"
#include "qvix/sensitivity.hpp"

namespace py = pybind11;

namespace {

qvix::NodalFunction nodal(const qvix::EllipticOperator& op, const Eigen::VectorXd& v) {
  return qvix::NodalFunction(op.grid(), v);
}

qvix::DualElement dual(const qvix::EllipticOperator& op, const Eigen::VectorXd& v) {
  return qvix::DualElement(op.grid(), v);
}

qvix::Extremal parse_which(const std::string& which) {
  if (which == "min") return qvix::Extremal::Min;
  if (which == "max") return qvix::Extremal::Max;
  throw qvix::InvalidArgument("which must be 'min' or 'max'");
}

py::dict vi_dict(const qvix::ViSolution& s) {
  py::dict d;
  d["u"] = s.u.values();
  d["lambda"] = s.lambda.values();
  d["partition"] = s.partition.to_string();
  d["iterations"] = s.iterations;
  d["residual"] = s.residual;
  return d;
}

py::dict run_dict(const qvix::ExtremalRunReport& r) {
  py::dict d;
  d["solution"] = r.solution.values();
  d["obstacle"] = r.obstacle.values();
  py::list iterates;
  for (const auto& u : r.iterates) iterates.append(u.values());
  d["iterates"] = iterates;
  d["iterations"] = r.n_iters;
  d["converged"] = r.converged;
  d["monotone"] = r.monotone;
  d["qvi_residual"] = r.qvi_residual;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Extremal solutions and directional derivatives of implicit obstacle problems";

  // Quiet by default inside Python; QVIX_LOG overrides as for the CLI.
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("QVIX_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }

  auto base_error = py::register_exception<qvix::Error>(m, "QvixError");
  py::register_exception<qvix::InvalidArgument>(m, "InvalidArgument", base_error.ptr());
  py::register_exception<qvix::ConvergenceError>(m, "ConvergenceError", base_error.ptr());
  py::register_exception<qvix::MonotonicityViolation>(m, "MonotonicityViolation",
                                                      base_error.ptr());

  py::class_<qvix::Grid>(m, "Grid")
      .def(py::init<int, double, double>(), py::arg("n_nodes"), py::arg("a") = 0.0,
           py::arg("b") = 1.0)
      .def_property_readonly("n_nodes", &qvix::Grid::n_nodes)
      .def_property_readonly("h", &qvix::Grid::h)
      .def("coordinates", &qvix::Grid::coordinates)
      .def("weights", &qvix::Grid::weights);

  py::class_<qvix::EllipticOperator>(m, "Operator")
      .def(py::init([](const qvix::Grid& g, double c, const std::string& bc) {
             return qvix::assemble_operator(g, c, qvix::parse_boundary_condition(bc));
           }),
           py::arg("grid"), py::arg("c") = 1.0, py::arg("bc") = "neumann")
      .def_property_readonly("grid", &qvix::EllipticOperator::grid)
      .def_property_readonly("coercivity", &qvix::EllipticOperator::coercivity)
      .def_property_readonly("boundedness", &qvix::EllipticOperator::boundedness)
      .def("apply", [](const qvix::EllipticOperator& A,
                       const Eigen::VectorXd& u) { return A.apply(nodal(A, u)).values(); })
      .def("solve", [](const qvix::EllipticOperator& A, const Eigen::VectorXd& f) {
        return A.solve(dual(A, f)).values();
      });

  m.def("v_norm", [](const qvix::Grid& g, const Eigen::VectorXd& u) {
    return qvix::v_norm(qvix::NodalFunction(g, u));
  });

  m.def(
      "solve_vi",
      [](const qvix::EllipticOperator& A, const Eigen::VectorXd& f, const Eigen::VectorXd& phi) {
        return vi_dict(qvix::solve_vi(A, dual(A, f), nodal(A, phi)));
      },
      py::arg("op"), py::arg("f"), py::arg("phi"));
  m.def(
      "oracle_vi",
      [](const qvix::EllipticOperator& A, const Eigen::VectorXd& f, const Eigen::VectorXd& phi) {
        return vi_dict(qvix::oracle_vi(A, dual(A, f), nodal(A, phi)));
      },
      py::arg("op"), py::arg("f"), py::arg("phi"));

  py::class_<qvix::ObstacleMap, std::shared_ptr<qvix::ObstacleMap>>(m, "ObstacleMap")
      .def("evaluate",
           [](const qvix::ObstacleMap& map, const qvix::Grid& g, const Eigen::VectorXd& u) {
             return map.evaluate(qvix::NodalFunction(g, u)).values();
           })
      .def("derivative", [](const qvix::ObstacleMap& map, const qvix::Grid& g,
                            const Eigen::VectorXd& u, const Eigen::VectorXd& h) {
        return map.derivative(qvix::NodalFunction(g, u), qvix::NodalFunction(g, h)).values();
      });

  py::class_<qvix::PlateauMap, qvix::ObstacleMap, std::shared_ptr<qvix::PlateauMap>>(
      m, "PlateauMap")
      .def(py::init([](std::vector<double> levels, double eps) {
             return std::make_shared<qvix::PlateauMap>(
                 qvix::PlateauParams{.levels = std::move(levels), .eps = eps});
           }),
           py::arg("levels"), py::arg("eps") = 0.25)
      .def("scalar", &qvix::PlateauMap::scalar);

  py::class_<qvix::InverseEllipticMap, qvix::ObstacleMap,
             std::shared_ptr<qvix::InverseEllipticMap>>(m, "InverseEllipticMap")
      .def(py::init([](const qvix::EllipticOperator& L, const std::string& source,
                       double scale) {
             qvix::ScalarSource g;
             if (source == "linear") {
               g.type = qvix::ScalarSource::Type::Linear;
             } else if (source != "tanh") {
               throw qvix::InvalidArgument("source must be 'linear' or 'tanh'");
             }
             g.scale = scale;
             return std::make_shared<qvix::InverseEllipticMap>(L, g);
           }),
           py::arg("op"), py::arg("source") = "tanh", py::arg("scale") = 1.0);

  py::class_<qvix::ThermoformingMap, qvix::ObstacleMap, std::shared_ptr<qvix::ThermoformingMap>>(
      m, "ThermoformingMap")
      .def(py::init([](const qvix::Grid& g, const Eigen::VectorXd& mould, double k, double M,
                       double gamma) {
             return std::make_shared<qvix::ThermoformingMap>(
                 qvix::ThermoParams{.k = k, .M = M, .gamma = gamma},
                 qvix::NodalFunction(g, mould));
           }),
           py::arg("grid"), py::arg("mould"), py::arg("k") = 1.0, py::arg("M") = 1.0,
           py::arg("gamma") = 0.1)
      .def("temperature",
           [](const qvix::ThermoformingMap& map, const Eigen::VectorXd& u) {
             return map.temperature(qvix::NodalFunction(map.mould().grid(), u)).T.values();
           })
      .def_property_readonly("temperature_bound", &qvix::ThermoformingMap::temperature_bound);

  m.def(
      "iterate",
      [](const std::string& which, const qvix::EllipticOperator& A, const Eigen::VectorXd& f,
         const qvix::ObstacleMap& map, const Eigen::VectorXd& start) {
        return run_dict(
            qvix::iterate_extremal(parse_which(which), A, dual(A, f), map, nodal(A, start)));
      },
      py::arg("which"), py::arg("op"), py::arg("f"), py::arg("map"), py::arg("start"),
      "Monotone iteration from a subsolution ('min') or supersolution ('max').");

  m.def(
      "fd_validate",
      [](const std::string& which, const qvix::EllipticOperator& A, const Eigen::VectorXd& f,
         const Eigen::VectorXd& d, std::shared_ptr<qvix::ObstacleMap> map,
         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
         std::vector<double> s_list) {
        qvix::FdOptions opts;
        opts.s_list = std::move(s_list);
        const qvix::DerivativeReport rep =
            qvix::fd_validate(A, dual(A, f), dual(A, d), map,
                              {.lower = nodal(A, lower), .upper = nodal(A, upper)},
                              parse_which(which), opts);
        py::dict out;
        out["alpha"] = rep.alpha->values();
        py::list table;
        for (const auto& r : rep.fd_table) table.append(py::make_tuple(r.s, r.error_vnorm));
        out["fd_table"] = table;
        out["observed_order"] = rep.observed_order ? py::cast(*rep.observed_order) : py::none();
        out["monotone"] = qvix::alpha_monotonicity_check(rep);
        out["fd_passed"] = rep.fd_passed;
        out["residual"] = rep.residual;
        return out;
      },
      py::arg("which"), py::arg("op"), py::arg("f"), py::arg("d"), py::arg("map"),
      py::arg("lower"), py::arg("upper"),
      py::arg("s_list") = std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4});

  m.def(
      "run_config",
      [](const std::string& config_json, const std::string& out_dir, bool oracle) {
        qvix::ExperimentConfig cfg = qvix::parse_config(nlohmann::json::parse(config_json));
        qvix::RunOptions opts;
        opts.force_oracle = oracle;
        const qvix::RunArtifacts art = qvix::run_experiment(cfg, opts);
        if (!out_dir.empty()) qvix::emit_report(art, out_dir);
        return qvix::summary_json(art).dump();
      },
      py::arg("config_json"), py::arg("out_dir") = "", py::arg("oracle") = false,
      "Runs a JSON experiment config and returns the summary as a JSON string.");
}
