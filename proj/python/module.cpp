// Python bindings for the main operations. Fields cross the boundary as
// numpy arrays: interior fields by node, controls as (samples, boundary nodes).

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

#include "chc/commands.hpp"
#include "chc/errors.hpp"
#include "chc/run_config.hpp"
#include "chc/verify.hpp"

namespace py = pybind11;
using namespace chc;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix to_matrix(const ControlSignal& u) {
  RowMatrix m(u.samples(), u.geometry->boundary_count());
  for (int n = 0; n < u.samples(); ++n) m.row(n) = u.values[static_cast<std::size_t>(n)].transpose();
  return m;
}

ControlSignal from_matrix(const RunConfig& c, const RowMatrix& m) {
  ControlSignal u = ControlSignal::zeros(c.geometry, c.solver.time);
  if (m.rows() != u.samples() || m.cols() != c.geometry->boundary_count()) {
    throw ConfigMismatch("control must have shape (" + std::to_string(u.samples()) + ", " +
                         std::to_string(c.geometry->boundary_count()) + ")");
  }
  for (int n = 0; n < u.samples(); ++n) u.values[static_cast<std::size_t>(n)] = m.row(n).transpose();
  return u;
}

ControlSignal control_or_default(const RunConfig& c, const std::optional<RowMatrix>& u) {
  return u ? from_matrix(c, *u) : c.control.build(c.geometry, c.solver.time);
}

double mean(const InteriorField& f) {
  const Vector& w = f.geometry->weights();
  return w.dot(f.values) / w.sum();
}

py::dict forward(const RunConfig& c, const std::optional<RowMatrix>& u) {
  const ControlProblem p = c.problem();
  const Trajectory t = solve_state(p.y0, control_or_default(c, u), c.pair, c.solver);
  std::vector<double> time, mass, energy;
  for (const auto& s : t.snapshots) {
    time.push_back(s.t);
    mass.push_back(mean(s.y.interior));
    energy.push_back(free_energy(s, c.pair));
  }
  py::dict d;
  d["t"] = time;
  d["mass"] = mass;
  d["energy"] = energy;
  d["y_final"] = t.snapshots.back().y.interior.values;
  d["y_boundary_final"] = t.snapshots.back().y.boundary.values;
  d["newton_iterations"] = t.newton_iterations;
  return d;
}

py::dict gradient(const RunConfig& c, const std::optional<RowMatrix>& u) {
  const GradientEvaluation e = evaluate_gradient(c.problem(), control_or_default(c, u));
  py::dict d;
  d["cost"] = e.cost;
  d["gradient"] = to_matrix(e.gradient);
  return d;
}

py::dict gradcheck(const RunConfig& c, const std::optional<RowMatrix>& h) {
  const ControlSignal u = c.control.build(c.geometry, c.solver.time);
  const ControlSignal dir = h ? from_matrix(c, *h) : smooth_control(c.geometry, c.solver.time, {0.3, 0.7, -0.5, 0.2});
  const FdTable t = fd_gradient_oracle(c.problem(), u, dir, c.verify.fd_eps, c.verify.corrupt_adjoint);
  py::list rows;
  for (const auto& r : t.rows) {
    py::dict row;
    row["eps"] = r.eps;
    row["central"] = r.central;
    row["adjoint"] = r.adjoint;
    row["rel_error"] = r.rel_error;
    rows.append(row);
  }
  py::dict d;
  d["rows"] = rows;
  d["best_rel_error"] = t.best_rel_error;
  return d;
}

py::dict optimize(const RunConfig& c) {
  const ControlProblem p = c.problem();
  const OptimizationReport r = projected_gradient_descent(p, project_box(c.control.build(c.geometry, c.solver.time), c.box), c.optimizer);
  const CertificateSummary cert = optimality_certificate(p, r, c.optimizer);
  py::dict d;
  d["iterations"] = static_cast<int>(r.iterates.size()) - 1;
  d["cost"] = r.final_cost();
  d["stationarity"] = r.final_stationarity();
  d["stat_tol"] = r.stat_tol;
  d["converged"] = r.converged;
  d["certificate_pass"] = cert.pass();
  d["control"] = to_matrix(r.control);
  d["gradient"] = to_matrix(r.gradient);
  return d;
}

py::tuple run(const std::string& name, const std::filesystem::path& config, std::optional<std::filesystem::path> out,
              std::optional<std::uint64_t> seed, bool quiet) {
  std::ostringstream so, se;
  const int code = run_command(name, {config, out, seed, quiet}, so, se);
  return py::make_tuple(code, so.str(), se.str());
}

}  // namespace

PYBIND11_MODULE(_chc, m) {
  m.doc() = "Optimal boundary control of viscous Cahn-Hilliard with dynamic boundary conditions";
  m.attr("__version__") = CHC_VERSION;

  // Translators run most recent first, so the base class goes first.
  const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainViolation>(m, "DomainViolation", base.ptr());

  py::class_<RunConfig>(m, "Config")
      .def_property_readonly("mode", [](const RunConfig& c) { return c.geometry->mode() == GeometryMode::Strip2D ? "strip" : "interval"; })
      .def_property_readonly("node_count", [](const RunConfig& c) { return c.geometry->node_count(); })
      .def_property_readonly("boundary_count", [](const RunConfig& c) { return c.geometry->boundary_count(); })
      .def_property_readonly("nt", [](const RunConfig& c) { return c.solver.time.nt; })
      .def_property_readonly("T", [](const RunConfig& c) { return c.solver.time.T; })
      .def_property_readonly("seed", [](const RunConfig& c) { return c.seed; })
      .def_property_readonly("text", [](const RunConfig& c) { return c.text; });

  m.def("load_config", &load_run_config, py::arg("path"));
  m.def("parse_config", &parse_run_config, py::arg("text"), py::arg("base_dir") = std::filesystem::path("."));
  m.def("forward", &forward, py::arg("config"), py::arg("control") = std::nullopt,
        "Forward solve; control defaults to the configured one.");
  m.def("gradient", &gradient, py::arg("config"), py::arg("control") = std::nullopt,
        "Reduced cost and adjoint gradient.");
  m.def("gradcheck", &gradcheck, py::arg("config"), py::arg("direction") = std::nullopt);
  m.def("optimize", &optimize, py::arg("config"));
  m.def("potential", [](const std::string& kind, int order, double r, double c) {
        PotentialSpec s;
        if (kind == "quartic") {
          s = PotentialSpec::regular_quartic();
        } else if (kind == "logarithmic") {
          s = PotentialSpec::logarithmic(c);
        } else if (kind == "quadratic") {
          s = PotentialSpec::quadratic(c);
        } else {
          throw ConfigError("unknown potential '" + kind + "'");
        }
        return eval(s, order, r);
      },
        py::arg("kind"), py::arg("order"), py::arg("r"), py::arg("c") = 3.0,
        "order-th derivative of a potential; c is the log coefficient or the quadratic a.");
  m.def("run_command", &run, py::arg("name"), py::arg("config"), py::arg("out") = std::nullopt,
        py::arg("seed") = std::nullopt, py::arg("quiet") = true, "Runs a CLI subcommand; returns (exit_code, stdout, stderr).");
  m.def("sha256_hex", &sha256_hex);
}
