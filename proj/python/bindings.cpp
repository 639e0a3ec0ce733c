#include "rodlimit/cli.hpp"
#include "rodlimit/config.hpp"
#include "rodlimit/report.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace rodlimit;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict solve_text(const std::string& config_text, std::optional<double> kappa, int mesh_level) {
  const RunConfig cfg = parse_config_text(config_text);
  LoadSet loads = cfg.loads;
  loads.kappa = kappa.value_or(cfg.loads.kappa);
  py::dict out;
  if (std::abs(loads.kappa - 2.0) < 1e-12) {
    const Mat3 A = compute_A(cfg.material.q, build_disk_mesh(mesh_level)).A;
    const Kappa2Solution sol = minimize_kappa2(cfg.skeleton, A, loads, cfg.solver);
    out["report"] = json_to_py(to_json(sol.report));
    out["V"] = sol.V.V;
    out["R"] = sol.R.R;
    out["A"] = A;
  } else {
    const Kappa1Solution sol = minimize_kappa1(cfg.skeleton, loads, cfg.solver);
    out["report"] = json_to_py(to_json(sol.report));
    out["V"] = sol.V.V;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Limit models of thin elastic rod structures";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("exp_so3", &exp_so3, py::arg("w"));
  m.def("log_so3", &log_so3, py::arg("R"));
  m.def(
      "project_to_rotation", [](const Mat3& M) { return project_to_rotation(M).R; }, py::arg("M"));
  m.def("rotation_samples", &rotation_samples, py::arg("count"));

  m.def(
      "compute_A",
      [](double lambda, double mu, int level) {
        const SvkMaterial mat{lambda, mu};
        mat.validate();
        return compute_A(isotropic_q6(mat), build_disk_mesh(level)).A;
      },
      py::arg("lam"), py::arg("mu"), py::arg("mesh_level") = 4);

  m.def(
      "svk_density", [](const Mat3& F, double lambda, double mu) { return svk_density(F, SvkMaterial{lambda, mu}); },
      py::arg("F"), py::arg("lam"), py::arg("mu"));

  m.def(
      "validate_config",
      [](const std::string& text) {
        try {
          parse_config_text(text);
          return std::vector<std::string>{};
        } catch (const ConfigError& e) {
          return e.errors();
        }
      },
      py::arg("text"), "Return every problem found in a JSON configuration (empty when valid).");

  m.def("solve", &solve_text, py::arg("config_text"), py::arg("kappa") = py::none(), py::arg("mesh_level") = 4);

  m.def(
      "scaling_study",
      [](const std::string& family, double kappa, const std::vector<double>& deltas, double amplitude) {
        FamilySpec spec;
        spec.family = parse_family(family);
        spec.kappa = kappa;
        spec.amplitude = amplitude;
        return json_to_py(to_json(scaling_study(spec, deltas)));
      },
      py::arg("family"), py::arg("kappa"), py::arg("deltas"), py::arg("amplitude") = 0.5);

  m.def(
      "run",
      [](const std::vector<std::string>& argv) {
        if (argv.empty()) throw DomainError("run: missing subcommand");
        CliOptions o;
        o.subcommand = argv[0];
        for (std::size_t k = 1; k + 1 < argv.size(); k += 2) {
          const std::string& f = argv[k];
          const std::string& v = argv[k + 1];
          if (f == "--config") o.config_path = v;
          else if (f == "--out") o.out_dir = v;
          else if (f == "--kappa") o.kappa = std::stod(v);
          else if (f == "--mesh-level") o.mesh_level = std::stoi(v);
          else if (f == "--seed") o.seed = static_cast<unsigned>(std::stoul(v));
          else if (f == "--family") o.family = v;
          else if (f == "--field") o.field_path = v;
          else if (f == "--deltas") {
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) o.deltas.push_back(std::stod(item));
          } else
            throw DomainError("run: unknown flag " + f);
        }
        std::ostringstream out, err;
        const int code = run(o, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("argv"), "Run a CLI subcommand in-process; returns (exit_code, stdout, stderr).");
}
