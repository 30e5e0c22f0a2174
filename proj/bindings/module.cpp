// Python bindings for the core operations: dataset generation, metrics,
// NNLS/convex projection, and the data-driven solvers.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>

#include "lcdd/driver.hpp"

namespace py = pybind11;
using namespace lcdd;

namespace {

Mat states_matrix(const std::vector<LocalState>& states) {
  if (states.empty()) return Mat(0, 0);
  Mat rows(states.size(), 2 * states[0].q());
  for (size_t i = 0; i < states.size(); ++i)
    rows.row(i) = states[i].packed().transpose();
  return rows;
}

Mode parse_mode(const std::string& mode) {
  if (mode == "dmdd") return Mode::dmdd;
  if (mode == "lcdd") return Mode::lcdd;
  throw py::value_error("mode must be 'dmdd' or 'lcdd'");
}

py::dict solve_py(const Discretization& disc, const MaterialDataset& data,
                  const std::string& mode, int k, std::uint64_t seed,
                  double tol_rel, int max_iter, double xi_bar, double mu_bar,
                  const std::string& init, int steps) {
  SolverConfig cfg;
  cfg.mode = parse_mode(mode);
  cfg.params.k = k;
  cfg.params.xi_bar = xi_bar;
  cfg.params.mu_bar = mu_bar;
  cfg.seed = seed;
  cfg.tol_rel = tol_rel;
  cfg.max_iter = max_iter;
  if (init == "zeros")
    cfg.init = SolverConfig::Init::zeros;
  else if (init != "random")
    throw py::value_error("init must be 'random' or 'zeros'");

  std::vector<SolveReport> reports = incremental_load(disc, data, cfg, steps);
  const SolveReport& last = reports.back();
  py::dict out;
  out["states"] = states_matrix(last.states);
  out["assigned"] = states_matrix(last.assigned);
  out["displacement"] = last.displacement;
  out["iterations"] = last.iterations;
  out["converged"] = last.converged;
  out["trace"] = last.trace;
  out["tol_abs"] = last.tol_abs;
  out["max_equilibrium_residual"] = last.max_equilibrium_residual;
  out["max_compat_residual"] = last.max_compat_residual;
  return out;
}

py::dict model_solve_py(const Discretization& disc) {
  AssembledSystem sys(disc);
  GlobalState gs = model_solve(disc, sys);
  py::dict out;
  out["states"] = states_matrix(gs.states);
  out["displacement"] = gs.displacement;
  return out;
}

py::dict project_py(const MaterialDataset& data, const Vec& packed,
                    const Metric& m, int k, double xi_bar, double mu_bar) {
  LocalState s = LocalState::from_packed(packed);
  Neighborhood nbhd = knn(data, s, m, k);
  SolverParams params;
  params.k = k;
  params.xi_bar = xi_bar;
  params.mu_bar = mu_bar;
  ProjectionResult res = convex_project(s, nbhd, m, params);
  py::dict out;
  out["weights"] = res.weights;
  out["state"] = res.state.packed();
  out["indices"] = nbhd.indices;
  out["pu_residual"] = res.pu_residual;
  return out;
}

NoiseRule parse_noise(const std::string& rule) {
  if (rule == "none") return NoiseRule::none;
  if (rule == "scaled") return NoiseRule::scaled;
  throw py::value_error("noise must be 'none' or 'scaled'");
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "physics-constrained data-driven solver core";

  py::class_<Metric>(mod, "Metric")
      .def_static("uniaxial", &Metric::uniaxial, py::arg("modulus"))
      .def_static("from_strain_matrix", &Metric::from_strain_matrix,
                  py::arg("m_eps"))
      .def_property_readonly("m_eps", &Metric::m_eps)
      .def_property_readonly("m_sig", &Metric::m_sig)
      .def_property_readonly("q", &Metric::q);

  mod.def("plane_stress_metric", &plane_stress_metric, py::arg("youngs"),
          py::arg("poisson"));
  mod.def(
      "m_norm",
      [](const Vec& packed, const Metric& m) {
        return m_norm(LocalState::from_packed(packed), m);
      },
      py::arg("state"), py::arg("metric"),
      "Energy norm of a packed [strain; stress] state vector.");

  py::class_<MaterialDataset>(mod, "MaterialDataset")
      .def(py::init<Mat, std::map<std::string, std::string>>(),
           py::arg("states"),
           py::arg("meta") = std::map<std::string, std::string>{})
      .def_property_readonly("states", &MaterialDataset::states)
      .def_property_readonly("size", &MaterialDataset::size)
      .def_property_readonly("q", &MaterialDataset::q)
      .def_property_readonly("meta", &MaterialDataset::meta);

  mod.def(
      "gen_linear_truss",
      [](long p, double modulus, double eps_max, double chi,
         std::uint64_t seed) {
        return gen_linear_truss(p, modulus, eps_max, {chi, seed});
      },
      py::arg("p"), py::arg("modulus") = 100e6, py::arg("eps_max") = 0.01,
      py::arg("chi") = 0.0, py::arg("seed") = 0);
  mod.def("gen_sigmoid_truss", &gen_sigmoid_truss, py::arg("p"),
          py::arg("seed") = 0);
  mod.def(
      "gen_plane_stress",
      [](int p_axis, double youngs, double poisson, double strain_lo,
         double strain_hi, const std::string& noise, std::uint64_t seed) {
        return gen_plane_stress(p_axis, youngs, poisson, strain_lo, strain_hi,
                                parse_noise(noise), seed);
      },
      py::arg("p_axis"), py::arg("youngs") = 30e6, py::arg("poisson") = 0.3,
      py::arg("strain_lo") = -5e-4, py::arg("strain_hi") = 5e-4,
      py::arg("noise") = "none", py::arg("seed") = 0);
  mod.def("read_csv", &read_csv, py::arg("path"));
  mod.def("write_csv", &write_csv, py::arg("dataset"), py::arg("path"));

  mod.def("nnls", &nnls, py::arg("a"), py::arg("z"), py::arg("tol") = 1e-10,
          "Non-negative least squares: min ||A y - z|| with y >= 0.");
  mod.def("convex_project", &project_py, py::arg("dataset"), py::arg("state"),
          py::arg("metric"), py::arg("k") = 6, py::arg("xi_bar") = 1e5,
          py::arg("mu_bar") = 1e-4,
          "Project a packed state onto the hull of its k nearest data points.");
  mod.def(
      "nearest",
      [](const MaterialDataset& data, const Vec& packed, const Metric& m) {
        auto [pt, dist] = nearest_point(data, LocalState::from_packed(packed), m);
        return std::make_pair(pt.index, dist);
      },
      py::arg("dataset"), py::arg("state"), py::arg("metric"),
      "Index and metric distance of the nearest dataset point.");

  py::class_<Discretization>(mod, "Problem")
      .def_property_readonly("q", &Discretization::q)
      .def_property_readonly("point_count", &Discretization::point_count)
      .def_property_readonly(
          "dof_count", [](const Discretization& d) { return d.dof_count; });

  mod.def(
      "problem_one_bar",
      [](double area, double force, double length, double modulus) {
        return build_truss(one_bar_topology(area, force, length), modulus);
      },
      py::arg("area") = 0.02, py::arg("force") = 10e3, py::arg("length") = 1.0,
      py::arg("modulus") = 100e6);
  mod.def(
      "problem_truss15",
      [](double bay, double height, double ux, double force, double modulus) {
        return build_truss(truss15_topology(bay, height, ux, force), modulus);
      },
      py::arg("bay") = 4.0, py::arg("height") = 2.0, py::arg("ux") = 0.01,
      py::arg("force") = 100e3, py::arg("modulus") = 100e6);
  mod.def("problem_beam", &build_beam, py::arg("length") = 48.0,
          py::arg("height") = 12.0, py::arg("spacing") = 2.0,
          py::arg("youngs") = 30e6, py::arg("poisson") = 0.3,
          py::arg("force") = 1000.0, py::arg("support_scale") = 1.75);

  mod.def("solve", &solve_py, py::arg("problem"), py::arg("dataset"),
          py::arg("mode") = "lcdd", py::arg("k") = 6, py::arg("seed") = 0,
          py::arg("tol_rel") = 1e-8, py::arg("max_iter") = 10000,
          py::arg("xi_bar") = 1e5, py::arg("mu_bar") = 1e-4,
          py::arg("init") = "random", py::arg("steps") = 1,
          "Run the data-driven fixed-point solver; rows of 'states' are "
          "packed [strain; stress] per integration point.");
  mod.def("model_solve", &model_solve_py, py::arg("problem"),
          "Model-based reference solution with the metric as elasticity.");
}
