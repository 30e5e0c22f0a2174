// Command-line front end: dataset generation, data-driven solves, and
// convergence studies. JSON for configs and reports, CSV for tabular data.
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lcdd/driver.hpp"

using json = nlohmann::ordered_json;
using namespace lcdd;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_not_converged = 3;

[[noreturn]] void usage_fail(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  std::exit(exit_usage);
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) usage_fail("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    usage_fail(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) usage_fail("cannot write " + path);
  out << body;
}

// ---------------------------------------------------------------- gen ----

struct GenArgs {
  std::string generator;
  std::string out;
  long p = 0;
  double chi = 0.0;
  std::uint64_t seed = 0;
  double modulus = 100e6;
  double eps_max = 0.01;
  int p_axis = 0;
  std::string noise = "none";
  double youngs = 30e6;
  double poisson = 0.3;
  double outlier_eps = 0.004;
  double outlier_sig = 0.55e6;
};

int run_gen(const GenArgs& args) {
  MaterialDataset data = [&]() {
    if (args.generator == "linear-truss") {
      if (args.p <= 0) usage_fail("gen linear-truss requires --p");
      return gen_linear_truss(args.p, args.modulus, args.eps_max,
                              {args.chi, args.seed});
    }
    if (args.generator == "sigmoid-truss") {
      if (args.p <= 0) usage_fail("gen sigmoid-truss requires --p");
      return gen_sigmoid_truss(args.p, args.seed);
    }
    if (args.generator == "outlier-truss") {
      if (args.p <= 0) usage_fail("gen outlier-truss requires --p");
      return gen_outlier_truss(
          args.p, args.modulus, args.eps_max,
          LocalState::uniaxial(args.outlier_eps, args.outlier_sig), args.seed);
    }
    if (args.generator == "plane-stress") {
      if (args.p_axis <= 0) usage_fail("gen plane-stress requires --p-axis");
      NoiseRule rule = args.noise == "scaled" ? NoiseRule::scaled
                       : args.noise == "none"
                           ? NoiseRule::none
                           : (usage_fail("--noise must be none or scaled"),
                              NoiseRule::none);
      return gen_plane_stress(args.p_axis, args.youngs, args.poisson, -5e-4,
                              5e-4, rule, args.seed);
    }
    usage_fail("unknown generator '" + args.generator + "'");
  }();
  write_csv(data, args.out);
  std::cout << "wrote " << args.out << ": p=" << data.size()
            << " q=" << data.q() << " chi=" << data.meta().at("chi") << "\n";
  return 0;
}

// -------------------------------------------------------------- solve ----

Discretization load_problem(const json& spec) {
  std::string kind = spec.value("kind", "");
  if (kind == "one-bar") {
    return build_truss(one_bar_topology(spec.value("area", 0.02),
                                        spec.value("force", 10e3),
                                        spec.value("length", 1.0)),
                       spec.value("modulus", 100e6));
  }
  if (kind == "truss15") {
    return build_truss(
        truss15_topology(spec.value("bay", 4.0), spec.value("height", 2.0),
                         spec.value("ux", 0.01), spec.value("force", 100e3)),
        spec.value("modulus", 100e6));
  }
  if (kind == "truss") {
    TrussTopology topo;
    const auto& nodes = spec.at("nodes");
    topo.nodes.resize(nodes.size(), 2);
    for (size_t i = 0; i < nodes.size(); ++i) {
      topo.nodes(i, 0) = nodes[i].at(0).get<double>();
      topo.nodes(i, 1) = nodes[i].at(1).get<double>();
    }
    for (const auto& mem : spec.at("members"))
      topo.members.push_back({mem.at(0).get<int>(), mem.at(1).get<int>(),
                              mem.size() > 2 ? mem.at(2).get<double>() : 1.0});
    for (const auto& bc : spec.at("bcs"))
      topo.bcs.push_back({bc.at(0).get<int>(), bc.at(1).get<double>()});
    topo.loads = Vec::Zero(2 * topo.nodes.rows());
    for (const auto& load : spec.at("loads"))
      topo.loads(load.at(0).get<int>()) = load.at(1).get<double>();
    return build_truss(topo, spec.value("modulus", 100e6));
  }
  if (kind == "beam") {
    return build_beam(spec.value("length", 48.0), spec.value("height", 12.0),
                      spec.value("spacing", 2.0), spec.value("youngs", 30e6),
                      spec.value("poisson", 0.3), spec.value("force", 1000.0));
  }
  usage_fail("problem kind must be one-bar, truss15, truss or beam");
}

struct SolveArgs {
  std::string problem_path;
  std::string data_path;
  std::string out;
  std::string mode = "lcdd";
  int k = 6;
  std::uint64_t seed = 0;
  int steps = 1;
  double tol_rel = 1e-8;
  int max_iter = 10000;
  double xi_bar = 1e5;
  double mu_bar = 1e-4;
};

json resolved_config(const SolveArgs& args) {
  return {{"problem", args.problem_path}, {"data", args.data_path},
          {"mode", args.mode},           {"k", args.k},
          {"seed", args.seed},           {"steps", args.steps},
          {"tol_rel", args.tol_rel},     {"max_iter", args.max_iter},
          {"xi_bar", args.xi_bar},       {"mu_bar", args.mu_bar}};
}

void write_states_csv(const std::string& path,
                      const std::vector<LocalState>& states,
                      std::map<std::string, std::string> meta) {
  Mat rows(states.size(), 2 * states[0].q());
  for (size_t i = 0; i < states.size(); ++i)
    rows.row(i) = states[i].packed().transpose();
  write_csv(MaterialDataset(std::move(rows), std::move(meta)), path);
}

int run_solve(const SolveArgs& args) {
  json problem = load_json(args.problem_path);
  Discretization disc = load_problem(problem);
  MaterialDataset data = [&]() {
    try {
      return read_csv(args.data_path);
    } catch (const std::runtime_error& e) {
      usage_fail(e.what());
    }
  }();
  if (data.q() != disc.q())
    usage_fail("dataset dimension q=" + std::to_string(data.q()) +
               " does not match problem q=" + std::to_string(disc.q()));

  SolverConfig cfg;
  if (args.mode == "dmdd")
    cfg.mode = Mode::dmdd;
  else if (args.mode == "lcdd")
    cfg.mode = Mode::lcdd;
  else
    usage_fail("--mode must be dmdd or lcdd");
  cfg.params.k = args.k;
  cfg.params.xi_bar = args.xi_bar;
  cfg.params.mu_bar = args.mu_bar;
  cfg.seed = args.seed;
  cfg.tol_rel = args.tol_rel;
  cfg.max_iter = args.max_iter;

  std::vector<SolveReport> reports = [&]() {
    try {
      return incremental_load(disc, data, cfg, args.steps);
    } catch (const std::exception& e) {
      usage_fail(e.what());
    }
  }();

  // state CSVs carry the numeric provenance shared by equivalent solver
  // modes; the mode itself lives in the report JSON alongside
  std::map<std::string, std::string> meta{
      {"problem", args.problem_path},
      {"data", args.data_path},
      {"seed", std::to_string(args.seed)},
      {"steps", std::to_string(args.steps)}};
  for (int j = 0; j < args.steps; ++j) {
    std::string path = args.steps == 1
                           ? args.out + ".states.csv"
                           : args.out + ".step" + std::to_string(j + 1) +
                                 ".states.csv";
    auto step_meta = meta;
    step_meta["step"] = std::to_string(j + 1);
    write_states_csv(path, reports[j].states, std::move(step_meta));
  }

  json report_json;
  report_json["config"] = resolved_config(args);
  report_json["steps"] = json::array();
  bool all_converged = true;
  for (const SolveReport& r : reports) {
    json step;
    step["converged"] = r.converged;
    step["converged_by_cycle"] = r.converged_by_cycle;
    step["iterations"] = r.iterations;
    step["tol_abs"] = r.tol_abs;
    step["max_equilibrium_residual"] = r.max_equilibrium_residual;
    step["max_compat_residual"] = r.max_compat_residual;
    step["trace"] = r.trace;
    step["displacement"] =
        std::vector<double>(r.displacement.data(),
                            r.displacement.data() + r.displacement.size());
    report_json["steps"].push_back(std::move(step));
    all_converged = all_converged && r.converged;
  }
  write_text(args.out + ".report.json", report_json.dump(2) + "\n");

  const SolveReport& last = reports.back();
  std::cout << (all_converged ? "converged" : "not converged") << " after "
            << last.iterations << " iterations (final step); report at "
            << args.out << ".report.json\n";
  return all_converged ? 0 : exit_not_converged;
}

// -------------------------------------------------------------- study ----

int run_study(const std::string& config_path, const std::string& out) {
  json spec = load_json(config_path);

  StudyProblem problem;
  std::string name = spec.value("problem", "");
  if (name == "truss15")
    problem = StudyProblem::truss15;
  else if (name == "beam")
    problem = StudyProblem::beam;
  else
    usage_fail("study problem must be truss15 or beam");

  std::vector<long> sizes = spec.value("sizes", std::vector<long>{});
  if (sizes.empty()) usage_fail("study requires a non-empty sizes list");
  std::vector<std::uint64_t> seeds =
      spec.value("seeds", std::vector<std::uint64_t>{1, 2, 3, 4, 5});

  std::vector<StudyVariant> variants;
  for (const auto& v : spec.value("variants", json::array())) {
    StudyVariant variant;
    std::string mode = v.value("mode", "dmdd");
    variant.mode = mode == "lcdd" ? Mode::lcdd : Mode::dmdd;
    variant.k = v.value("k", variant.mode == Mode::lcdd ? 6 : 1);
    variants.push_back(variant);
  }
  if (variants.empty()) usage_fail("study requires a non-empty variants list");

  StudyOptions options;
  if (spec.contains("options")) {
    const json& o = spec["options"];
    options.tol_rel = o.value("tol_rel", options.tol_rel);
    options.max_iter = o.value("max_iter", options.max_iter);
    options.xi_bar = o.value("xi_bar", options.xi_bar);
    options.mu_bar = o.value("mu_bar", options.mu_bar);
    options.truss_modulus = o.value("truss_modulus", options.truss_modulus);
    options.truss_eps_max = o.value("truss_eps_max", options.truss_eps_max);
    options.beam_spacing = o.value("beam_spacing", options.beam_spacing);
    options.beam_youngs = o.value("beam_youngs", options.beam_youngs);
    options.beam_poisson = o.value("beam_poisson", options.beam_poisson);
    options.beam_force = o.value("beam_force", options.beam_force);
    options.beam_noise = o.value("beam_noise", "none") == std::string("scaled")
                             ? NoiseRule::scaled
                             : NoiseRule::none;
  }
  if (const char* env = std::getenv("LCDD_THREADS"))
    options.threads = std::atoi(env);

  StudyTable table = [&]() {
    try {
      return convergence_study(problem, sizes, variants, seeds, options);
    } catch (const std::exception& e) {
      usage_fail(e.what());
    }
  }();

  std::ostringstream csv;
  csv << "problem,mode,k,p,chi,seed,error_metric,iterations,converged,wall_ms\n";
  for (const StudyRun& row : table.rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%ld,%.17g,%llu,%.17g,%d,%d,%.3f\n",
                  row.problem.c_str(), row.mode == Mode::dmdd ? "dmdd" : "lcdd",
                  row.k, row.p, row.chi,
                  static_cast<unsigned long long>(row.seed), row.error,
                  row.iterations, row.converged ? 1 : 0, row.wall_ms);
    csv << buf;
  }
  write_text(out + ".csv", csv.str());

  json summary;
  summary["config"] = spec;
  summary["slopes"] = table.slopes;
  for (const auto& [label, by_p] : table.median_errors)
    for (const auto& [p, err] : by_p)
      summary["median_errors"][label][std::to_string(p)] = err;
  for (const auto& [label, by_p] : table.median_iterations)
    for (const auto& [p, iters] : by_p)
      summary["median_iterations"][label][std::to_string(p)] = iters;
  write_text(out + ".summary.json", summary.dump(2) + "\n");

  for (const auto& [label, slope] : table.slopes)
    std::cout << label << " slope " << slope << "\n";
  std::cout << "wrote " << out << ".csv and " << out << ".summary.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physics-constrained data-driven solver"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "generate a material dataset");
  gen->add_option("generator", gen_args.generator,
                  "linear-truss | sigmoid-truss | outlier-truss | plane-stress")
      ->required();
  gen->add_option("--p", gen_args.p, "number of points (truss generators)");
  gen->add_option("--chi", gen_args.chi, "noise level");
  gen->add_option("--seed", gen_args.seed, "RNG seed");
  gen->add_option("--modulus", gen_args.modulus, "linear graph modulus [Pa]");
  gen->add_option("--eps-max", gen_args.eps_max, "strain sampling half-range");
  gen->add_option("--p-axis", gen_args.p_axis,
                  "grid points per strain axis (plane-stress)");
  gen->add_option("--noise", gen_args.noise, "none | scaled (plane-stress)");
  gen->add_option("--youngs", gen_args.youngs, "Young's modulus [Pa]");
  gen->add_option("--poisson", gen_args.poisson, "Poisson ratio");
  gen->add_option("--outlier-eps", gen_args.outlier_eps, "outlier strain");
  gen->add_option("--outlier-sig", gen_args.outlier_sig, "outlier stress [Pa]");
  gen->add_option("-o,--out", gen_args.out, "output CSV path")->required();

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "run a data-driven solve");
  solve->add_option("--problem", solve_args.problem_path, "problem JSON")
      ->required();
  solve->add_option("--data", solve_args.data_path, "dataset CSV")->required();
  solve->add_option("--mode", solve_args.mode, "dmdd | lcdd");
  solve->add_option("--k", solve_args.k, "neighborhood size (lcdd)");
  solve->add_option("--seed", solve_args.seed, "RNG seed");
  solve->add_option("--steps", solve_args.steps, "equal load increments");
  solve->add_option("--tol-rel", solve_args.tol_rel, "relative tolerance");
  solve->add_option("--max-iter", solve_args.max_iter, "iteration cap");
  solve->add_option("--xi-bar", solve_args.xi_bar, "partition penalty scale");
  solve->add_option("--mu-bar", solve_args.mu_bar, "ridge scale");
  solve->add_option("-o,--out", solve_args.out, "output path prefix")
      ->required();

  std::string study_config, study_out;
  CLI::App* study = app.add_subcommand("study", "run a convergence study");
  study->add_option("--config", study_config, "study JSON")->required();
  study->add_option("-o,--out", study_out, "output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (gen->parsed()) return run_gen(gen_args);
    if (solve->parsed()) return run_solve(solve_args);
    return run_study(study_config, study_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
}
