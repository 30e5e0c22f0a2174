#include "lcdd/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>
#include <thread>

#include "lcdd/rng.hpp"

namespace lcdd {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<LocalState> initial_assignment(const Discretization& disc,
                                           const MaterialDataset& data,
                                           const SolverConfig& cfg) {
  std::vector<LocalState> assigned(disc.point_count());
  if (cfg.init == SolverConfig::Init::zeros) {
    Vec zero = Vec::Zero(disc.q());
    for (auto& s : assigned) s = LocalState(zero, zero);
  } else {
    Rng rng(cfg.seed);
    for (auto& s : assigned) {
      long idx = std::min<long>(data.size() - 1,
                                static_cast<long>(rng.uniform01() * data.size()));
      s = data.state(idx);
    }
  }
  return assigned;
}

SolveReport run_steps(const Discretization& disc, const AssembledSystem& sys,
                      const MaterialDataset& data, const SolverConfig& cfg,
                      double load_factor,
                      const std::vector<LocalState>* warm_start) {
  require(data.q() == disc.q(), "run: dataset dimension mismatch");
  bool lcdd_mode = cfg.mode == Mode::lcdd;
  if (lcdd_mode)
    require(cfg.params.k <= data.size(), "run: k exceeds dataset size");
  require(cfg.max_iter >= 1 && cfg.tol_rel > 0, "run: bad solver config");

  NeighborSearch search(data, disc.metric);
  const long m = disc.point_count();
  bool track_indices = !lcdd_mode || cfg.params.k == 1;

  SolveReport report;
  std::vector<LocalState> assigned =
      warm_start ? *warm_start : initial_assignment(disc, data, cfg);

  std::set<std::vector<long>> seen;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    GlobalState gs = global_step(disc, sys, assigned, load_factor);
    report.max_equilibrium_residual =
        std::max(report.max_equilibrium_residual, gs.equilibrium_residual);
    report.max_compat_residual =
        std::max(report.max_compat_residual, gs.compat_residual);

    std::vector<LocalState> next(m);
    std::vector<long> picks(track_indices ? m : 0);
    double max_change = 0.0;
    double max_scale = 0.0;
    for (long a = 0; a < m; ++a) {
      if (lcdd_mode) {
        Neighborhood nbhd = search.query(gs.states[a], cfg.params.k);
        next[a] = convex_project(gs.states[a], nbhd, disc.metric, cfg.params).state;
        if (track_indices) picks[a] = nbhd.indices[0];
      } else {
        Neighborhood nbhd = search.query(gs.states[a], 1);
        next[a] = data.state(nbhd.indices[0]);
        picks[a] = nbhd.indices[0];
      }
      max_change = std::max(max_change, m_norm(next[a] - assigned[a], disc.metric));
      max_scale = std::max(max_scale, m_norm(next[a], disc.metric));
    }

    report.iterations = iter;
    report.trace.push_back(max_change);
    if (track_indices) report.assigned_indices.push_back(picks);
    if (iter == 1)
      report.tol_abs = cfg.tol_rel * (max_scale > 0 ? max_scale : 1.0);

    assigned = std::move(next);
    if (max_change <= report.tol_abs) {
      report.converged = true;
      break;
    }
    // the discrete assignment map revisiting a previous assignment means the
    // iteration cycles; declare convergence-by-cycle instead of spinning
    if (track_indices && !seen.insert(picks).second) {
      report.converged = true;
      report.converged_by_cycle = true;
      break;
    }
  }

  // final global step keeps states consistent with the final assignment
  GlobalState gs = global_step(disc, sys, assigned, load_factor);
  report.max_equilibrium_residual =
      std::max(report.max_equilibrium_residual, gs.equilibrium_residual);
  report.max_compat_residual =
      std::max(report.max_compat_residual, gs.compat_residual);
  report.states = std::move(gs.states);
  report.displacement = std::move(gs.displacement);
  report.assigned = std::move(assigned);
  return report;
}

}  // namespace

SolveReport run(const Discretization& disc, const MaterialDataset& data,
                const SolverConfig& cfg) {
  AssembledSystem sys(disc);
  return run_steps(disc, sys, data, cfg, 1.0, nullptr);
}

std::vector<SolveReport> incremental_load(const Discretization& disc,
                                          const MaterialDataset& data,
                                          const SolverConfig& cfg, int steps) {
  require(steps >= 1, "incremental_load: steps must be >= 1");
  AssembledSystem sys(disc);
  std::vector<SolveReport> reports;
  const std::vector<LocalState>* warm = nullptr;
  for (int j = 1; j <= steps; ++j) {
    double lf = static_cast<double>(j) / steps;
    reports.push_back(run_steps(disc, sys, data, cfg, lf, warm));
    warm = &reports.back().assigned;
  }
  return reports;
}

std::pair<double, double> rms_truss(const std::vector<LocalState>& states,
                                    const std::vector<LocalState>& reference,
                                    const std::vector<double>& lengths) {
  require(states.size() == reference.size() && states.size() == lengths.size(),
          "rms_truss: size mismatch");
  require(!states.empty(), "rms_truss: empty input");
  const double m = static_cast<double>(states.size());
  double eps_max = 0.0, sig_max = 0.0, eps_acc = 0.0, sig_acc = 0.0;
  for (size_t a = 0; a < states.size(); ++a) {
    require(states[a].q() == 1 && reference[a].q() == 1,
            "rms_truss: uniaxial states required");
    eps_max = std::max(eps_max, std::abs(reference[a].strain(0)));
    sig_max = std::max(sig_max, std::abs(reference[a].stress(0)));
    double de = states[a].strain(0) - reference[a].strain(0);
    double ds = states[a].stress(0) - reference[a].stress(0);
    eps_acc += lengths[a] * de * de;
    sig_acc += lengths[a] * ds * ds;
  }
  require(eps_max > 0 && sig_max > 0, "rms_truss: zero reference maximum");
  return {std::sqrt(eps_acc / m) / eps_max, std::sqrt(sig_acc / m) / sig_max};
}

double rms_state(const std::vector<LocalState>& states,
                 const std::vector<LocalState>& reference,
                 const Discretization& disc) {
  require(states.size() == reference.size() &&
              states.size() == disc.points.size(),
          "rms_state: size mismatch");
  double num = 0.0, den = 0.0;
  for (size_t a = 0; a < states.size(); ++a) {
    double v = disc.points[a].weight;
    double d = m_norm(states[a] - reference[a], disc.metric);
    double r = m_norm(reference[a], disc.metric);
    num += v * d * d;
    den += v * r * r;
  }
  require(den > 0, "rms_state: zero-norm reference");
  return std::sqrt(num / den);
}

std::string StudyVariant::label() const {
  if (mode == Mode::dmdd) return "dmdd";
  return "lcdd_k" + std::to_string(k);
}

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

StudyTable convergence_study(StudyProblem problem,
                             const std::vector<long>& sizes,
                             const std::vector<StudyVariant>& variants,
                             const std::vector<std::uint64_t>& seeds,
                             const StudyOptions& options) {
  require(sizes.size() >= 2, "convergence_study: need at least 2 sizes");
  require(!variants.empty() && !seeds.empty(),
          "convergence_study: empty variants or seeds");

  const bool truss = problem == StudyProblem::truss15;
  const std::string problem_name = truss ? "truss15" : "beam";

  Discretization disc =
      truss ? build_truss(truss15_topology(), options.truss_modulus)
            : build_beam(48.0, 12.0, options.beam_spacing, options.beam_youngs,
                         options.beam_poisson, options.beam_force);
  AssembledSystem sys(disc);
  GlobalState reference = model_solve(disc, sys);

  struct Task {
    size_t size_idx;
    const StudyVariant* variant;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (size_t si = 0; si < sizes.size(); ++si)
    for (const StudyVariant& v : variants)
      for (std::uint64_t seed : seeds) tasks.push_back({si, &v, seed});

  StudyTable table;
  table.rows.resize(tasks.size());

  auto run_task = [&](size_t t) {
    const Task& task = tasks[t];
    long p = sizes[task.size_idx];
    double chi;
    auto t0 = std::chrono::steady_clock::now();

    MaterialDataset data = [&]() {
      if (truss) {
        chi = 2.0 / static_cast<double>(p);
        return gen_linear_truss(p, options.truss_modulus, options.truss_eps_max,
                                {chi, task.seed});
      }
      int p_axis = static_cast<int>(std::lround(std::cbrt(double(p))));
      require(static_cast<long>(p_axis) * p_axis * p_axis == p,
              "convergence_study: beam sizes must be perfect cubes");
      chi = options.beam_noise == NoiseRule::scaled ? 0.4 / p_axis : 0.0;
      return gen_plane_stress(p_axis, options.beam_youngs, options.beam_poisson,
                              -5e-4, 5e-4, options.beam_noise, task.seed);
    }();

    SolverConfig cfg;
    cfg.mode = task.variant->mode;
    cfg.params.k = task.variant->k;
    cfg.params.xi_bar = options.xi_bar;
    cfg.params.mu_bar = options.mu_bar;
    cfg.tol_rel = options.tol_rel;
    cfg.max_iter = options.max_iter;
    cfg.seed = task.seed + 1;

    SolveReport report = run(disc, data, cfg);
    double error =
        truss ? rms_truss(report.states, reference.states, disc.member_length)
                    .first
              : rms_state(report.states, reference.states, disc);
    double wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    table.rows[t] = {problem_name,
                     task.variant->mode,
                     task.variant->k,
                     p,
                     chi,
                     task.seed,
                     error,
                     report.iterations,
                     report.converged,
                     wall_ms};
  };

  int threads = options.threads == 0
                    ? static_cast<int>(std::thread::hardware_concurrency())
                    : options.threads;
  threads = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
  if (threads == 1) {
    for (size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> cursor{0};
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (size_t t = cursor.fetch_add(1); t < tasks.size();
             t = cursor.fetch_add(1))
          run_task(t);
      });
    for (auto& th : pool) th.join();
  }

  for (const StudyVariant& v : variants) {
    std::string label = v.label();
    std::vector<double> log_size, log_err;
    for (long p : sizes) {
      std::vector<double> errs, iters;
      for (const StudyRun& row : table.rows)
        if (row.mode == v.mode && row.k == v.k && row.p == p) {
          errs.push_back(row.error);
          iters.push_back(static_cast<double>(row.iterations));
        }
      double med = median(errs);
      table.median_errors[label][p] = med;
      table.median_iterations[label][p] = median(iters);
      double axis = truss ? static_cast<double>(p) : std::cbrt(double(p));
      log_size.push_back(std::log10(axis));
      log_err.push_back(std::log10(std::max(med, 1e-300)));
    }
    table.slopes[label] = fit_slope(log_size, log_err);
  }
  return table;
}

}  // namespace lcdd
