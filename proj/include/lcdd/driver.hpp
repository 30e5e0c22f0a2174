#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lcdd/assembly.hpp"
#include "lcdd/datagen.hpp"
#include "lcdd/nnls.hpp"

namespace lcdd {

enum class Mode { dmdd, lcdd };

struct SolverConfig {
  enum class Init { random_data_point, zeros };

  Mode mode = Mode::lcdd;
  SolverParams params;
  double tol_rel = 1e-8;  // relative to the first local-step assignment scale
  int max_iter = 10000;
  Init init = Init::random_data_point;
  std::uint64_t seed = 0;
  int load_steps = 1;
};

struct SolveReport {
  std::vector<LocalState> states;    // converged physical states
  std::vector<LocalState> assigned;  // final data assignments s_hat*
  Vec displacement;
  int iterations = 0;
  bool converged = false;
  bool converged_by_cycle = false;
  std::vector<double> trace;  // per-iteration max assignment change (M-norm)
  double tol_abs = 0.0;
  double max_equilibrium_residual = 0.0;  // worst iterate, relative
  double max_compat_residual = 0.0;
  // nearest-data index per point per iteration; recorded for dmdd and
  // for lcdd with k = 1 (where the two solvers coincide)
  std::vector<std::vector<long>> assigned_indices;
};

/// Fixed-point data-driven iteration: global step alternating with the local
/// step (nearest point for dmdd, k-NN + convex projection for lcdd) until the
/// max per-point assignment change drops below tolerance. Non-convergence is
/// reported, not thrown.
SolveReport run(const Discretization& disc, const MaterialDataset& data,
                const SolverConfig& cfg);

/// Load scaled by j/steps for j = 1..steps, each step warm-started from the
/// previous converged assignment.
std::vector<SolveReport> incremental_load(const Discretization& disc,
                                          const MaterialDataset& data,
                                          const SolverConfig& cfg, int steps);

/// Normalized RMS strain and stress errors for truss problems, weighted by
/// member length and scaled by the reference maxima.
std::pair<double, double> rms_truss(const std::vector<LocalState>& states,
                                    const std::vector<LocalState>& reference,
                                    const std::vector<double>& lengths);

/// Volume-weighted normalized RMS state error in the metric norm.
double rms_state(const std::vector<LocalState>& states,
                 const std::vector<LocalState>& reference,
                 const Discretization& disc);

enum class StudyProblem { truss15, beam };

struct StudyVariant {
  Mode mode = Mode::dmdd;
  int k = 1;
  std::string label() const;
};

struct StudyRun {
  std::string problem;
  Mode mode;
  int k;
  long p;
  double chi;
  std::uint64_t seed;
  double error;
  int iterations;
  bool converged;
  double wall_ms;
};

struct StudyTable {
  std::vector<StudyRun> rows;
  std::map<std::string, double> slopes;  // fitted log-log error slope
  /// median error per (variant label, size)
  std::map<std::string, std::map<long, double>> median_errors;
  std::map<std::string, std::map<long, double>> median_iterations;
};

struct StudyOptions {
  double tol_rel = 1e-8;
  int max_iter = 10000;
  double xi_bar = 1e5;
  double mu_bar = 1e-4;
  int threads = 1;  // 0 = hardware concurrency
  // truss study: linear dataset, chi = 2/p
  double truss_modulus = 100e6;
  double truss_eps_max = 0.01;
  // beam study
  double beam_spacing = 2.0;
  double beam_youngs = 30e6;
  double beam_poisson = 0.3;
  double beam_force = 1000.0;
  NoiseRule beam_noise = NoiseRule::none;
};

/// End-to-end convergence study: fresh seeded dataset per (size, seed),
/// every variant solved against the model-based reference on the same
/// discretization; log-log slope fitted on median errors (vs p for truss,
/// vs cbrt(p) for the beam).
StudyTable convergence_study(StudyProblem problem,
                             const std::vector<long>& sizes,
                             const std::vector<StudyVariant>& variants,
                             const std::vector<std::uint64_t>& seeds,
                             const StudyOptions& options);

}  // namespace lcdd
