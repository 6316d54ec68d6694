#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qsdw/diagnostics.hpp"
#include "qsdw/variants.hpp"

namespace qsdw {

enum class InitialPreset { zero, smooth, random_spectral, rough_velocity };

std::string initial_preset_name(InitialPreset p);
InitialPreset initial_preset_from_name(const std::string& name);

// smooth:          u_k = amplitudes[i] at mode i+1 (axis 0; remaining axis
//                  index 1 in 2D), v = 0.
// random_spectral: u_k = xi_k |k|^{-sigma}, xi keyed by (seed, mode index),
//                  v = 0.
// rough_velocity:  1D only. u as in smooth; v_k = xi_k k^{-0.51}, normalized
//                  so the truncation to modes <= normalize_at_N has unit L2
//                  norm (resolution-stable leading modes).
// magnitude scales both components.
struct InitialSpec {
  InitialPreset preset = InitialPreset::smooth;
  std::vector<double> amplitudes{1.0};
  double magnitude = 1.0;
  std::uint64_t seed = 1;
  double sigma = 2.0;
  int normalize_at_N = -1;  // -1: resolved to the run's base N
};

struct GridSpec {
  int dim = 1;
  int N = 64;
  int M = -1;  // -1: ceil(3N/2)
  std::vector<double> lengths;  // empty: pi per axis
};

struct ForcingSpec {
  enum class Kind { zero, mode } kind = Kind::zero;
  std::array<int, 2> k{1, 1};
  double amplitude = 0.0;
};

struct TimeSpec {
  double dt = 1e-3;
  double T = 1.0;
  int cadence = 1;
  Scheme scheme = Scheme::midpoint;
  double tol = 1e-12;
  int max_iter = 50;
};

struct EquationParams {
  Family family = Family::main;
  double gamma = 1.0;
  double alpha = 1.0;
  double kirchhoff_m = 1.0;
  bool limit_case_p5 = false;
  double p = 1.0;
  double q = 1.0;
  double C_f = 0.0;
  PhiKind phi_kind = PhiKind::power;
  FKind f_kind = FKind::power;
};

struct ExperimentConfig {
  std::string experiment = "dissipativity";
  GridSpec grid;
  EquationParams eq;
  ForcingSpec forcing;
  TimeSpec time;
  InitialSpec initial;

  // dissipativity
  std::vector<double> magnitudes{0.1, 1.0, 10.0};
  double passage_threshold = 1e-4;
  // lipschitz
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
  // smoothing
  std::vector<double> probe_times{0.01, 0.05, 0.1, 0.5, 1.0};
  int refined_N = -1;       // -1: 2N
  double fit_window = 0.1;  // log-log blow-up fit uses samples in (0, fit_window]
  // splitting
  double L_shift = -1.0;  // < 0: auto, C_hat + 1 from validate_conditions
  double consistency_tol = 1e-6;
  // strong_norm
  bool limit_diag = false;
  // convergence
  std::vector<double> conv_dts;
  std::vector<int> conv_Ns;
  int reference_N = -1;  // -1: 2 * max(conv_Ns)

  // provenance, filled by the config loader
  std::string config_hash;
  std::string resolved_text;

  // Fill derived defaults and validate cross-field consistency.
  void resolve();
};

BasisPtr make_basis(const ExperimentConfig& cfg);
BasisPtr make_basis_at(const ExperimentConfig& cfg, int N);
EquationSpec make_equation(const ExperimentConfig& cfg, const BasisPtr& basis);
State make_initial(const ExperimentConfig& cfg, const BasisPtr& basis);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

enum class CheckKind { physics, numerical };

struct CheckRecord {
  std::string name;
  CheckKind kind = CheckKind::physics;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct FitRecord {
  std::string name;
  FitResult fit;
};

struct RunResult {
  std::string experiment;
  std::map<std::string, Table> tables;
  std::string primary_table;  // table doubling as timeseries.csv (may be empty)
  std::vector<FitRecord> fits;
  std::vector<CheckRecord> checks;

  std::string config_hash;
  std::uint64_t seed = 0;
  std::string scheme;
  std::string family;
  double dt = 0.0;
  double T = 0.0;
  int N = 0;
  int dim = 1;
  double wall_ms = 0.0;

  bool all_passed() const;
  bool numerical_failure() const;  // any failed check of numerical kind
};

// The standard per-run time series shared by every driver:
// t, E, modified_E, energy_norm, h1_u, h2_u, h1_dtu, hm1_dtdtu, balance_residual.
Table make_timeseries_table(const Trajectory& traj, const EquationSpec& eq);

RunResult run_dissipativity(const ExperimentConfig& cfg);
RunResult run_lipschitz(const ExperimentConfig& cfg);
RunResult run_smoothing(const ExperimentConfig& cfg);
RunResult run_splitting(const ExperimentConfig& cfg);
RunResult run_strong_norm(const ExperimentConfig& cfg);
RunResult run_convergence(const ExperimentConfig& cfg);

// Dispatch on cfg.experiment.
RunResult run_experiment(const ExperimentConfig& cfg);

// Sweep parallelism cap: QSDW_THREADS if set, else hardware concurrency.
int thread_cap();

}  // namespace qsdw
