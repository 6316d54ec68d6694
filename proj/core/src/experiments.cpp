#include "qsdw/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "qsdw/modal.hpp"
#include "qsdw/rng.hpp"

namespace qsdw {

std::string initial_preset_name(InitialPreset p) {
  switch (p) {
    case InitialPreset::zero: return "zero";
    case InitialPreset::smooth: return "smooth";
    case InitialPreset::random_spectral: return "random_spectral";
    case InitialPreset::rough_velocity: return "rough_velocity";
  }
  return "?";
}

InitialPreset initial_preset_from_name(const std::string& name) {
  if (name == "zero") return InitialPreset::zero;
  if (name == "smooth") return InitialPreset::smooth;
  if (name == "random_spectral") return InitialPreset::random_spectral;
  if (name == "rough_velocity") return InitialPreset::rough_velocity;
  throw ConfigError("unknown initial preset '" + name + "'");
}

int thread_cap() {
  if (const char* env = std::getenv("QSDW_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// Runs f(0..n-1), possibly on several threads; results must be written into
// index-addressed slots so the outcome is order-independent.
void parallel_for(int n, const std::function<void(int)>& f) {
  const int threads = std::min(thread_cap(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void add_check(RunResult& res, const std::string& name, CheckKind kind, bool pass,
               double measured, double threshold, std::string note = {}) {
  res.checks.push_back({name, kind, pass, measured, threshold, std::move(note)});
}

void add_fit(RunResult& res, const std::string& name, const FitResult& fit) {
  res.fits.push_back({name, fit});
}

double max_over_window(const Trajectory& traj, double t_lo, double t_hi,
                       const std::function<double(const Sample&)>& f) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& s : traj.samples)
    if (s.state.t >= t_lo && s.state.t <= t_hi) m = std::max(m, f(s));
  return m;
}

RunResult make_result_shell(const ExperimentConfig& cfg) {
  RunResult res;
  res.experiment = cfg.experiment;
  res.config_hash = cfg.config_hash;
  res.seed = cfg.initial.seed;
  res.scheme = scheme_name(cfg.time.scheme);
  res.family = family_name(cfg.eq.family);
  res.dt = cfg.time.dt;
  res.T = cfg.time.T;
  res.N = cfg.grid.N;
  res.dim = cfg.grid.dim;
  return res;
}

IntegrateOptions integrate_options(const ExperimentConfig& cfg) {
  IntegrateOptions opt;
  opt.tol = cfg.time.tol;
  opt.max_iter = cfg.time.max_iter;
  return opt;
}

State scaled_state(const State& s, double c) {
  return State(c * s.u, c * s.v, s.t);
}

Trajectory subsample(const Trajectory& traj, int cadence) {
  if (cadence <= 1) return traj;
  Trajectory out;
  out.dt = traj.dt;
  out.cadence = traj.cadence * cadence;
  out.scheme = traj.scheme;
  for (std::size_t i = 0; i < traj.samples.size(); i += static_cast<std::size_t>(cadence))
    out.samples.push_back(traj.samples[i]);
  return out;
}

std::vector<double> sample_times(const Trajectory& traj) {
  std::vector<double> t;
  t.reserve(traj.samples.size());
  for (const auto& s : traj.samples) t.push_back(s.state.t);
  return t;
}

}  // namespace

void ExperimentConfig::resolve() {
  static const std::vector<std::string> known = {"dissipativity", "lipschitz", "smoothing",
                                                 "splitting",     "strong_norm", "convergence"};
  if (std::find(known.begin(), known.end(), experiment) == known.end())
    throw ConfigError("unknown experiment '" + experiment +
                      "' (expected dissipativity, lipschitz, smoothing, splitting, "
                      "strong_norm, or convergence)");

  if (grid.M < 0) grid.M = (3 * grid.N + 1) / 2;
  if (!(time.dt > 0.0)) throw ConfigError("time.dt must be positive");
  if (!(time.T > 0.0)) throw ConfigError("time.T must be positive");
  if (time.cadence < 1) throw ConfigError("time.cadence must be >= 1");
  if (!(time.tol > 0.0)) throw ConfigError("time.tol must be positive");
  if (time.max_iter < 1) throw ConfigError("time.max_iter must be >= 1");

  if (initial.preset == InitialPreset::rough_velocity && grid.dim != 1)
    throw ConfigError("initial preset rough_velocity is 1D only");
  if (initial.normalize_at_N < 0) initial.normalize_at_N = grid.N;
  if (!(initial.magnitude >= 0.0)) throw ConfigError("initial.magnitude must be >= 0");

  if (experiment == "dissipativity") {
    if (magnitudes.empty()) throw ConfigError("dissipativity needs at least one magnitude");
    for (double m : magnitudes)
      if (!(m > 0.0)) throw ConfigError("dissipativity.magnitudes must be positive");
  }
  if (experiment == "lipschitz") {
    if (epsilons.empty()) throw ConfigError("lipschitz needs at least one epsilon");
    for (double e : epsilons)
      if (!(e > 0.0)) throw ConfigError("lipschitz.epsilons must be positive");
  }
  if (experiment == "smoothing") {
    if (refined_N < 0) refined_N = 2 * grid.N;
    if (refined_N <= grid.N)
      throw ConfigError("smoothing.refined_N must exceed grid.N");
    if (probe_times.empty()) throw ConfigError("smoothing needs at least one probe time");
    const double stride = time.dt * time.cadence;
    for (double tau : probe_times) {
      if (!(tau > 0.0 && tau <= time.T))
        throw ConfigError("smoothing.probe_times must lie in (0, T]");
      const double idx = tau / stride;
      if (std::abs(idx - std::llround(idx)) > 1e-6)
        throw ConfigError("smoothing.probe_times must land on sample times (dt*cadence grid)");
    }
    if (!(fit_window > 0.0)) throw ConfigError("smoothing.fit_window must be positive");
  }
  if (experiment == "splitting") {
    if (eq.family != Family::main)
      throw ConfigError("splitting is defined for the main family only");
    if (time.scheme != Scheme::midpoint)
      throw ConfigError("splitting requires time.scheme = midpoint");
    if (!(consistency_tol > 0.0)) throw ConfigError("splitting.consistency_tol must be positive");
    const long long steps = std::llround(time.T / time.dt);
    if (steps > 0 && steps % time.cadence != 0)
      throw ConfigError("splitting: time.cadence must divide the step count");
  }
  if (experiment == "convergence") {
    if (conv_dts.empty() && conv_Ns.empty()) conv_dts = {1e-2, 5e-3, 2.5e-3};
    for (double d : conv_dts)
      if (!(d > 0.0)) throw ConfigError("convergence.dts must be positive");
    if (!conv_Ns.empty()) {
      for (int n : conv_Ns)
        if (n < 1) throw ConfigError("convergence.Ns must be >= 1");
      if (reference_N < 0) reference_N = 2 * *std::max_element(conv_Ns.begin(), conv_Ns.end());
      if (reference_N <= *std::max_element(conv_Ns.begin(), conv_Ns.end()))
        throw ConfigError("convergence.reference_N must exceed every study resolution");
    }
  }
}

BasisPtr make_basis(const ExperimentConfig& cfg) { return make_basis_at(cfg, cfg.grid.N); }

BasisPtr make_basis_at(const ExperimentConfig& cfg, int N) {
  int M = -1;
  if (N == cfg.grid.N && cfg.grid.M >= 0) M = cfg.grid.M;
  return build_basis(cfg.grid.dim, N, cfg.grid.lengths, M);
}

EquationSpec make_equation(const ExperimentConfig& cfg, const BasisPtr& basis) {
  EquationSpec eq;
  eq.family = cfg.eq.family;
  eq.gamma = cfg.eq.gamma;
  eq.alpha = cfg.eq.alpha;
  eq.kirchhoff_m = cfg.eq.kirchhoff_m;
  eq.limit_case_p5 = cfg.eq.limit_case_p5;
  eq.nl.p = cfg.eq.p;
  eq.nl.q = cfg.eq.q;
  eq.nl.C_f = cfg.eq.C_f;
  eq.nl.phi_kind = cfg.eq.phi_kind;
  eq.nl.f_kind = cfg.eq.f_kind;
  if (cfg.forcing.kind == ForcingSpec::Kind::mode) {
    Field g(basis);
    g.coeffs[basis->flat_mode(cfg.forcing.k[0], cfg.forcing.k[1])] = cfg.forcing.amplitude;
    eq.g = std::move(g);
  }
  eq.validate();
  return eq;
}

State make_initial(const ExperimentConfig& cfg, const BasisPtr& basis) {
  const InitialSpec& init = cfg.initial;
  Field u(basis), v(basis);
  const int N = basis->modes_per_axis();

  auto apply_smooth_amplitudes = [&](Field& f) {
    if (static_cast<int>(init.amplitudes.size()) > N)
      throw ConfigError("initial.amplitudes has more entries than modes per axis");
    for (std::size_t i = 0; i < init.amplitudes.size(); ++i)
      f.coeffs[basis->flat_mode(static_cast<int>(i) + 1, 1)] = init.amplitudes[i];
  };

  switch (init.preset) {
    case InitialPreset::zero:
      break;
    case InitialPreset::smooth:
      apply_smooth_amplitudes(u);
      break;
    case InitialPreset::random_spectral: {
      if (basis->dim() == 1) {
        for (int k = 1; k <= N; ++k)
          u.coeffs[k - 1] = keyed_normal(init.seed, static_cast<std::uint64_t>(k)) *
                            std::pow(static_cast<double>(k), -init.sigma);
      } else {
        for (int k1 = 1; k1 <= N; ++k1)
          for (int k0 = 1; k0 <= N; ++k0) {
            const std::uint64_t key =
                static_cast<std::uint64_t>(k0) + (static_cast<std::uint64_t>(k1) << 20);
            const double kk = std::hypot(static_cast<double>(k0), static_cast<double>(k1));
            u.coeffs[basis->flat_mode(k0, k1)] =
                keyed_normal(init.seed, key) * std::pow(kk, -init.sigma);
          }
      }
      break;
    }
    case InitialPreset::rough_velocity: {
      if (basis->dim() != 1)
        throw ConfigError("initial preset rough_velocity is 1D only");
      apply_smooth_amplitudes(u);
      const int n_ref = init.normalize_at_N > 0 ? init.normalize_at_N : N;
      double ref_sq = 0.0;
      for (int k = 1; k <= n_ref; ++k) {
        const double c = keyed_normal(init.seed, static_cast<std::uint64_t>(k)) *
                         std::pow(static_cast<double>(k), -0.51);
        ref_sq += c * c;
      }
      const double scale = 1.0 / std::sqrt(basis->mode_l2sq() * ref_sq);
      for (int k = 1; k <= N; ++k)
        v.coeffs[k - 1] = scale * keyed_normal(init.seed, static_cast<std::uint64_t>(k)) *
                          std::pow(static_cast<double>(k), -0.51);
      break;
    }
  }

  u.coeffs *= init.magnitude;
  v.coeffs *= init.magnitude;
  return State(std::move(u), std::move(v), 0.0);
}

bool RunResult::all_passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

bool RunResult::numerical_failure() const {
  for (const auto& c : checks)
    if (!c.pass && c.kind == CheckKind::numerical) return true;
  return false;
}

Table make_timeseries_table(const Trajectory& traj, const EquationSpec& eq) {
  Table tab;
  tab.columns = {"t",    "E",    "modified_E", "energy_norm",  "h1_u",
                 "h2_u", "h1_dtu", "hm1_dtdtu", "balance_residual"};
  const BalanceSeries bal = balance_residual(traj, eq);
  tab.rows.reserve(traj.samples.size());
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const State& s = traj.samples[i].state;
    const EnergyReport rep = energy_report(s, eq);
    const Field ddu = rhs_accel(s, eq);
    tab.rows.push_back({s.t, rep.total, rep.modified_total, energy_norm(s, eq),
                        sobolev_norm(s.u, 1.0), sobolev_norm(s.u, 2.0), sobolev_norm(s.v, 1.0),
                        sobolev_norm(ddu, -1.0), i == 0 ? 0.0 : bal.r[i - 1]});
  }
  return tab;
}

// ---------------------------------------------------------------------------
// dissipativity

RunResult run_dissipativity(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res = make_result_shell(cfg);

  BasisPtr basis = make_basis(cfg);
  const EquationSpec eq = make_equation(cfg, basis);
  const State s0 = make_initial(cfg, basis);
  const IntegrateOptions opt = integrate_options(cfg);

  const int n_runs = static_cast<int>(cfg.magnitudes.size());
  std::vector<Trajectory> trajs(static_cast<std::size_t>(n_runs));
  parallel_for(n_runs, [&](int i) {
    trajs[static_cast<std::size_t>(i)] =
        integrate(scaled_state(s0, cfg.magnitudes[static_cast<std::size_t>(i)]), eq, cfg.time.dt,
                  cfg.time.T, cfg.time.cadence, cfg.time.scheme, opt);
  });

  const bool coercive_unforced = !eq.has_forcing() && eq.nl.C_f == 0.0;

  Table summary;
  summary.columns = {"magnitude", "terminal_energy_norm", "first_passage_t", "fit_rate",
                     "fit_r_squared"};

  std::vector<double> passages;
  std::vector<double> terminal;
  res.primary_table = "run0_timeseries";
  for (int i = 0; i < n_runs; ++i) {
    const Trajectory& traj = trajs[static_cast<std::size_t>(i)];
    res.tables["run" + std::to_string(i) + "_timeseries"] = make_timeseries_table(traj, eq);

    std::vector<double> t, en;
    for (const auto& s : traj.samples) {
      t.push_back(s.state.t);
      en.push_back(energy_norm(s.state, eq));
    }
    terminal.push_back(en.back());

    if (coercive_unforced) {
      double max_rise = 0.0;
      double e_prev = energy_report(traj.samples.front().state, eq).total;
      for (std::size_t j = 1; j < traj.samples.size(); ++j) {
        const double e = energy_report(traj.samples[j].state, eq).total;
        max_rise = std::max(max_rise, e - e_prev);
        e_prev = e;
      }
      add_check(res, "energy.non_increasing.run" + std::to_string(i), CheckKind::physics,
                max_rise <= 1e-10, max_rise, 1e-10);
    }

    double passage = -1.0;
    if (!eq.has_forcing()) {
      for (std::size_t j = 0; j < en.size(); ++j)
        if (en[j] < cfg.passage_threshold) {
          passage = t[j];
          break;
        }
    }
    passages.push_back(passage);

    FitResult fit{};
    bool have_fit = false;
    if (!eq.has_forcing()) {
      // Decay rate of sqrt(energy_norm), late window so transients are gone.
      std::vector<double> tw, yw;
      for (std::size_t j = 0; j < t.size(); ++j)
        if (t[j] >= 0.5 * cfg.time.T && en[j] > 0.0) {
          tw.push_back(t[j]);
          yw.push_back(std::sqrt(en[j]));
        }
      if (tw.size() >= 10) {
        fit = fit_decay(tw, yw);
        have_fit = true;
        add_fit(res, "dissipativity.decay.run" + std::to_string(i), fit);
      }
    } else {
      // Approach rate toward the terminal level.
      const double e_T = en.back();
      std::vector<double> tw, yw;
      for (std::size_t j = 0; j < t.size(); ++j) {
        const double gap = std::abs(en[j] - e_T);
        if (t[j] <= 0.9 * cfg.time.T && gap > 1e-10 * (1.0 + e_T)) {
          tw.push_back(t[j]);
          yw.push_back(gap);
        }
      }
      if (tw.size() >= 10) {
        fit = fit_decay(tw, yw);
        have_fit = true;
        add_fit(res, "dissipativity.approach.run" + std::to_string(i), fit);
        add_check(res, "dissipativity.approach_positive.run" + std::to_string(i),
                  CheckKind::physics, fit.rate > 0.0, fit.rate, 0.0);
      }
    }

    summary.rows.push_back({cfg.magnitudes[static_cast<std::size_t>(i)], en.back(), passage,
                            have_fit ? fit.rate : 0.0, have_fit ? fit.r_squared : 0.0});
  }
  res.tables["dissipativity_summary"] = std::move(summary);

  if (!eq.has_forcing()) {
    bool all_found = std::all_of(passages.begin(), passages.end(),
                                 [](double p) { return p >= 0.0; });
    // Passage times must be ordered like the magnitudes (monotone data).
    std::vector<std::size_t> order(passages.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return cfg.magnitudes[a] < cfg.magnitudes[b];
    });
    bool ordered = all_found;
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < order.size() && ordered; ++i) {
      const double gap = passages[order[i + 1]] - passages[order[i]];
      min_gap = std::min(min_gap, gap);
      if (gap < 0.0) ordered = false;
    }
    if (passages.size() >= 2)
      add_check(res, "dissipativity.passage_ordered", CheckKind::physics, ordered,
                min_gap == std::numeric_limits<double>::infinity() ? -1.0 : min_gap, 0.0,
                all_found ? "" : "some runs never reached the passage threshold");

    if (eq.is_linear()) {
      // Expected asymptotic rate: slowest modal slow-root over the retained band.
      const Vec& lam = basis->eigenvalues();
      double expected = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < lam.size(); ++k) {
        double stiff, damp;
        modal_coeffs(eq, lam[k], &stiff, &damp);
        expected = std::min(expected, std::abs(slow_root_real(damp, stiff)));
      }
      for (const auto& f : res.fits) {
        if (f.name.rfind("dissipativity.decay.", 0) == 0) {
          const double rel = std::abs(f.fit.rate - expected) / expected;
          add_check(res, "dissipativity.linear_rate_match." +
                             f.name.substr(std::string("dissipativity.decay.").size()),
                    CheckKind::physics, rel <= 0.05, rel, 0.05,
                    "expected " + std::to_string(expected));
        }
      }
    }
  } else {
    const double mx = *std::max_element(terminal.begin(), terminal.end());
    const double mn = *std::min_element(terminal.begin(), terminal.end());
    const double mean = std::accumulate(terminal.begin(), terminal.end(), 0.0) /
                        static_cast<double>(terminal.size());
    const double spread = mean > 0.0 ? (mx - mn) / mean : 0.0;
    add_check(res, "dissipativity.terminal_band", CheckKind::physics, spread <= 0.10, spread,
              0.10);
  }

  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

// ---------------------------------------------------------------------------
// lipschitz

RunResult run_lipschitz(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res = make_result_shell(cfg);

  BasisPtr basis = make_basis(cfg);
  const EquationSpec eq = make_equation(cfg, basis);
  const State s0 = make_initial(cfg, basis);
  const IntegrateOptions opt = integrate_options(cfg);

  const int n_eps = static_cast<int>(cfg.epsilons.size());
  std::vector<Trajectory> trajs(static_cast<std::size_t>(n_eps) + 1);
  parallel_for(n_eps + 1, [&](int i) {
    State init = s0;
    if (i > 0) {
      init.u.coeffs = s0.u.coeffs;
      init.u.coeffs[0] += cfg.epsilons[static_cast<std::size_t>(i - 1)];
    }
    trajs[static_cast<std::size_t>(i)] =
        integrate(init, eq, cfg.time.dt, cfg.time.T, cfg.time.cadence, cfg.time.scheme, opt);
  });

  const auto [k1, k2] = e_minus1_constants(eq.gamma, basis->lambda1());

  res.primary_table = "base_timeseries";
  res.tables["base_timeseries"] = make_timeseries_table(trajs[0], eq);

  Table summary;
  summary.columns = {"epsilon", "m_initial", "m_final", "ratio", "fit_rate", "fit_r_squared"};

  std::vector<double> ratios;
  for (int i = 0; i < n_eps; ++i) {
    const Trajectory& base = trajs[0];
    const Trajectory& pert = trajs[static_cast<std::size_t>(i) + 1];

    Table diff;
    diff.columns = {"t", "l2", "h1", "hm1_dt", "e_minus1", "m"};
    std::vector<double> t, m_series;
    double envelope_violation = 0.0;
    for (std::size_t j = 0; j < base.samples.size(); ++j) {
      const DiffMetrics dm =
          diff_metrics(pert.samples[j].state, base.samples[j].state, eq.gamma);
      const double m = dm.hm1_dt * dm.hm1_dt + dm.h1 * dm.h1;
      diff.rows.push_back({base.samples[j].state.t, dm.l2, dm.h1, dm.hm1_dt, dm.e_minus1, m});
      t.push_back(base.samples[j].state.t);
      m_series.push_back(m);
      if (m > 0.0) {
        const double low = (k1 * m - dm.e_minus1) / (k2 * m);
        const double high = (dm.e_minus1 - k2 * m) / (k2 * m);
        envelope_violation = std::max({envelope_violation, low, high});
      }
    }
    res.tables["eps" + std::to_string(i) + "_difference"] = std::move(diff);

    add_check(res, "diff.envelope.eps" + std::to_string(i), CheckKind::physics,
              envelope_violation <= 1e-9, envelope_violation, 1e-9);

    const double ratio = m_series.back() / m_series.front();
    ratios.push_back(ratio);

    FitResult fit{};
    if (m_series.size() >= 10 &&
        std::all_of(m_series.begin(), m_series.end(), [](double m) { return m > 0.0; })) {
      fit = fit_decay(t, m_series);
      add_fit(res, "lipschitz.m_decay.eps" + std::to_string(i), fit);
    }
    summary.rows.push_back({cfg.epsilons[static_cast<std::size_t>(i)], m_series.front(),
                            m_series.back(), ratio, fit.rate, fit.r_squared});
  }
  res.tables["lipschitz_summary"] = std::move(summary);

  if (ratios.size() >= 2) {
    const double mx = *std::max_element(ratios.begin(), ratios.end());
    const double mn = *std::min_element(ratios.begin(), ratios.end());
    add_check(res, "lipschitz.ratio_band", CheckKind::physics, mx / mn <= 2.0, mx / mn, 2.0);
    if (eq.is_linear())
      add_check(res, "lipschitz.linear_spread", CheckKind::physics, mx / mn - 1.0 <= 1e-8,
                mx / mn - 1.0, 1e-8);
  }

  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

// ---------------------------------------------------------------------------
// smoothing

RunResult run_smoothing(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res = make_result_shell(cfg);

  BasisPtr basis_lo = make_basis(cfg);
  BasisPtr basis_hi = make_basis_at(cfg, cfg.refined_N);
  const EquationSpec eq_lo = make_equation(cfg, basis_lo);
  const EquationSpec eq_hi = make_equation(cfg, basis_hi);
  const State s0_lo = make_initial(cfg, basis_lo);
  const State s0_hi = make_initial(cfg, basis_hi);
  const IntegrateOptions opt = integrate_options(cfg);

  std::array<Trajectory, 2> trajs;
  parallel_for(2, [&](int i) {
    if (i == 0)
      trajs[0] = integrate(s0_lo, eq_lo, cfg.time.dt, cfg.time.T, cfg.time.cadence,
                           cfg.time.scheme, opt);
    else
      trajs[1] = integrate(s0_hi, eq_hi, cfg.time.dt, cfg.time.T, cfg.time.cadence,
                           cfg.time.scheme, opt);
  });

  res.primary_table = "base_timeseries";
  res.tables["base_timeseries"] = make_timeseries_table(trajs[0], eq_lo);
  res.tables["refined_timeseries"] = make_timeseries_table(trajs[1], eq_hi);

  const double stride = cfg.time.dt * cfg.time.cadence;
  Table probes;
  probes.columns = {"tau",          "h1_dtu_base", "h1_dtu_refined", "h1_rel_diff",
                    "hm1_ddu_base", "hm1_ddu_refined", "hm1_rel_diff"};
  double max_rel_h1 = 0.0;
  bool all_finite = true;
  for (double tau : cfg.probe_times) {
    const std::size_t idx = static_cast<std::size_t>(std::llround(tau / stride));
    const State& a = trajs[0].samples.at(idx).state;
    const State& b = trajs[1].samples.at(idx).state;
    const double h1a = sobolev_norm(a.v, 1.0);
    const double h1b = sobolev_norm(b.v, 1.0);
    const double ma = sobolev_norm(rhs_accel(a, eq_lo), -1.0);
    const double mb = sobolev_norm(rhs_accel(b, eq_hi), -1.0);
    const double rel_h1 = std::abs(h1b - h1a) / std::max(h1a, 1e-300);
    const double rel_m = std::abs(mb - ma) / std::max(ma, 1e-300);
    probes.rows.push_back({tau, h1a, h1b, rel_h1, ma, mb, rel_m});
    max_rel_h1 = std::max(max_rel_h1, rel_h1);
    all_finite = all_finite && std::isfinite(h1a) && std::isfinite(h1b) && std::isfinite(ma) &&
                 std::isfinite(mb);
  }
  res.tables["smoothing_probes"] = std::move(probes);

  add_check(res, "smoothing.probe_finite", CheckKind::numerical, all_finite,
            all_finite ? 1.0 : 0.0, 1.0);
  add_check(res, "smoothing.probe_h1_stable", CheckKind::physics, max_rel_h1 <= 0.02,
            max_rel_h1, 0.02);

  if (cfg.initial.preset == InitialPreset::rough_velocity) {
    const double r0 = sobolev_norm(s0_lo.v, 1.0);
    const double r1 = sobolev_norm(s0_hi.v, 1.0);
    const double growth = r1 / std::max(r0, 1e-300) - 1.0;
    add_check(res, "smoothing.initial_roughness", CheckKind::physics, growth >= 0.40, growth,
              0.40, "relative H1 growth of the refined initial velocity");
  }

  // Log-log slope of ||u_t||_{H^1} near t = 0; reported, not asserted. The
  // window bound is index-based: accumulated time stamps drift by ulps, which
  // must not drop the boundary sample.
  {
    const long long j_max = std::llround(cfg.fit_window / stride);
    std::vector<double> lt, y;
    for (long long j = 1;
         j <= j_max && j < static_cast<long long>(trajs[0].samples.size()); ++j) {
      const auto& s = trajs[0].samples[static_cast<std::size_t>(j)];
      const double h1 = sobolev_norm(s.state.v, 1.0);
      if (s.state.t > 0.0 && h1 > 0.0) {
        lt.push_back(std::log(s.state.t));
        y.push_back(h1);
      }
    }
    if (lt.size() >= 10) {
      FitResult loglog = fit_decay(lt, y);
      FitResult exponent = loglog;
      exponent.rate = 2.0 * loglog.rate;  // ||u_t||_{H^1} ~ t^{-rate/2}
      add_fit(res, "smoothing.blowup_exponent", exponent);
    }
  }

  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

// ---------------------------------------------------------------------------
// splitting

RunResult run_splitting(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res = make_result_shell(cfg);

  BasisPtr basis = make_basis(cfg);
  const EquationSpec eq = make_equation(cfg, basis);
  const State s0 = make_initial(cfg, basis);
  const IntegrateOptions opt = integrate_options(cfg);

  double L = cfg.L_shift;
  if (L < 0.0) L = validate_conditions(eq.nl).C_hat + 1.0;

  // Dense base run; the splitting marches in lockstep with its steps.
  Trajectory full = integrate(s0, eq, cfg.time.dt, cfg.time.T, 1, Scheme::midpoint, opt);
  const std::size_t steps = full.samples.size() - 1;

  EquationSpec eq_plain = eq;
  eq_plain.g = Field();
  auto nl_of = [&](const Field& x) {
    Field n = nonlinear_accel(x, eq_plain);
    n.coeffs = -n.coeffs;  // f(x) - div phi'(grad x)
    return n;
  };

  Field w(basis);               // starts from zero
  Field v = s0.u;               // carries the initial displacement
  Field g_field = eq.has_forcing() ? eq.g : Field(basis);

  Table series;
  series.columns = {"t", "consistency_l2", "w_h2", "v_h1", "v_l2"};
  std::vector<double> t_series, v_h1_series, w_h2_series;
  double max_consistency = 0.0;

  auto consistency_at = [&](std::size_t step_idx) {
    const Field sum = v + w;
    const double cons = sobolev_norm(full.samples[step_idx].state.u - sum, 0.0);
    max_consistency = std::max(max_consistency, cons);
    return cons;
  };
  auto record = [&](std::size_t step_idx, double cons) {
    const State& us = full.samples[step_idx].state;
    const double wh2 = sobolev_norm(w, 2.0);
    const double vh1 = sobolev_norm(v, 1.0);
    series.rows.push_back({us.t, cons, wh2, vh1, sobolev_norm(v, 0.0)});
    t_series.push_back(us.t);
    v_h1_series.push_back(vh1);
    w_h2_series.push_back(wh2);
  };
  record(0, consistency_at(0));

  for (std::size_t n = 0; n < steps; ++n) {
    const State& a = full.samples[n].state;
    const State& b = full.samples[n + 1].state;
    const State mid(0.5 * (a.u + b.u), 0.5 * (a.v + b.v), 0.5 * (a.t + b.t));

    // h = -u_tt + g + L*u evaluated at the step midpoint, which the midpoint
    // flow satisfies exactly; u = v + w then telescopes at the discrete level.
    Field h(basis);
    h.coeffs = -rhs_accel(mid, eq).coeffs + g_field.coeffs + L * mid.u.coeffs;

    const Field w_next = step_pseudoparabolic(w, eq, cfg.time.dt, L, h, opt);
    const Field m_w(basis, 0.5 * (w.coeffs + w_next.coeffs));

    const Field nl_at_mw = nl_of(m_w);
    auto nl_diff = [&](const Field& x) {
      Field n = nl_of(Field(basis, x.coeffs + m_w.coeffs));
      n.coeffs -= nl_at_mw.coeffs;
      return n;
    };
    Field zero_h(basis);
    const Field v_next =
        step_pseudoparabolic_custom(v, eq, cfg.time.dt, L, zero_h, nl_diff, opt);

    w = w_next;
    v = v_next;
    const double cons = consistency_at(n + 1);
    if ((n + 1) % static_cast<std::size_t>(cfg.time.cadence) == 0) record(n + 1, cons);
  }

  res.tables["splitting_series"] = std::move(series);
  res.primary_table = "u_timeseries";
  res.tables["u_timeseries"] = make_timeseries_table(subsample(full, cfg.time.cadence), eq);

  add_check(res, "splitting.consistency", CheckKind::numerical,
            max_consistency <= cfg.consistency_tol, max_consistency, cfg.consistency_tol,
            "max ||u - (v + w)||_L2; L = " + std::to_string(L));

  {
    const double first = *std::max_element(
        w_h2_series.begin(),
        w_h2_series.begin() + static_cast<std::ptrdiff_t>(w_h2_series.size() / 2));
    const double second = *std::max_element(
        w_h2_series.begin() + static_cast<std::ptrdiff_t>(w_h2_series.size() / 2),
        w_h2_series.end());
    const double ratio = second / std::max(first, 1e-300);
    add_check(res, "splitting.w_h2_bounded", CheckKind::physics, ratio <= 1.0, ratio, 1.0,
              "max over second half vs first half");
  }

  {
    std::vector<double> tw, yw;
    for (std::size_t i = 0; i < t_series.size(); ++i)
      if (t_series[i] >= 0.5 * cfg.time.T && v_h1_series[i] > 0.0) {
        tw.push_back(t_series[i]);
        yw.push_back(v_h1_series[i]);
      }
    if (tw.size() >= 10) {
      const FitResult fit = fit_decay(tw, yw);
      add_fit(res, "splitting.v_decay", fit);
      add_check(res, "splitting.v_decay_rate_positive", CheckKind::physics, fit.rate > 0.0,
                fit.rate, 0.0);
      add_check(res, "splitting.v_decay_fit_quality", CheckKind::physics,
                fit.r_squared >= 0.98, fit.r_squared, 0.98);
      if (eq.is_linear()) {
        const double expected = (basis->lambda1() + L) / (eq.gamma * basis->lambda1());
        const double rel = std::abs(fit.rate - expected) / expected;
        add_check(res, "splitting.linear_rate_match", CheckKind::physics, rel <= 0.05, rel,
                  0.05, "expected " + std::to_string(expected));
      }
    } else {
      add_check(res, "splitting.v_decay_rate_positive", CheckKind::physics, false, 0.0, 0.0,
                "not enough positive samples in the late window");
    }
  }

  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

// ---------------------------------------------------------------------------
// strong_norm

RunResult run_strong_norm(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res = make_result_shell(cfg);

  BasisPtr basis = make_basis(cfg);
  const EquationSpec eq = make_equation(cfg, basis);
  const State s0 = make_initial(cfg, basis);

  Trajectory traj = integrate(s0, eq, cfg.time.dt, cfg.time.T, cfg.time.cadence,
                              cfg.time.scheme, integrate_options(cfg));
  res.primary_table = "timeseries";
  res.tables["timeseries"] = make_timeseries_table(traj, eq);

  Table strong;
  strong.columns = {"t", "h2_u", "h1_dtu"};
  const bool membrane = eq.family == Family::membrane;
  if (membrane) strong.columns.push_back("lap_u_l2p");
  for (const auto& s : traj.samples) {
    std::vector<double> row = {s.state.t, sobolev_norm(s.state.u, 2.0),
                               sobolev_norm(s.state.v, 1.0)};
    if (membrane) {
      const Vec lap_vals =
          basis->to_grid(-basis->eigenvalues().cwiseProduct(s.state.u.coeffs));
      row.push_back(basis->lp_norm_values(lap_vals, 2.0 * eq.nl.p));
    }
    strong.rows.push_back(std::move(row));
  }
  res.tables["strong_norm_series"] = std::move(strong);

  if (cfg.limit_diag) {
    // Limit-case diagnostic: moving unit-window integral of ||grad u||_{L^18}^6.
    Table limit;
    limit.columns = {"window_start", "grad_l18_pow6_integral"};
    std::vector<double> t, val;
    for (const auto& s : traj.samples) {
      GradientSamples g = basis->gradient_samples(s.state.u.coeffs);
      const double l18 = std::pow(
          basis->integrate_gradient(g, [](double m) { return std::pow(m, 18.0); }),
          1.0 / 18.0);
      t.push_back(s.state.t);
      val.push_back(std::pow(l18, 6.0));
    }
    const double stride = cfg.time.dt * cfg.time.cadence;
    const std::size_t per_window = static_cast<std::size_t>(std::llround(1.0 / stride));
    if (per_window >= 1 && t.size() > per_window) {
      for (std::size_t i = 0; i + per_window < t.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = i; j < i + per_window; ++j)
          acc += 0.5 * stride * (val[j] + val[j + 1]);
        limit.rows.push_back({t[i], acc});
      }
    }
    res.tables["limit_diag"] = std::move(limit);
  }

  auto h2_of = [](const Sample& s) { return sobolev_norm(s.state.u, 2.0); };
  auto h1v_of = [](const Sample& s) { return sobolev_norm(s.state.v, 1.0); };
  if (!eq.has_forcing()) {
    const double half = 0.5 * cfg.time.T;
    const double h2_first = max_over_window(traj, 0.0, half, h2_of);
    const double h2_second = max_over_window(traj, half, cfg.time.T, h2_of);
    add_check(res, "strong_norm.h2_bounded", CheckKind::physics, h2_second <= h2_first,
              h2_second / std::max(h2_first, 1e-300), 1.0);
    const double v1_first = max_over_window(traj, 0.0, half, h1v_of);
    const double v1_second = max_over_window(traj, half, cfg.time.T, h1v_of);
    add_check(res, "strong_norm.h1_dt_bounded", CheckKind::physics, v1_second <= v1_first,
              v1_second / std::max(v1_first, 1e-300), 1.0);
  }

  {
    std::vector<double> tw, yw;
    for (const auto& s : traj.samples) {
      const double y = sobolev_norm(s.state.u, 2.0);
      if (s.state.t >= 0.5 * cfg.time.T && y > 0.0) {
        tw.push_back(s.state.t);
        yw.push_back(y);
      }
    }
    if (tw.size() >= 10) add_fit(res, "strong_norm.h2_decay", fit_decay(tw, yw));
  }

  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

// ---------------------------------------------------------------------------
// convergence

namespace {

double state_error(const State& a, const State& b) {
  const double du = sobolev_norm(a.u - b.u, 0.0);
  const double dv = sobolev_norm(a.v - b.v, 0.0);
  return std::sqrt(du * du + dv * dv);
}

State final_state(const State& init, const EquationSpec& eq, double dt, double T, Scheme scheme,
                  const IntegrateOptions& opt) {
  const double steps_real = T / dt;
  const long long steps = std::llround(steps_real);
  Trajectory traj = integrate(init, eq, dt, T, steps > 0 ? static_cast<int>(steps) : 1, scheme,
                              opt);
  return traj.samples.back().state;
}

State exact_linear_state(const State& init, const EquationSpec& eq, double T) {
  const Basis& basis = *init.u.basis;
  const Vec& lam = basis.eigenvalues();
  Vec u(lam.size()), v(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    double stiff, damp;
    modal_coeffs(eq, lam[k], &stiff, &damp);
    double u0 = init.u.coeffs[k];
    double v0 = init.v.coeffs[k];
    // Constant forcing shifts the equilibrium: solve for y = u - g/stiff.
    double shift = 0.0;
    if (eq.has_forcing()) shift = eq.g.coeffs[k] / stiff;
    const auto uv = linear_modal_exact_general(u0 - shift, v0, damp, stiff, T);
    u[k] = uv[0] + shift;
    v[k] = uv[1];
  }
  return State(Field(init.u.basis, std::move(u)), Field(init.u.basis, std::move(v)), T);
}

}  // namespace

RunResult run_convergence(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res = make_result_shell(cfg);
  const IntegrateOptions opt = integrate_options(cfg);

  if (!cfg.conv_dts.empty()) {
    BasisPtr basis = make_basis(cfg);
    const EquationSpec eq = make_equation(cfg, basis);
    const State s0 = make_initial(cfg, basis);

    std::vector<double> dts = cfg.conv_dts;
    std::sort(dts.begin(), dts.end(), std::greater<>());

    State ref{Field(basis), Field(basis)};
    if (eq.is_linear()) {
      ref = exact_linear_state(s0, eq, cfg.time.T);
    } else {
      ref = final_state(s0, eq, dts.back() / 2.0, cfg.time.T, cfg.time.scheme, opt);
    }

    const int n = static_cast<int>(dts.size());
    std::vector<double> errors(static_cast<std::size_t>(n));
    parallel_for(n, [&](int i) {
      const State fin = final_state(s0, eq, dts[static_cast<std::size_t>(i)], cfg.time.T,
                                    cfg.time.scheme, opt);
      errors[static_cast<std::size_t>(i)] = state_error(fin, ref);
    });

    Table tab;
    tab.columns = {"dt", "error", "observed_order"};
    std::vector<double> orders;
    for (int i = 0; i < n; ++i) {
      double order = 0.0;
      if (i > 0 && errors[static_cast<std::size_t>(i)] > 0.0 &&
          errors[static_cast<std::size_t>(i - 1)] > 0.0) {
        order = std::log(errors[static_cast<std::size_t>(i - 1)] /
                         errors[static_cast<std::size_t>(i)]) /
                std::log(dts[static_cast<std::size_t>(i - 1)] / dts[static_cast<std::size_t>(i)]);
        orders.push_back(order);
      }
      tab.rows.push_back({dts[static_cast<std::size_t>(i)], errors[static_cast<std::size_t>(i)],
                          order});
    }
    res.tables["dt_study"] = std::move(tab);

    if (!orders.empty()) {
      const double target = cfg.time.scheme == Scheme::rk4_oracle ? 4.0 : 2.0;
      double worst = 0.0;
      for (double o : orders) worst = std::max(worst, std::abs(o - target));
      add_check(res, "convergence.dt_order", CheckKind::physics, worst <= 0.2 * target / 2.0,
                worst, 0.2 * target / 2.0,
                "max deviation from order " + std::to_string(target));
    }
  }

  if (!cfg.conv_Ns.empty()) {
    BasisPtr ref_basis = make_basis_at(cfg, cfg.reference_N);
    const EquationSpec ref_eq = make_equation(cfg, ref_basis);
    const State ref0 = make_initial(cfg, ref_basis);
    const State ref_fin =
        ref_eq.is_linear()
            ? exact_linear_state(ref0, ref_eq, cfg.time.T)
            : final_state(ref0, ref_eq, cfg.time.dt, cfg.time.T, cfg.time.scheme, opt);

    std::vector<int> Ns = cfg.conv_Ns;
    std::sort(Ns.begin(), Ns.end());
    const int n = static_cast<int>(Ns.size());
    std::vector<double> errors(static_cast<std::size_t>(n));
    parallel_for(n, [&](int i) {
      BasisPtr basis = make_basis_at(cfg, Ns[static_cast<std::size_t>(i)]);
      const EquationSpec eq = make_equation(cfg, basis);
      const State s0 = make_initial(cfg, basis);
      const State fin =
          final_state(s0, eq, cfg.time.dt, cfg.time.T, cfg.time.scheme, opt);
      // Embed into the reference band (axis indices carry over).
      Field du(ref_basis, ref_fin.u.coeffs), dv(ref_basis, ref_fin.v.coeffs);
      const int NN = Ns[static_cast<std::size_t>(i)];
      if (cfg.grid.dim == 1) {
        for (int k = 1; k <= NN; ++k) {
          du.coeffs[ref_basis->flat_mode(k, 1)] -= fin.u.coeffs[k - 1];
          dv.coeffs[ref_basis->flat_mode(k, 1)] -= fin.v.coeffs[k - 1];
        }
      } else {
        for (int k1 = 1; k1 <= NN; ++k1)
          for (int k0 = 1; k0 <= NN; ++k0) {
            const Eigen::Index src = (k0 - 1) + Eigen::Index(NN) * (k1 - 1);
            du.coeffs[ref_basis->flat_mode(k0, k1)] -= fin.u.coeffs[src];
            dv.coeffs[ref_basis->flat_mode(k0, k1)] -= fin.v.coeffs[src];
          }
      }
      const double eu = sobolev_norm(du, 0.0);
      const double ev = sobolev_norm(dv, 0.0);
      errors[static_cast<std::size_t>(i)] = std::sqrt(eu * eu + ev * ev);
    });

    Table tab;
    tab.columns = {"N", "error", "ratio_to_next"};
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      double ratio = 0.0;
      if (i + 1 < n && errors[static_cast<std::size_t>(i + 1)] > 0.0) {
        ratio = errors[static_cast<std::size_t>(i)] / errors[static_cast<std::size_t>(i + 1)];
        min_ratio = std::min(min_ratio, ratio);
      }
      tab.rows.push_back({static_cast<double>(Ns[static_cast<std::size_t>(i)]),
                          errors[static_cast<std::size_t>(i)], ratio});
    }
    res.tables["n_study"] = std::move(tab);

    if (n >= 2)
      add_check(res, "convergence.spectral_ratio", CheckKind::physics, min_ratio >= 10.0,
                min_ratio, 10.0, "error drop per resolution step");
  }

  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "dissipativity") return run_dissipativity(cfg);
  if (cfg.experiment == "lipschitz") return run_lipschitz(cfg);
  if (cfg.experiment == "smoothing") return run_smoothing(cfg);
  if (cfg.experiment == "splitting") return run_splitting(cfg);
  if (cfg.experiment == "strong_norm") return run_strong_norm(cfg);
  if (cfg.experiment == "convergence") return run_convergence(cfg);
  throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace qsdw
