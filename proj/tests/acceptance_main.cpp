// Acceptance gate. One criterion per numbered block, one [PASS]/[FAIL] line
// each, wall-time budgets enforced in-binary. Exit code = number of failed
// criteria. `--criterion k` runs a single block.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "qsdw/config.hpp"
#include "qsdw/diagnostics.hpp"
#include "qsdw/experiments.hpp"
#include "qsdw/io.hpp"
#include "qsdw/modal.hpp"
#include "qsdw/rng.hpp"
#include "qsdw/variants.hpp"

#ifndef QSDW_CLI_PATH
#define QSDW_CLI_PATH ""
#endif

using namespace qsdw;

namespace {

struct SubCheck {
  std::string label;
  bool pass = false;
};

struct CritReport {
  std::vector<SubCheck> subs;
};

void sub(CritReport& rep, bool pass, std::string label) {
  rep.subs.push_back({std::move(label), pass});
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

const CheckRecord* find_check(const RunResult& res, const std::string& name) {
  for (const auto& c : res.checks)
    if (c.name == name) return &c;
  return nullptr;
}

const FitRecord* find_fit(const RunResult& res, const std::string& name) {
  for (const auto& f : res.fits)
    if (f.name == name) return &f;
  return nullptr;
}

void require_check(CritReport& rep, const RunResult& res, const std::string& name) {
  const CheckRecord* c = find_check(res, name);
  if (!c) {
    sub(rep, false, name + ": check not emitted");
    return;
  }
  sub(rep, c->pass, fmt("%s: measured %.4g vs threshold %.4g", name.c_str(), c->measured,
                        c->threshold));
}

EquationSpec linear_equation(double gamma) {
  EquationSpec eq;
  eq.gamma = gamma;
  eq.nl.phi_kind = PhiKind::zero;
  eq.nl.f_kind = FKind::zero;
  return eq;
}

// 1. Second-order agreement with the exact per-mode propagator, both schemes.
void criterion_linear_oracle(CritReport& rep) {
  const BasisPtr basis = build_basis(1, 8);
  Vec u0(8), v0(8);
  for (int k = 1; k <= 8; ++k) {
    u0[k - 1] = 1.0 / (k * k);
    v0[k - 1] = (k % 2 ? 1.0 : -1.0) / (k * k);
  }
  const State init{Field(basis, u0), Field(basis, v0)};
  const std::array<double, 3> dts = {1e-2, 5e-3, 2.5e-3};

  for (double gamma : {0.5, 2.0}) {
    const EquationSpec eq = linear_equation(gamma);
    for (Scheme scheme : {Scheme::midpoint, Scheme::imex}) {
      std::array<double, 3> err{};
      for (std::size_t i = 0; i < dts.size(); ++i) {
        const int steps = static_cast<int>(std::llround(1.0 / dts[i]));
        const Trajectory traj = integrate(init, eq, dts[i], 1.0, steps, scheme);
        const State& fin = traj.samples.back().state;
        double e = 0.0;
        for (int k = 0; k < 8; ++k) {
          const auto ex =
              linear_modal_exact(u0[k], v0[k], basis->eigenvalues()[k], gamma, 1.0);
          e = std::max({e, std::abs(fin.u.coeffs[k] - ex[0]),
                        std::abs(fin.v.coeffs[k] - ex[1])});
        }
        err[i] = e;
      }
      const std::string tag = scheme_name(scheme) + fmt(" gamma=%g", gamma);
      sub(rep, err[2] <= 1e-4,
          tag + fmt(": finest modal error %.3e <= 1e-4", err[2]));
      for (int i = 0; i < 2; ++i) {
        const double r = err[i] / err[i + 1];
        sub(rep, r >= 3.6 && r <= 4.4,
            tag + fmt(": error ratio per halving %.3f in [3.6, 4.4]", r));
      }
    }
  }
}

// 2. Discrete energy identity: monotone E, balance residual of order dt^2.
void criterion_energy_identity(CritReport& rep) {
  const BasisPtr basis = build_basis(1, 64);
  EquationSpec eq;
  eq.nl.p = 3.0;
  eq.nl.q = 2.0;
  Field u(basis), v(basis);
  u.coeffs[0] = 1.0;
  u.coeffs[1] = -0.4;
  u.coeffs[2] = 0.2;
  v.coeffs[0] = 0.5;
  v.coeffs[2] = -0.2;
  const State init{u, v};

  const std::array<double, 3> dts = {1e-3, 5e-4, 2.5e-4};
  const std::array<int, 3> cads = {20, 40, 80};  // fixed 0.02 sampling stride
  std::array<double, 3> resid{};
  for (int i = 0; i < 3; ++i) {
    const Trajectory traj = integrate(init, eq, dts[i], 2.0, cads[i]);
    resid[i] = balance_residual(traj, eq).max_abs;
    if (i == 0) {
      double max_rise = -std::numeric_limits<double>::infinity();
      double prev = energy_report(traj.samples.front().state, eq).total;
      for (std::size_t j = 1; j < traj.samples.size(); ++j) {
        const double cur = energy_report(traj.samples[j].state, eq).total;
        max_rise = std::max(max_rise, cur - prev);
        prev = cur;
      }
      sub(rep, max_rise <= 1e-10,
          fmt("energy non-increasing at dt=1e-3: max rise %.3e <= 1e-10", max_rise));
    }
  }
  for (int i = 0; i < 2; ++i) {
    const double r = resid[i] / resid[i + 1];
    sub(rep, r >= 3.6 && r <= 4.4,
        fmt("balance residual ratio per halving %.3f in [3.6, 4.4] (%.3e -> %.3e)", r,
            resid[i], resid[i + 1]));
  }
}

// 3. Forced runs from magnitudes {0.1, 1, 10} fall into one terminal band.
void criterion_dissipativity(CritReport& rep) {
  ExperimentConfig cfg;
  cfg.experiment = "dissipativity";
  cfg.grid.N = 64;
  cfg.eq.p = 3.0;
  cfg.eq.q = 2.0;
  cfg.forcing.kind = ForcingSpec::Kind::mode;
  cfg.forcing.k = {1, 1};
  cfg.forcing.amplitude = 0.5;
  cfg.magnitudes = {0.1, 1.0, 10.0};
  cfg.time.dt = 5e-4;
  cfg.time.T = 20.0;
  cfg.time.cadence = 400;  // sample every 0.2
  cfg.time.max_iter = 150;
  cfg.resolve();

  const RunResult res = run_dissipativity(cfg);
  require_check(rep, res, "dissipativity.terminal_band");
  for (int i = 0; i < 3; ++i)
    require_check(rep, res, "dissipativity.approach_positive.run" + std::to_string(i));
}

// 4. Pointwise monotonicity gap of the gradient law stays positive.
void criterion_monotonicity_gap(CritReport& rep) {
  SplitMix64 rng(2026);
  const double lo = std::log(1e-8), hi = std::log(1e8);
  for (double p : {1.0, 2.0, 3.0, 4.0, 4.9}) {
    NonlinearitySpec nl;
    nl.p = p;
    double mn = std::numeric_limits<double>::infinity();
    double p1_dev = 0.0;
    for (int i = 0; i < 100000; ++i) {
      double e1 = std::exp(lo + rng.uniform01() * (hi - lo));
      double e2 = std::exp(lo + rng.uniform01() * (hi - lo));
      if (rng.uniform01() < 0.5) e1 = -e1;
      if (rng.uniform01() < 0.5) e2 = -e2;
      if (e1 == e2) e2 = -e2;
      const double g = monotonicity_gap(e1, e2, nl);
      mn = std::min(mn, g);
      if (p == 1.0) p1_dev = std::max(p1_dev, std::abs(g - 2.0));
    }
    sub(rep, mn > 0.0, fmt("p=%.1f: min gap %.4g > 0 over 1e5 log-uniform pairs", p, mn));
    if (p == 1.0)
      sub(rep, p1_dev <= 1e-12, fmt("p=1: max |gap - 2| = %.3e <= 1e-12", p1_dev));
  }
}

// 5. Perturbation amplification is epsilon-independent; linear case collapses.
void criterion_lipschitz(CritReport& rep) {
  ExperimentConfig cfg;
  cfg.experiment = "lipschitz";
  cfg.grid.N = 64;
  cfg.eq.p = 3.0;
  cfg.eq.q = 2.0;
  cfg.epsilons = {1e-2, 1e-3, 1e-4};
  cfg.time.dt = 1e-3;
  cfg.time.T = 1.0;
  cfg.time.cadence = 10;
  cfg.resolve();
  const RunResult nonlinear = run_lipschitz(cfg);
  require_check(rep, nonlinear, "lipschitz.ratio_band");
  for (int i = 0; i < 3; ++i)
    require_check(rep, nonlinear, "diff.envelope.eps" + std::to_string(i));

  ExperimentConfig lin = cfg;
  lin.eq.phi_kind = PhiKind::zero;
  lin.eq.f_kind = FKind::zero;
  const RunResult control = run_lipschitz(lin);
  const CheckRecord* spread = find_check(control, "lipschitz.linear_spread");
  if (!spread) {
    sub(rep, false, "lipschitz.linear_spread: check not emitted");
  } else {
    sub(rep, spread->pass && spread->measured <= 1e-8,
        fmt("linear control amplification spread %.3e <= 1e-8", spread->measured));
  }
}

// 6. Velocity smoothing: H1 of dt u at t=0.1 is grid-stable while the initial
//    rough velocity is not; small-time blow-up exponent reported.
void criterion_smoothing(CritReport& rep) {
  ExperimentConfig cfg;
  cfg.experiment = "smoothing";
  cfg.grid.N = 64;  // refined companion run at 2N = 128
  cfg.eq.p = 3.0;
  cfg.eq.q = 2.0;
  cfg.initial.preset = InitialPreset::rough_velocity;
  cfg.initial.amplitudes = {1.0};
  cfg.initial.seed = 11;
  // The midpoint rule is A- but not L-stable: modes with lambda*dt >> 1 keep
  // a (1 - lambda dt/2)/(1 + lambda dt/2) echo of the rough velocity. dt small
  // enough that the refined run's extra band is numerically dead by t = 0.01.
  cfg.time.dt = 5e-4;
  cfg.time.T = 1.0;
  cfg.time.cadence = 20;
  cfg.probe_times = {0.01, 0.05, 0.1, 0.5, 1.0};
  cfg.resolve();

  const RunResult res = run_smoothing(cfg);
  require_check(rep, res, "smoothing.probe_finite");
  require_check(rep, res, "smoothing.probe_h1_stable");
  require_check(rep, res, "smoothing.initial_roughness");
  const FitRecord* fit = find_fit(res, "smoothing.blowup_exponent");
  if (!fit) {
    sub(rep, false, "smoothing.blowup_exponent: fit not emitted");
  } else {
    sub(rep, std::isfinite(fit->fit.rate),
        fmt("blow-up exponent of ||dt u||_H1 as t->0: %.3f (r^2 = %.3f)", fit->fit.rate,
            fit->fit.r_squared));
  }
}

// 7. Splitting u = v + w: consistency, bounded w in H2, exponential v decay,
//    and the closed-form rate in the linear control case.
void criterion_splitting(CritReport& rep) {
  ExperimentConfig cfg;
  cfg.experiment = "splitting";
  cfg.grid.N = 64;
  cfg.eq.p = 3.0;
  cfg.eq.q = 2.0;
  cfg.time.dt = 2e-3;
  cfg.time.T = 10.0;
  cfg.time.cadence = 100;  // sample every 0.2
  cfg.resolve();

  const RunResult res = run_splitting(cfg);
  const CheckRecord* cons = find_check(res, "splitting.consistency");
  if (!cons) {
    sub(rep, false, "splitting.consistency: check not emitted");
  } else {
    sub(rep, cons->pass && cons->measured <= 1e-6,
        fmt("max ||u - (v + w)||_L2 over samples %.3e <= 1e-6", cons->measured));
  }
  require_check(rep, res, "splitting.w_h2_bounded");
  require_check(rep, res, "splitting.v_decay_rate_positive");
  const FitRecord* fit = find_fit(res, "splitting.v_decay");
  if (!fit) {
    sub(rep, false, "splitting.v_decay: fit not emitted");
  } else {
    sub(rep, fit->fit.rate > 0.0 && fit->fit.r_squared >= 0.98,
        fmt("||v||_H1 decay: rate %.3f > 0, r^2 %.4f >= 0.98", fit->fit.rate,
            fit->fit.r_squared));
  }

  ExperimentConfig lin;
  lin.experiment = "splitting";
  lin.grid.N = 8;
  lin.eq.gamma = 1.0;
  lin.eq.phi_kind = PhiKind::zero;
  lin.eq.f_kind = FKind::zero;
  lin.time.dt = 5e-3;
  lin.time.T = 6.0;
  lin.time.cadence = 10;
  lin.resolve();
  const RunResult ctrl = run_splitting(lin);
  require_check(rep, ctrl, "splitting.linear_rate_match");
}

// 8. Variant families agree with the main one on shared special cases, and the
//    fourth-order membrane matches the lambda -> lambda^2 modal oracle.
void criterion_cross_family(CritReport& rep) {
  const BasisPtr basis = build_basis(1, 8);
  Vec u0(8), v0(8);
  for (int k = 1; k <= 8; ++k) {
    u0[k - 1] = 1.0 / (k * k);
    v0[k - 1] = (k % 2 ? 0.3 : -0.3) / k;
  }
  const State init{Field(basis, u0), Field(basis, v0)};

  auto make_eq = [](Family fam) {
    EquationSpec eq;
    eq.family = fam;
    eq.gamma = 1.3;
    eq.nl.phi_kind = PhiKind::zero;
    eq.nl.q = 2.0;
    eq.nl.C_f = 0.5;
    return eq;
  };
  EquationSpec main_eq = make_eq(Family::main);
  EquationSpec structural_eq = make_eq(Family::structural);
  structural_eq.alpha = 1.0;
  EquationSpec kirchhoff_eq = make_eq(Family::kirchhoff);
  kirchhoff_eq.kirchhoff_m = 0.0;  // disabled nonlocal factor

  const Trajectory base = integrate(init, main_eq, 1e-3, 0.5, 50);
  const Trajectory structural = integrate(init, structural_eq, 1e-3, 0.5, 50);
  const Trajectory kirchhoff = integrate(init, kirchhoff_eq, 1e-3, 0.5, 50);
  double d_structural = 0.0, d_kirchhoff = 0.0;
  for (std::size_t j = 0; j < base.samples.size(); ++j) {
    const State& a = base.samples[j].state;
    const State& s = structural.samples[j].state;
    const State& k = kirchhoff.samples[j].state;
    d_structural = std::max({d_structural,
                             (s.u.coeffs - a.u.coeffs).cwiseAbs().maxCoeff(),
                             (s.v.coeffs - a.v.coeffs).cwiseAbs().maxCoeff()});
    d_kirchhoff = std::max({d_kirchhoff, (k.u.coeffs - a.u.coeffs).cwiseAbs().maxCoeff(),
                            (k.v.coeffs - a.v.coeffs).cwiseAbs().maxCoeff()});
  }
  sub(rep, d_structural <= 1e-12,
      fmt("structural alpha=1 vs main: max modal gap %.3e <= 1e-12", d_structural));
  sub(rep, d_kirchhoff <= 1e-12,
      fmt("kirchhoff disabled factor vs main: max modal gap %.3e <= 1e-12", d_kirchhoff));

  EquationSpec membrane = linear_equation(0.5);
  membrane.family = Family::membrane;
  const std::array<double, 3> dts = {1e-2, 5e-3, 2.5e-3};
  std::array<double, 3> err{};
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const int steps = static_cast<int>(std::llround(1.0 / dts[i]));
    const Trajectory traj = integrate(init, membrane, dts[i], 1.0, steps);
    const State& fin = traj.samples.back().state;
    double e = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double lam = basis->eigenvalues()[k];
      const auto ex = linear_modal_exact(u0[k], v0[k], lam * lam, 0.5, 1.0);
      e = std::max(
          {e, std::abs(fin.u.coeffs[k] - ex[0]), std::abs(fin.v.coeffs[k] - ex[1])});
    }
    err[i] = e;
  }
  sub(rep, err[2] <= 1e-4,
      fmt("membrane vs squared-eigenvalue oracle: finest error %.3e <= 1e-4", err[2]));
  for (int i = 0; i < 2; ++i) {
    const double r = err[i] / err[i + 1];
    sub(rep, r >= 3.6 && r <= 4.4,
        fmt("membrane error ratio per halving %.3f in [3.6, 4.4]", r));
  }
}

// 9. Admissibility validators give the published verdicts.
void criterion_validators(CritReport& rep) {
  const StructuralReport s1 = validate_structural(0.5, 3.0);
  sub(rep, s1.pass, fmt("alpha=0.5, q=3 admissible (margin %.3f)", s1.margin));
  const StructuralReport s2 = validate_structural(0.5, 4.5);
  sub(rep, !s2.pass, fmt("alpha=0.5, q=4.5 rejected (margin %.3f)", s2.margin));
  for (double q : {0.5, 1.0, 3.0, 10.0, 50.0}) {
    const StructuralReport s = validate_structural(0.75, q);
    sub(rep, s.pass && s.unconditional, fmt("alpha=0.75, q=%g admissible unconditionally", q));
  }
  for (double m : {1.0, 2.0, 3.0}) {
    const KirchhoffReport k = validate_kirchhoff(m, 10000);
    sub(rep, k.pass && k.min_margin >= 0.0 && k.samples >= 10000,
        fmt("kirchhoff m=%g: min sign margin %.3e >= 0 on %d samples", m, k.min_margin,
            k.samples));
  }
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("\"") + QSDW_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string strip_wall_ms(const std::string& json) {
  std::string out;
  std::size_t pos = 0;
  while (pos < json.size()) {
    std::size_t nl = json.find('\n', pos);
    if (nl == std::string::npos) nl = json.size();
    const std::string line = json.substr(pos, nl - pos);
    if (line.find("wall_ms") == std::string::npos) out += line + "\n";
    pos = nl + 1;
  }
  return out;
}

// 10. CLI contract: exit codes 0 / 1 / 3 and byte-identical reruns.
void criterion_cli(CritReport& rep) {
  if (std::string(QSDW_CLI_PATH).empty()) {
    sub(rep, false, "CLI binary path was not compiled into the acceptance runner");
    return;
  }
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "qsdw_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const fs::path ok_cfg = dir / "ok.cfg";
  write_text_file(ok_cfg.string(),
                  "experiment = strong_norm\n"
                  "equation.p = 3\n"
                  "equation.q = 2\n"
                  "grid.n = 8\n"
                  "time.dt = 1e-2\n"
                  "time.t_final = 0.5\n"
                  "time.cadence = 5\n"
                  "initial.preset = random_spectral\n"
                  "initial.seed = 7\n");
  const fs::path bad_cfg = dir / "bad.cfg";
  write_text_file(bad_cfg.string(), "experiment = strong_norm\nequation.gamm = 1\n");
  const fs::path num_cfg = dir / "numfail.cfg";
  write_text_file(num_cfg.string(),
                  "experiment = splitting\n"
                  "equation.p = 3\n"
                  "equation.q = 2\n"
                  "grid.n = 8\n"
                  "time.dt = 5e-3\n"
                  "time.t_final = 0.5\n"
                  "time.cadence = 10\n"
                  "splitting.consistency_tol = 1e-30\n");

  const fs::path out_a = dir / "outA";
  const fs::path out_b = dir / "outB";
  sub(rep,
      run_cli("run \"" + ok_cfg.string() + "\" --output-dir \"" + out_a.string() + "\"") == 0,
      "clean run exits 0");
  sub(rep, run_cli("run \"" + bad_cfg.string() + "\"") == 1, "unknown config key exits 1");
  sub(rep, run_cli("run \"" + num_cfg.string() + "\"") == 3,
      "unreachable numerical tolerance exits 3");
  sub(rep,
      run_cli("run \"" + ok_cfg.string() + "\" --output-dir \"" + out_b.string() + "\"") == 0,
      "rerun exits 0");

  for (const char* name : {"timeseries.csv", "strong_norm_series.csv", "resolved_config.cfg"}) {
    bool same = false;
    std::string note;
    try {
      same = read_text_file((out_a / name).string()) == read_text_file((out_b / name).string());
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    sub(rep, same, fmt("%s byte-identical across reruns%s", name, note.c_str()));
  }
  bool json_same = false;
  std::string note;
  try {
    json_same = strip_wall_ms(read_text_file((out_a / "summary.json").string())) ==
                strip_wall_ms(read_text_file((out_b / "summary.json").string()));
  } catch (const std::exception& e) {
    note = std::string(" (") + e.what() + ")";
  }
  sub(rep, json_same, fmt("summary.json identical modulo wall time%s", note.c_str()));
  fs::remove_all(dir);
}

struct Entry {
  int id;
  const char* label;
  double budget_s;
  void (*fn)(CritReport&);
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {1, "linear modal oracle, midpoint and imex, second order", 1.0,
       criterion_linear_oracle},
      {2, "energy identity: monotone E, second-order balance residual", 30.0,
       criterion_energy_identity},
      {3, "dissipative absorption into a common terminal band", 120.0,
       criterion_dissipativity},
      {4, "monotonicity gap of the gradient law stays positive", 5.0,
       criterion_monotonicity_gap},
      {5, "Lipschitz amplification band and linear collapse", 60.0, criterion_lipschitz},
      {6, "instant velocity smoothing under grid refinement", 120.0, criterion_smoothing},
      {7, "splitting: consistency, bounded w, exponential v decay", 180.0,
       criterion_splitting},
      {8, "cross-family agreement and membrane modal oracle", 10.0,
       criterion_cross_family},
      {9, "admissibility validators (structural table, nonlocal sign margin)", 1.0,
       criterion_validators},
      {10, "CLI exit codes and rerun determinism", 10.0, criterion_cli},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (a == "--help" || a == "-h") {
      std::printf("usage: %s [--criterion k]   (k = 1..10, 0 = all)\n", argv[0]);
      return 0;
    } else {
      std::fprintf(stderr, "unknown argument: %s\n", a.c_str());
      return 64;
    }
  }

  int failures = 0, ran = 0;
  for (const Entry& entry : entries()) {
    if (only != 0 && entry.id != only) continue;
    ++ran;
    CritReport rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      entry.fn(rep);
    } catch (const std::exception& e) {
      sub(rep, false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    sub(rep, secs < entry.budget_s,
        fmt("runtime %.2f s within the %g s budget", secs, entry.budget_s));

    bool pass = true;
    for (const auto& s : rep.subs) pass = pass && s.pass;
    std::printf("[%s] criterion %d (%.2f s): %s\n", pass ? "PASS" : "FAIL", entry.id, secs,
                entry.label);
    if (!pass) {
      for (const auto& s : rep.subs)
        if (!s.pass) std::printf("       - %s\n", s.label.c_str());
    }
    std::fflush(stdout);
    failures += pass ? 0 : 1;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no such criterion: %d\n", only);
    return 64;
  }
  if (ran > 1) std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures;
}
