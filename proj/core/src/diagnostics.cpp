#include "qsdw/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qsdw {

double default_modified_alpha(const EquationSpec& eq, const Basis& basis) {
  const double l1 = basis.lambda1();
  return 0.25 * std::min(eq.gamma * l1, l1);
}

EnergyReport energy_report(const State& state, const EquationSpec& eq, double alpha) {
  const Basis& basis = *state.u.basis;
  EnergyReport rep;

  const double vn = sobolev_norm(state.v, 0.0);
  rep.kinetic = 0.5 * vn * vn;

  const double dir_order = eq.family == Family::membrane ? 2.0 : 1.0;
  const double un = sobolev_norm(state.u, dir_order);
  rep.dirichlet = 0.5 * un * un;

  if (eq.nl.phi_active()) {
    if (eq.family == Family::main) {
      GradientSamples grad = basis.gradient_samples(state.u.coeffs);
      rep.phi_potential =
          basis.integrate_gradient(grad, [&](double mag) { return phi_eval(mag, eq.nl); });
    } else if (eq.family == Family::membrane) {
      Vec lap_vals = basis.to_grid(-basis.eigenvalues().cwiseProduct(state.u.coeffs));
      for (Eigen::Index j = 0; j < lap_vals.size(); ++j)
        lap_vals[j] = membrane_phi_primitive(lap_vals[j], eq.nl);
      rep.phi_potential = basis.integrate_values(lap_vals);
    }
  }
  if (eq.family == Family::kirchhoff && eq.kirchhoff_m != 0.0) {
    const double h1 = sobolev_norm(state.u, 1.0);
    rep.phi_potential = 0.5 * kirchhoff_phi_primitive(h1 * h1, eq);
  }

  if (eq.nl.f_active()) {
    Vec vals = basis.to_grid(state.u.coeffs);
    for (Eigen::Index j = 0; j < vals.size(); ++j) vals[j] = F_eval(vals[j], eq.nl);
    rep.f_potential = basis.integrate_values(vals);
  }

  if (eq.has_forcing()) rep.forcing = -inner(eq.g, state.u);

  rep.total = rep.kinetic + rep.dirichlet + rep.phi_potential + rep.f_potential + rep.forcing;

  rep.alpha_used = alpha < 0.0 ? default_modified_alpha(eq, basis) : alpha;
  const double damp_order = eq.dissipation_order();
  const double un_damp = sobolev_norm(state.u, damp_order);
  rep.modified_total = rep.total + rep.alpha_used * (0.5 * eq.gamma * un_damp * un_damp +
                                                     inner(state.v, state.u));
  return rep;
}

double energy_norm(const State& state, const EquationSpec& eq) {
  const Basis& basis = *state.u.basis;
  const double vn = sobolev_norm(state.v, 0.0);
  double out = vn * vn;

  if (eq.family == Family::main && eq.nl.phi_active()) {
    GradientSamples grad = basis.gradient_samples(state.u.coeffs);
    out += basis.integrate_gradient(
        grad, [&](double mag) { return std::pow(mag, eq.nl.p + 1.0); });
  } else {
    const double s = eq.family == Family::membrane ? 2.0 : 1.0;
    const double un = sobolev_norm(state.u, s);
    out += un * un;
  }

  if (eq.nl.f_active()) {
    Vec vals = basis.to_grid(state.u.coeffs);
    const double r = eq.nl.q + 2.0;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < vals.size(); ++j) acc += std::pow(std::abs(vals[j]), r);
    out += basis.quad_weight() * acc;
  } else {
    const double un = sobolev_norm(state.u, 0.0);
    out += un * un;
  }
  return out;
}

DiffMetrics diff_metrics(const State& a, const State& b, double gamma) {
  require_same_basis(a.u, b.u, "diff_metrics");
  Field w = a.u - b.u;
  Field wt = a.v - b.v;
  DiffMetrics m;
  m.l2 = sobolev_norm(w, 0.0);
  m.h1 = sobolev_norm(w, 1.0);
  m.hm1_dt = sobolev_norm(wt, -1.0);
  m.e_minus1 = 0.5 * gamma * m.h1 * m.h1 + inner(wt, w) +
               (2.0 / gamma) * (m.hm1_dt * m.hm1_dt + m.l2 * m.l2);
  return m;
}

std::pair<double, double> e_minus1_constants(double gamma, double lambda1) {
  if (!(gamma > 0.0) || !(lambda1 > 0.0))
    throw ConfigError("e_minus1_constants: gamma and lambda1 must be positive");
  const double k1 = std::min(0.25 * gamma, 1.0 / gamma);
  const double k2 = std::max(0.75 * gamma + 2.0 / (gamma * lambda1), 3.0 / gamma);
  return {k1, k2};
}

FitResult fit_decay(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw ConfigError("fit_decay: t and y must have equal length");
  if (t.size() < 10) throw ConfigError("fit_decay: need at least 10 samples, got " +
                                       std::to_string(t.size()));
  const std::size_t n = t.size();
  std::vector<double> ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0))
      throw ConfigError("fit_decay: sample " + std::to_string(i) + " is not positive");
    ly[i] = std::log(y[i]);
  }

  double tm = 0.0, lm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tm += t[i];
    lm += ly[i];
  }
  tm /= static_cast<double>(n);
  lm /= static_cast<double>(n);

  double stt = 0.0, stl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    stl += (t[i] - tm) * (ly[i] - lm);
  }
  if (stt == 0.0) throw ConfigError("fit_decay: all time samples coincide");

  const double slope = stl / stt;
  FitResult fit;
  fit.rate = -slope;
  fit.intercept = lm - slope * tm;

  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.intercept + slope * t[i];
    ss_res += (ly[i] - pred) * (ly[i] - pred);
    ss_tot += (ly[i] - lm) * (ly[i] - lm);
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

BalanceSeries balance_residual(const Trajectory& traj, const EquationSpec& eq) {
  BalanceSeries out;
  if (traj.samples.size() < 2) return out;
  out.t.reserve(traj.samples.size() - 1);
  out.r.reserve(traj.samples.size() - 1);

  double e_prev = energy_report(traj.samples.front().state, eq).total;
  double d_prev = traj.samples.front().cum_dissipation;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const double e = energy_report(traj.samples[i].state, eq).total;
    const double d = traj.samples[i].cum_dissipation;
    const double r = (e - e_prev) + (d - d_prev);
    out.t.push_back(traj.samples[i].state.t);
    out.r.push_back(r);
    out.max_abs = std::max(out.max_abs, std::abs(r));
    e_prev = e;
    d_prev = d;
  }
  return out;
}

}  // namespace qsdw
