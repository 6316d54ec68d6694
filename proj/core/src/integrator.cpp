#include "qsdw/integrator.hpp"

#include <cmath>
#include <string>

namespace qsdw {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::midpoint: return "midpoint";
    case Scheme::imex: return "imex";
    case Scheme::rk4_oracle: return "rk4_oracle";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "midpoint") return Scheme::midpoint;
  if (name == "imex") return Scheme::imex;
  if (name == "rk4_oracle") return Scheme::rk4_oracle;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected midpoint, imex, or rk4_oracle)");
}

namespace {

double field_l2(const Basis& basis, const Vec& coeffs) {
  return std::sqrt(basis.mode_l2sq()) * coeffs.norm();
}

double kirchhoff_factor(const Basis& basis, const EquationSpec& eq, const Vec& u) {
  if (eq.family != Family::kirchhoff || eq.kirchhoff_m == 0.0) return 0.0;
  const double grad_sq = basis.mode_l2sq() * basis.eigenvalues().cwiseProduct(u).dot(u);
  return kirchhoff_phi(grad_sq, eq);
}

}  // namespace

State step_midpoint(const State& y, const EquationSpec& eq, double dt,
                    const IntegrateOptions& opt, StepStats* stats) {
  const Basis& basis = *y.u.basis;
  const Vec& lam = basis.eigenvalues();
  const double h = 0.5 * dt;

  Vec mu = y.u.coeffs;
  Vec mv = y.v.coeffs;
  Vec next_mu(mu.size()), next_mv(mv.size());

  int iter = 0;
  double delta = 0.0;
  for (;;) {
    ++iter;
    const Field n = nonlinear_accel(Field(y.u.basis, mu), eq);
    const double phi = kirchhoff_factor(basis, eq, mu);
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      double stiff, damp;
      modal_coeffs(eq, lam[k], &stiff, &damp);
      stiff += phi * lam[k];  // Kirchhoff factor folded into the diagonal
      const double rv = y.v.coeffs[k] + h * n.coeffs[k];
      next_mv[k] = (rv - h * stiff * y.u.coeffs[k]) / (1.0 + h * damp + h * h * stiff);
      next_mu[k] = y.u.coeffs[k] + h * next_mv[k];
    }
    delta = std::max(field_l2(basis, next_mu - mu), field_l2(basis, next_mv - mv));
    mu.swap(next_mu);
    mv.swap(next_mv);
    if (!std::isfinite(delta))
      throw NumericalError("step_midpoint: fixed-point iteration produced non-finite values");
    if (delta < opt.tol) break;
    if (iter >= opt.max_iter)
      throw NumericalError("step_midpoint: fixed point did not converge within " +
                           std::to_string(opt.max_iter) + " iterations (last update " +
                           std::to_string(delta) + ")");
  }
  if (stats) {
    stats->iterations = iter;
    stats->last_delta = delta;
  }

  return State(Field(y.u.basis, 2.0 * mu - y.u.coeffs),
               Field(y.u.basis, 2.0 * mv - y.v.coeffs), y.t + dt);
}

State step_imex(const State& y, const EquationSpec& eq, double dt, ImexHistory& hist,
                const IntegrateOptions& opt, StepStats* stats) {
  const Basis& basis = *y.u.basis;
  const Vec& lam = basis.eigenvalues();

  auto nl_with_kirchhoff = [&](const Field& u) {
    Field n = nonlinear_accel(u, eq);
    const double phi = kirchhoff_factor(basis, eq, u.coeffs);
    if (phi != 0.0) n.coeffs -= phi * lam.cwiseProduct(u.coeffs);
    return n;
  };

  if (!hist.valid) {
    hist.nl_accel_prev = nl_with_kirchhoff(y.u).coeffs;
    hist.valid = true;
    return step_midpoint(y, eq, dt, opt, stats);
  }

  const Vec n_now = nl_with_kirchhoff(y.u).coeffs;
  const Vec n_bar = 1.5 * n_now - 0.5 * hist.nl_accel_prev;

  const double h = 0.5 * dt;
  Vec u1(lam.size()), v1(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    double stiff, damp;
    modal_coeffs(eq, lam[k], &stiff, &damp);
    const double rhs = y.v.coeffs[k] * (1.0 - h * damp - h * h * stiff) -
                       2.0 * h * stiff * y.u.coeffs[k] + dt * n_bar[k];
    v1[k] = rhs / (1.0 + h * damp + h * h * stiff);
    u1[k] = y.u.coeffs[k] + h * (y.v.coeffs[k] + v1[k]);
  }
  if (!u1.allFinite() || !v1.allFinite())
    throw NumericalError("step_imex: update produced non-finite values");

  hist.nl_accel_prev = n_now;
  if (stats) {
    stats->iterations = 1;
    stats->last_delta = 0.0;
  }
  return State(Field(y.u.basis, std::move(u1)), Field(y.u.basis, std::move(v1)), y.t + dt);
}

State step_rk4(const State& y, const EquationSpec& eq, double dt) {
  auto accel = [&](const Vec& u, const Vec& v) {
    return rhs_accel(State(Field(y.u.basis, u), Field(y.u.basis, v), y.t), eq).coeffs;
  };
  const Vec& u0 = y.u.coeffs;
  const Vec& v0 = y.v.coeffs;

  Vec k1u = v0, k1v = accel(u0, v0);
  Vec k2u = v0 + 0.5 * dt * k1v, k2v = accel(u0 + 0.5 * dt * k1u, v0 + 0.5 * dt * k1v);
  Vec k3u = v0 + 0.5 * dt * k2v, k3v = accel(u0 + 0.5 * dt * k2u, v0 + 0.5 * dt * k2v);
  Vec k4u = v0 + dt * k3v, k4v = accel(u0 + dt * k3u, v0 + dt * k3v);

  Vec u1 = u0 + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  Vec v1 = v0 + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  if (!u1.allFinite() || !v1.allFinite())
    throw NumericalError("step_rk4: update produced non-finite values");
  return State(Field(y.u.basis, std::move(u1)), Field(y.u.basis, std::move(v1)), y.t + dt);
}

Field step_pseudoparabolic_custom(const Field& w, const EquationSpec& eq, double dt, double shift,
                                  const Field& h_mid,
                                  const std::function<Field(const Field&)>& nl,
                                  const IntegrateOptions& opt, StepStats* stats) {
  const Basis& basis = *w.basis;
  const Vec& lam = basis.eigenvalues();
  if (h_mid.basis.get() != w.basis.get())
    throw ConfigError("step_pseudoparabolic: inhomogeneity uses a different basis object");

  Vec m = w.coeffs;
  Vec next(m.size());
  int iter = 0;
  double delta = 0.0;
  for (;;) {
    ++iter;
    const Field n = nl(Field(w.basis, m));
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      const double ak = 2.0 * eq.gamma * lam[k] / dt;
      next[k] = (ak * w.coeffs[k] - n.coeffs[k] + h_mid.coeffs[k]) / (ak + lam[k] + shift);
    }
    delta = field_l2(basis, next - m);
    m.swap(next);
    if (!std::isfinite(delta))
      throw NumericalError("step_pseudoparabolic: fixed-point iteration produced non-finite values");
    if (delta < opt.tol) break;
    if (iter >= opt.max_iter)
      throw NumericalError("step_pseudoparabolic: fixed point did not converge within " +
                           std::to_string(opt.max_iter) + " iterations (last update " +
                           std::to_string(delta) + ")");
  }
  if (stats) {
    stats->iterations = iter;
    stats->last_delta = delta;
  }
  return Field(w.basis, 2.0 * m - w.coeffs);
}

Field step_pseudoparabolic(const Field& w, const EquationSpec& eq, double dt, double shift,
                           const Field& h_mid, const IntegrateOptions& opt, StepStats* stats) {
  EquationSpec no_forcing = eq;
  no_forcing.g = Field();
  auto nl = [&no_forcing](const Field& x) {
    Field n = nonlinear_accel(x, no_forcing);
    n.coeffs = -n.coeffs;  // NL(w) = f(w) - div(phi'(grad w))
    return n;
  };
  return step_pseudoparabolic_custom(w, eq, dt, shift, h_mid, nl, opt, stats);
}

Trajectory integrate(const State& init, const EquationSpec& eq, double dt, double T,
                     int cadence, Scheme scheme, const IntegrateOptions& opt) {
  if (!(dt > 0.0)) throw ConfigError("integrate: dt must be positive");
  if (!(T >= 0.0)) throw ConfigError("integrate: T must be >= 0");
  if (cadence < 1) throw ConfigError("integrate: cadence must be >= 1");

  const double steps_real = T / dt;
  const long long steps = std::llround(steps_real);
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real))
    throw ConfigError("integrate: T must be an integer multiple of dt");
  if (steps > 0 && steps % cadence != 0)
    throw ConfigError("integrate: cadence must divide the step count " + std::to_string(steps));

  eq.validate();

  const double diss_order = eq.dissipation_order();
  auto rate = [&](const State& s) {
    const double n = sobolev_norm(s.v, diss_order);
    return eq.gamma * n * n;
  };

  Trajectory traj;
  traj.dt = dt;
  traj.cadence = cadence;
  traj.scheme = scheme;
  traj.samples.reserve(static_cast<std::size_t>(steps / cadence) + 1);

  State y = init;
  y.t = 0.0;
  double cum = 0.0;
  double rate_prev = rate(y);
  traj.samples.push_back({y, cum, rate_prev});

  ImexHistory hist;
  for (long long n = 0; n < steps; ++n) {
    try {
      switch (scheme) {
        case Scheme::midpoint: y = step_midpoint(y, eq, dt, opt); break;
        case Scheme::imex: y = step_imex(y, eq, dt, hist, opt); break;
        case Scheme::rk4_oracle: y = step_rk4(y, eq, dt); break;
      }
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (while stepping from t = " +
                           std::to_string(static_cast<double>(n) * dt) + ")");
    }
    const double rate_now = rate(y);
    cum += 0.5 * dt * (rate_prev + rate_now);
    rate_prev = rate_now;
    if ((n + 1) % cadence == 0) traj.samples.push_back({y, cum, rate_now});
  }
  return traj;
}

}  // namespace qsdw
