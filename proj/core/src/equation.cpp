#include "qsdw/equation.hpp"

#include <cmath>

namespace qsdw {

std::string family_name(Family f) {
  switch (f) {
    case Family::main: return "main";
    case Family::kirchhoff: return "kirchhoff";
    case Family::membrane: return "membrane";
    case Family::structural: return "structural";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "main") return Family::main;
  if (name == "kirchhoff") return Family::kirchhoff;
  if (name == "membrane") return Family::membrane;
  if (name == "structural") return Family::structural;
  throw ConfigError("unknown equation family '" + name +
                    "' (expected main, kirchhoff, membrane, or structural)");
}

void EquationSpec::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("equation: gamma must be positive");
  nl.validate(limit_case_p5);
  switch (family) {
    case Family::main:
      break;
    case Family::kirchhoff:
      if (nl.phi_active())
        throw ConfigError(
            "equation: the kirchhoff family replaces the gradient channel; set phi_kind = zero");
      if (kirchhoff_m != 0.0 && kirchhoff_m < 1.0)
        throw ConfigError("equation: kirchhoff_m must be >= 1, or 0 to disable the nonlocal term");
      break;
    case Family::membrane:
      break;  // phi_kind = power means the plate law phi_m(Laplacian u) is on
    case Family::structural:
      if (nl.phi_active())
        throw ConfigError(
            "equation: the structural family has no gradient channel; set phi_kind = zero");
      if (!(alpha >= 0.5 && alpha <= 1.0))
        throw ConfigError("equation: structural damping exponent alpha must lie in [1/2, 1]");
      break;
  }
}

double EquationSpec::dissipation_order() const {
  switch (family) {
    case Family::membrane: return 2.0;
    case Family::structural: return alpha;
    default: return 1.0;
  }
}

bool EquationSpec::is_linear() const {
  if (nl.f_active()) return false;
  switch (family) {
    case Family::main: return !nl.phi_active();
    case Family::kirchhoff: return kirchhoff_m == 0.0;
    case Family::membrane: return !nl.phi_active();
    case Family::structural: return true;
  }
  return false;
}

void modal_coeffs(const EquationSpec& eq, double lambda, double* stiffness, double* damping) {
  switch (eq.family) {
    case Family::main:
    case Family::kirchhoff:
      *stiffness = lambda;
      *damping = eq.gamma * lambda;
      return;
    case Family::membrane:
      *stiffness = lambda * lambda;
      *damping = eq.gamma * lambda * lambda;
      return;
    case Family::structural:
      *stiffness = lambda;
      *damping = eq.gamma * pow_fast(lambda, eq.alpha);
      return;
  }
}

double kirchhoff_phi(double s, const EquationSpec& eq) {
  if (eq.kirchhoff_m == 0.0) return 0.0;
  return pow_fast(s, eq.kirchhoff_m);
}

double kirchhoff_phi_primitive(double s, const EquationSpec& eq) {
  if (eq.kirchhoff_m == 0.0) return 0.0;
  return pow_fast(s, eq.kirchhoff_m + 1.0) / (eq.kirchhoff_m + 1.0);
}

namespace {

void check_finite(const Vec& values, const char* what) {
  for (Eigen::Index j = 0; j < values.size(); ++j)
    if (!std::isfinite(values[j]))
      throw NumericalError(std::string("rhs_accel: ") + what +
                           " produced a non-finite value at grid index " + std::to_string(j));
}

}  // namespace

Field nonlinear_accel(const Field& u, const EquationSpec& eq) {
  const Basis& basis = *u.basis;
  Vec acc = Vec::Zero(basis.mode_count());

  if (eq.nl.f_active()) {
    Vec vals = basis.to_grid(u.coeffs);
    for (Eigen::Index j = 0; j < vals.size(); ++j) vals[j] = f_eval(vals[j], eq.nl);
    check_finite(vals, "f(u)");
    acc -= basis.to_spectral(vals);
  }

  if (eq.nl.phi_active()) {
    if (eq.family == Family::main) {
      GradientSamples grad = basis.gradient_samples(u.coeffs);
      GradientSamples flux =
          basis.map_gradient(grad, [&](double mag) { return phi_prime_factor(mag, eq.nl); });
      check_finite(flux.axis[0], "phi'(grad u)");
      if (basis.dim() == 2) check_finite(flux.axis[1], "phi'(grad u)");
      acc += basis.div_from_samples(flux);
    } else if (eq.family == Family::membrane) {
      // -Laplacian(phi_m(Laplacian u)): all sine-land, analyzed on the grid.
      Vec lap_vals = basis.to_grid(-basis.eigenvalues().cwiseProduct(u.coeffs));
      for (Eigen::Index j = 0; j < lap_vals.size(); ++j)
        lap_vals[j] = membrane_phi(lap_vals[j], eq.nl);
      check_finite(lap_vals, "phi_m(Laplacian u)");
      acc += basis.eigenvalues().cwiseProduct(basis.to_spectral(lap_vals));
    }
  }

  if (eq.has_forcing()) {
    if (eq.g.basis.get() != u.basis.get())
      throw ConfigError("rhs_accel: forcing field uses a different basis object");
    acc += eq.g.coeffs;
  }

  return Field(u.basis, std::move(acc));
}

Field rhs_accel(const State& state, const EquationSpec& eq) {
  const Basis& basis = *state.u.basis;
  Field out = nonlinear_accel(state.u, eq);

  const Vec& lam = basis.eigenvalues();
  double stiff, damp;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    modal_coeffs(eq, lam[k], &stiff, &damp);
    out.coeffs[k] -= stiff * state.u.coeffs[k] + damp * state.v.coeffs[k];
  }

  if (eq.family == Family::kirchhoff && eq.kirchhoff_m != 0.0) {
    const double grad_sq = basis.mode_l2sq() * lam.cwiseProduct(state.u.coeffs).dot(state.u.coeffs);
    const double phi = kirchhoff_phi(grad_sq, eq);
    out.coeffs -= phi * lam.cwiseProduct(state.u.coeffs);
  }

  return out;
}

}  // namespace qsdw
