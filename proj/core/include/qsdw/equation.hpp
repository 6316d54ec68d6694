#pragma once

#include <string>

#include "qsdw/field.hpp"
#include "qsdw/nonlinearity.hpp"

namespace qsdw {

// main:       u_tt - gamma*Laplacian(u_t) - Laplacian(u) + f(u) = div(phi'(grad u)) + g
// kirchhoff:  gradient channel replaced by the nonlocal factor
//             -(1 + Phi(||grad u||^2)) acting through the Laplacian, Phi(s) = s^m
// membrane:   u_tt + gamma*Laplacian^2(u_t) + Laplacian^2(u)
//             - Laplacian(phi_m(Laplacian u)) + f(u) = g
// structural: u_tt + gamma*(-Laplacian)^alpha(u_t) - Laplacian(u) + f(u) = g
enum class Family { main, kirchhoff, membrane, structural };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct EquationSpec {
  Family family = Family::main;
  double gamma = 1.0;
  double alpha = 1.0;        // structural damping exponent, in [1/2, 1]
  double kirchhoff_m = 1.0;  // nonlocal exponent; 0 is the documented "disabled" sentinel
  bool limit_case_p5 = false;
  NonlinearitySpec nl;
  Field g;  // forcing; a Field with no basis means zero forcing

  void validate() const;

  // Exponent s of the damping norm ||(-Laplacian)^{s/2} u_t|| that the energy
  // identity dissipates: 1 (main, kirchhoff), 2 (membrane), alpha (structural).
  double dissipation_order() const;

  // True when every state-dependent term beyond the constant forcing is absent,
  // so the exact modal propagator applies.
  bool is_linear() const;

  bool has_forcing() const { return static_cast<bool>(g.basis); }
};

// Per-mode linear coefficients: u_k'' + damping*u_k' + stiffness*u_k = (nonlinear).
void modal_coeffs(const EquationSpec& eq, double lambda, double* stiffness, double* damping);

// Kirchhoff ingredients. Phi(s) = s^kirchhoff_m (0 when disabled).
double kirchhoff_phi(double s, const EquationSpec& eq);
double kirchhoff_phi_primitive(double s, const EquationSpec& eq);

// Acceleration from everything except the family's modal linear part:
// -f(u) + div(phi'(grad u)) [main], -Laplacian(phi_m(Laplacian u)) [membrane],
// plus the forcing. The Kirchhoff nonlocal term is NOT included here; implicit
// steps fold it into the modal stiffness instead.
Field nonlinear_accel(const Field& u, const EquationSpec& eq);

// Full acceleration u_tt of the state, modal linear part + nonlinear_accel +
// (for kirchhoff) the explicit nonlocal term.
Field rhs_accel(const State& state, const EquationSpec& eq);

}  // namespace qsdw
