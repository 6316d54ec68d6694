#pragma once

#include <array>

namespace qsdw {

// Exact solution of the scalar mode ODE
//   u'' + damping * u' + stiffness * u = 0,  u(0) = u0, u'(0) = v0,
// evaluated at time t. Returns {u(t), u'(t)}. Stable through the repeated
// root and overflow-free for arbitrarily stiff modes (slow-root asymptotics
// take over once the hyperbolic branch would overflow).
std::array<double, 2> linear_modal_exact_general(double u0, double v0, double damping,
                                                 double stiffness, double t);

// The damped wave mode: u'' + gamma*lambda*u' + lambda*u = 0.
std::array<double, 2> linear_modal_exact(double u0, double v0, double lambda, double gamma,
                                         double t);

// Real part of the slow characteristic root of
//   r^2 + damping*r + stiffness = 0
// (the root of smaller |Re|); for complex roots this is -damping/2. This is
// the asymptotic decay rate of the mode.
double slow_root_real(double damping, double stiffness);

}  // namespace qsdw
