#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qsdw/equation.hpp"

namespace qsdw {

enum class Scheme { midpoint, imex, rk4_oracle };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct StepStats {
  int iterations = 0;
  double last_delta = 0.0;
};

struct IntegrateOptions {
  double tol = 1e-12;  // absolute L2 tolerance of the fixed-point update
  int max_iter = 50;
};

// One implicit-midpoint step. The modal linear part (and for Kirchhoff the
// nonlocal factor, evaluated once per nonlinear iteration) is solved exactly
// per mode; the remaining nonlinearity is Picard-iterated to opt.tol.
State step_midpoint(const State& y, const EquationSpec& eq, double dt,
                    const IntegrateOptions& opt = {}, StepStats* stats = nullptr);

// Crank-Nicolson on the modal linear part, two-step Adams-Bashforth
// extrapolation of the nonlinear acceleration. The first step bootstraps with
// a midpoint step. For linear problems this is exactly Crank-Nicolson.
struct ImexHistory {
  bool valid = false;
  Vec nl_accel_prev;  // nonlinear acceleration at the previous step
};
State step_imex(const State& y, const EquationSpec& eq, double dt, ImexHistory& hist,
                const IntegrateOptions& opt = {}, StepStats* stats = nullptr);

// Classical explicit RK4 on (u, v)' = (v, rhs_accel). Convergence-order
// oracle only; not meant for stiff production runs.
State step_rk4(const State& y, const EquationSpec& eq, double dt);

// Implicit-midpoint step of the first-order pseudo-parabolic flow
//   gamma * (-Laplacian) dw/dt = Laplacian w - shift*w - NL(w) + h,
// i.e. per mode  gamma*lambda_k w_k' = -(lambda_k + shift) w_k - NL(w)_k + h_k.
// `h_mid` must be the inhomogeneity evaluated at the step midpoint. The
// standard nonlinearity is NL(w) = f(w) - div(phi'(grad w)) (main family);
// the _custom variant accepts any NL with the same calling convention.
Field step_pseudoparabolic(const Field& w, const EquationSpec& eq, double dt, double shift,
                           const Field& h_mid, const IntegrateOptions& opt = {},
                           StepStats* stats = nullptr);
Field step_pseudoparabolic_custom(const Field& w, const EquationSpec& eq, double dt, double shift,
                                  const Field& h_mid,
                                  const std::function<Field(const Field&)>& nl,
                                  const IntegrateOptions& opt = {}, StepStats* stats = nullptr);

struct Sample {
  State state;
  double cum_dissipation = 0.0;  // integral of the dissipation rate up to state.t
  double diss_rate = 0.0;        // gamma * || (-Lap)^{s/2} v ||^2, s the family's order
};

struct Trajectory {
  std::vector<Sample> samples;
  double dt = 0.0;
  int cadence = 1;
  Scheme scheme = Scheme::midpoint;
};

// March steps = T/dt steps (T must be an integer multiple of dt, and cadence
// must divide the step count), recording every cadence-th state. The
// dissipation integral is accumulated per step with the trapezoid rule.
Trajectory integrate(const State& init, const EquationSpec& eq, double dt, double T,
                     int cadence = 1, Scheme scheme = Scheme::midpoint,
                     const IntegrateOptions& opt = {});

}  // namespace qsdw
