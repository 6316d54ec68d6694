#pragma once

#include <utility>
#include <vector>

#include "qsdw/equation.hpp"
#include "qsdw/integrator.hpp"

namespace qsdw {

// Slot-by-slot energy of a state:
//   total = 1/2||v||^2 + 1/2|u|_dirichlet^2 + phi_potential + int F(u) - (g,u).
// The dirichlet slot and the damping norm in the modified energy follow the
// family (H^1 for main/kirchhoff/structural, H^2 for membrane).
struct EnergyReport {
  double kinetic = 0.0;
  double dirichlet = 0.0;
  double phi_potential = 0.0;
  double f_potential = 0.0;
  double forcing = 0.0;
  double total = 0.0;
  double modified_total = 0.0;
  double alpha_used = 0.0;
};

// Default multiplier for the modified energy: min(gamma*lambda1, lambda1)/4,
// from the Poincare constant 1/lambda1 of the sine basis.
double default_modified_alpha(const EquationSpec& eq, const Basis& basis);

// alpha < 0 selects the default multiplier.
EnergyReport energy_report(const State& state, const EquationSpec& eq, double alpha = -1.0);

// Phase-space size functional:
//   ||v||^2 + ||grad u||_{L^{p+1}}^{p+1} + ||u||_{L^{q+2}}^{q+2},
// with the corresponding quadratic norms substituted whenever the
// phi/f channels are disabled (membrane uses ||Lap u||^2 in the middle slot).
double energy_norm(const State& state, const EquationSpec& eq);

// Norms of the difference of two states sharing a basis, plus the weighted
// negative-order energy
//   E_{-1} = gamma/2 ||w||_{H^1}^2 + (w_t, w) + (2/gamma)(||w_t||_{H^{-1}}^2 + ||w||^2),
// where w = u_a - u_b and w_t = v_a - v_b.
struct DiffMetrics {
  double l2 = 0.0;      // ||w||
  double h1 = 0.0;      // ||w||_{H^1}
  double hm1_dt = 0.0;  // ||w_t||_{H^{-1}}
  double e_minus1 = 0.0;
};

DiffMetrics diff_metrics(const State& a, const State& b, double gamma);

// Two-sided equivalence constants:
//   k1 (||w_t||_{H^{-1}}^2 + ||w||_{H^1}^2) <= E_{-1} <= k2 (same),
// with k1 = min(gamma/4, 1/gamma), k2 = max(3 gamma/4 + 2/(gamma lambda1), 3/gamma).
std::pair<double, double> e_minus1_constants(double gamma, double lambda1);

// Least-squares fit of ln y against t. rate = -slope, so positive rate means
// exponential decay. Requires >= 10 samples and strictly positive data.
struct FitResult {
  double rate = 0.0;
  double intercept = 0.0;  // ln y at t = 0
  double r_squared = 0.0;
};

FitResult fit_decay(const std::vector<double>& t, const std::vector<double>& y);

// Per-sample-interval defect of the energy balance E(t2) - E(t1) + D(t2) - D(t1),
// using the trajectory's accumulated dissipation integral. t holds the right
// endpoint of each interval.
struct BalanceSeries {
  std::vector<double> t;
  std::vector<double> r;
  double max_abs = 0.0;
};

BalanceSeries balance_residual(const Trajectory& traj, const EquationSpec& eq);

}  // namespace qsdw
