#pragma once

#include <array>
#include <cstdint>

#include "qsdw/common.hpp"

namespace qsdw {

enum class PhiKind { power, zero };
enum class FKind { power, zero };

// Pointwise laws: the gradient potential phi(eta) = |eta|^{p+1} (radial in the
// gradient) and the displacement term f(s) = s|s|^q - C_f s with primitive F.
struct NonlinearitySpec {
  double p = 1.0;
  double q = 1.0;
  double C_f = 0.0;
  PhiKind phi_kind = PhiKind::power;
  FKind f_kind = FKind::power;

  bool phi_active() const { return phi_kind == PhiKind::power; }
  bool f_active() const { return f_kind == FKind::power; }

  // Throws ConfigError outside p in [1,5) (p = 5 only with the limit flag),
  // q > 0, C_f >= 0.
  void validate(bool limit_case_p5 = false) const;
};

double f_eval(double s, const NonlinearitySpec& nl);
double F_eval(double s, const NonlinearitySpec& nl);
double f_prime(double s, const NonlinearitySpec& nl);

// Radial gradient potential and its derivatives; phi' as a vector map is
// phi_prime_factor(|eta|) * eta.
double phi_eval(double mag, const NonlinearitySpec& nl);
double phi_prime_factor(double mag, const NonlinearitySpec& nl);
double phi_prime(double eta, const NonlinearitySpec& nl);           // scalar argument
double phi_second(double mag, const NonlinearitySpec& nl);          // radial second derivative

// Membrane pointwise law applied to Laplacian values: theta|theta|^{p-1} with
// primitive |theta|^{p+1}/(p+1).
double membrane_phi(double theta, const NonlinearitySpec& nl);
double membrane_phi_primitive(double theta, const NonlinearitySpec& nl);

// Normalized strong-monotonicity quotient of phi':
//   [phi'(eta1) - phi'(eta2)] . (eta1 - eta2) / ((|eta1|+|eta2|)^{p-1} |eta1-eta2|^2).
// Identically 2 when p = 1; strictly positive for p in [1,5). Coincident
// inputs are rejected.
double monotonicity_gap(double eta1, double eta2, const NonlinearitySpec& nl);
double monotonicity_gap(const std::array<double, 2>& eta1, const std::array<double, 2>& eta2,
                        const NonlinearitySpec& nl);

// Sampled verification of the structural conditions the estimates rest on.
struct ConditionsReport {
  double a0_hat = 0.0;     // sup |f'(s)| / (1 + |s|^q)
  double a1_hat = 0.0;     // sup |f(s)| / (1 + |s|^{q+1})
  double C_hat = 0.0;      // one-sided bound: f'(s) >= -C_hat
  double delta_hat = 0.0;  // coercivity defect: F(s) >= -delta_hat * s^2
  double a_hat = 0.0;      // minimal sampled monotonicity gap of phi'
  int samples = 0;
  bool pass = false;
};

ConditionsReport validate_conditions(const NonlinearitySpec& nl, int samples = 10000,
                                     std::uint64_t seed = 12345);

}  // namespace qsdw
