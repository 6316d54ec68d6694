#pragma once

#include <cstdint>

#include "qsdw/diagnostics.hpp"

namespace qsdw {

// Kirchhoff admissibility: the dissipative structure needs
//   margin(s) = Phi(s)*s - int_0^s Phi >= 0 for all s >= 0,
// which for Phi(s) = s^m equals s^{m+1} * m/(m+1). Sampled on [0, s_max]
// including the s = 0 boundary case (margin exactly 0 there).
struct KirchhoffReport {
  bool pass = false;
  double min_margin = 0.0;
  int samples = 0;
};

KirchhoffReport validate_kirchhoff(double m, int samples = 10000, double s_max = 1e3,
                                   std::uint64_t seed = 777);

// Structural-damping admissibility: alpha in [1/2, 1]; for alpha >= 3/4 the
// growth of f is unrestricted, below that the displacement exponent must obey
// q + 2 < 6/(3 - 4*alpha). margin = 6/(3 - 4*alpha) - (q + 2).
struct StructuralReport {
  bool pass = false;
  bool unconditional = false;
  double margin = 0.0;
};

StructuralReport validate_structural(double alpha, double q);

// Energy report of a membrane-family state (checks the family tag first).
EnergyReport membrane_energy(const State& state, const EquationSpec& eq);

}  // namespace qsdw
