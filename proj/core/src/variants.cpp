#include "qsdw/variants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsdw/rng.hpp"

namespace qsdw {

KirchhoffReport validate_kirchhoff(double m, int samples, double s_max, std::uint64_t seed) {
  if (m != 0.0 && m < 1.0)
    throw ConfigError("validate_kirchhoff: m must be >= 1, or 0 for the disabled sentinel");
  if (samples < 1) throw ConfigError("validate_kirchhoff: need at least one sample");
  if (!(s_max > 0.0)) throw ConfigError("validate_kirchhoff: s_max must be positive");

  EquationSpec eq;
  eq.family = Family::kirchhoff;
  eq.kirchhoff_m = m;
  eq.nl.phi_kind = PhiKind::zero;

  KirchhoffReport rep;
  rep.samples = samples + 1;

  SplitMix64 gen(seed);
  double min_margin = std::numeric_limits<double>::infinity();
  auto visit = [&](double s) {
    const double margin = kirchhoff_phi(s, eq) * s - kirchhoff_phi_primitive(s, eq);
    min_margin = std::min(min_margin, margin);
  };
  visit(0.0);  // boundary case, margin exactly 0
  for (int i = 0; i < samples; ++i) visit(s_max * gen.uniform01());

  rep.min_margin = min_margin;
  rep.pass = std::isfinite(min_margin) && min_margin >= 0.0;
  return rep;
}

StructuralReport validate_structural(double alpha, double q) {
  if (!(alpha >= 0.5 && alpha <= 1.0))
    throw ConfigError("validate_structural: alpha must lie in [1/2, 1]");
  if (!(q > 0.0)) throw ConfigError("validate_structural: q must be positive");

  StructuralReport rep;
  if (alpha >= 0.75) {
    rep.unconditional = true;
    rep.margin = std::numeric_limits<double>::infinity();
    rep.pass = true;
    return rep;
  }
  rep.margin = 6.0 / (3.0 - 4.0 * alpha) - (q + 2.0);
  rep.pass = rep.margin > 0.0;
  return rep;
}

EnergyReport membrane_energy(const State& state, const EquationSpec& eq) {
  if (eq.family != Family::membrane)
    throw ConfigError("membrane_energy: equation family is not membrane");
  return energy_report(state, eq);
}

}  // namespace qsdw
