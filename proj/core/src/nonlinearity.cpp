#include "qsdw/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qsdw/rng.hpp"

namespace qsdw {

void NonlinearitySpec::validate(bool limit_case_p5) const {
  if (phi_active()) {
    const double p_max = limit_case_p5 ? 5.0 : std::nextafter(5.0, 0.0);
    if (!(p >= 1.0 && p <= p_max))
      throw ConfigError("nonlinearity: p must lie in [1,5)" +
                        std::string(limit_case_p5 ? " (p = 5 allowed in the limit case)" : "") +
                        ", got " + std::to_string(p));
  }
  if (f_active() && !(q > 0.0))
    throw ConfigError("nonlinearity: q must be positive, got " + std::to_string(q));
  if (!(C_f >= 0.0))
    throw ConfigError("nonlinearity: C_f must be >= 0, got " + std::to_string(C_f));
}

double f_eval(double s, const NonlinearitySpec& nl) {
  if (!nl.f_active()) return 0.0;
  return s * std::pow(std::abs(s), nl.q) - nl.C_f * s;
}

double F_eval(double s, const NonlinearitySpec& nl) {
  if (!nl.f_active()) return 0.0;
  return std::pow(std::abs(s), nl.q + 2.0) / (nl.q + 2.0) - 0.5 * nl.C_f * s * s;
}

double f_prime(double s, const NonlinearitySpec& nl) {
  if (!nl.f_active()) return 0.0;
  return (nl.q + 1.0) * std::pow(std::abs(s), nl.q) - nl.C_f;
}

double phi_eval(double mag, const NonlinearitySpec& nl) {
  if (!nl.phi_active()) return 0.0;
  return std::pow(std::abs(mag), nl.p + 1.0);
}

double phi_prime_factor(double mag, const NonlinearitySpec& nl) {
  if (!nl.phi_active()) return 0.0;
  mag = std::abs(mag);
  if (mag == 0.0) return nl.p == 1.0 ? nl.p + 1.0 : 0.0;
  return (nl.p + 1.0) * std::pow(mag, nl.p - 1.0);
}

double phi_prime(double eta, const NonlinearitySpec& nl) {
  return phi_prime_factor(std::abs(eta), nl) * eta;
}

double phi_second(double mag, const NonlinearitySpec& nl) {
  if (!nl.phi_active()) return 0.0;
  mag = std::abs(mag);
  if (mag == 0.0) return nl.p == 1.0 ? nl.p * (nl.p + 1.0) : 0.0;
  return nl.p * (nl.p + 1.0) * std::pow(mag, nl.p - 1.0);
}

double membrane_phi(double theta, const NonlinearitySpec& nl) {
  if (!nl.phi_active()) return 0.0;
  if (theta == 0.0) return 0.0;
  return theta * std::pow(std::abs(theta), nl.p - 1.0);
}

double membrane_phi_primitive(double theta, const NonlinearitySpec& nl) {
  if (!nl.phi_active()) return 0.0;
  return std::pow(std::abs(theta), nl.p + 1.0) / (nl.p + 1.0);
}

namespace {

double gap_impl(double dot_diff, double mag1, double mag2, double dist2,
                const NonlinearitySpec& nl) {
  if (dist2 == 0.0)
    throw ConfigError("monotonicity_gap: inputs must differ");
  const double scale = std::pow(mag1 + mag2, nl.p - 1.0);
  return dot_diff / (scale * dist2);
}

}  // namespace

double monotonicity_gap(double eta1, double eta2, const NonlinearitySpec& nl) {
  const double d = eta1 - eta2;
  const double dot = (phi_prime(eta1, nl) - phi_prime(eta2, nl)) * d;
  return gap_impl(dot, std::abs(eta1), std::abs(eta2), d * d, nl);
}

double monotonicity_gap(const std::array<double, 2>& eta1, const std::array<double, 2>& eta2,
                        const NonlinearitySpec& nl) {
  const double m1 = std::hypot(eta1[0], eta1[1]);
  const double m2 = std::hypot(eta2[0], eta2[1]);
  const double f1 = phi_prime_factor(m1, nl);
  const double f2 = phi_prime_factor(m2, nl);
  const double d0 = eta1[0] - eta2[0];
  const double d1 = eta1[1] - eta2[1];
  const double dot = (f1 * eta1[0] - f2 * eta2[0]) * d0 + (f1 * eta1[1] - f2 * eta2[1]) * d1;
  return gap_impl(dot, m1, m2, d0 * d0 + d1 * d1, nl);
}

ConditionsReport validate_conditions(const NonlinearitySpec& nl, int samples,
                                     std::uint64_t seed) {
  nl.validate(true);
  if (samples < 2) throw ConfigError("validate_conditions: need at least 2 samples");

  ConditionsReport rep;
  rep.samples = samples;

  SplitMix64 gen(seed);
  auto log_uniform = [&gen]() {
    // |s| in [1e-3, 1e3], random sign
    const double mag = std::pow(10.0, -3.0 + 6.0 * gen.uniform01());
    return gen.uniform01() > 0.5 ? mag : -mag;
  };

  if (nl.f_active()) {
    double a0 = 0.0, a1 = 0.0, fp_min = 0.0, defect = 0.0;
    auto visit = [&](double s) {
      const double fp = f_prime(s, nl);
      const double fv = f_eval(s, nl);
      a0 = std::max(a0, std::abs(fp) / (1.0 + std::pow(std::abs(s), nl.q)));
      a1 = std::max(a1, std::abs(fv) / (1.0 + std::pow(std::abs(s), nl.q + 1.0)));
      fp_min = std::min(fp_min, fp);
      if (s != 0.0) defect = std::max(defect, -F_eval(s, nl) / (s * s));
    };
    visit(0.0);
    for (int i = 0; i < samples; ++i) visit(log_uniform());
    rep.a0_hat = a0;
    rep.a1_hat = a1;
    rep.C_hat = std::max(0.0, -fp_min);
    rep.delta_hat = defect;
  }

  if (nl.phi_active()) {
    double gap_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
      const double e1 = log_uniform();
      double e2 = log_uniform();
      if (e2 == e1) e2 = -e2;
      gap_min = std::min(gap_min, monotonicity_gap(e1, e2, nl));
    }
    rep.a_hat = gap_min;
  }

  bool ok = std::isfinite(rep.a0_hat) && std::isfinite(rep.a1_hat) &&
            std::isfinite(rep.C_hat) && std::isfinite(rep.delta_hat);
  if (nl.phi_active()) ok = ok && std::isfinite(rep.a_hat) && rep.a_hat > 0.0;
  rep.pass = ok;
  return rep;
}

}  // namespace qsdw
