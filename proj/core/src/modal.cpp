#include "qsdw/modal.hpp"

#include <cmath>

namespace qsdw {

// With b = damping, c = stiffness the characteristic roots are
// -b/2 +- sqrt(s), s = b^2/4 - c. Write the solution through
//   C(t) = cos/cosh(sqrt(|s|) t), S(t) = sin/sinh(sqrt(|s|) t)/sqrt(|s|),
// which satisfy C' = s S, S' = C for either sign of s and degenerate smoothly
// (C = 1, S = t) at the repeated root.
std::array<double, 2> linear_modal_exact_general(double u0, double v0, double damping,
                                                 double stiffness, double t) {
  const double b = damping;
  const double s = 0.25 * b * b - stiffness;
  const double w0 = v0 + 0.5 * b * u0;

  double C, S;
  const double x2 = s * t * t;
  if (std::abs(x2) < 1e-12) {
    // Series keeps full precision through s = 0.
    C = 1.0 + 0.5 * x2 * (1.0 + x2 / 12.0);
    S = t * (1.0 + x2 / 6.0 * (1.0 + x2 / 20.0));
  } else if (s < 0.0) {
    const double w = std::sqrt(-s);
    C = std::cos(w * t);
    S = std::sin(w * t) / w;
  } else {
    const double r = std::sqrt(s);
    if (r * t <= 500.0) {
      C = std::cosh(r * t);
      S = std::sinh(r * t) / r;
    } else {
      // The fast root's contribution is below 1e-300 of the slow one; keep
      // only the slow root, written cancellation-free.
      const double r_slow = -stiffness / (0.5 * b + r);  // -b/2 + r
      const double r_fast = -0.5 * b - r;
      const double amp = (v0 - r_fast * u0) / (2.0 * r);
      const double u = amp * std::exp(r_slow * t);
      return {u, r_slow * u};
    }
  }

  const double decay = std::exp(-0.5 * b * t);
  const double u = decay * (u0 * C + w0 * S);
  const double du = decay * (w0 * C + s * u0 * S) - 0.5 * b * u;
  return {u, du};
}

std::array<double, 2> linear_modal_exact(double u0, double v0, double lambda, double gamma,
                                         double t) {
  return linear_modal_exact_general(u0, v0, gamma * lambda, lambda, t);
}

double slow_root_real(double damping, double stiffness) {
  const double s = 0.25 * damping * damping - stiffness;
  if (s <= 0.0) return -0.5 * damping;
  return -stiffness / (0.5 * damping + std::sqrt(s));
}

}  // namespace qsdw
