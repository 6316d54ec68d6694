#pragma once

#include <cmath>
#include <utility>

#include "qsdw/basis.hpp"

namespace qsdw {

// A sine series tied to its basis. Fields only combine when they share the
// same Basis object (identity, not just equal parameters).
struct Field {
  BasisPtr basis;
  Vec coeffs;

  Field() = default;
  explicit Field(BasisPtr b) : basis(std::move(b)), coeffs(Vec::Zero(basis->mode_count())) {}
  Field(BasisPtr b, Vec c) : basis(std::move(b)), coeffs(std::move(c)) {
    if (coeffs.size() != basis->mode_count())
      throw ConfigError("Field: coefficient vector has wrong size");
  }
};

inline void require_same_basis(const Field& a, const Field& b, const char* op) {
  if (a.basis.get() != b.basis.get())
    throw ConfigError(std::string(op) + ": fields use different basis objects");
}

inline Field operator+(const Field& a, const Field& b) {
  require_same_basis(a, b, "field addition");
  return Field(a.basis, a.coeffs + b.coeffs);
}
inline Field operator-(const Field& a, const Field& b) {
  require_same_basis(a, b, "field subtraction");
  return Field(a.basis, a.coeffs - b.coeffs);
}
inline Field operator*(double c, const Field& f) { return Field(f.basis, c * f.coeffs); }

// L^2 pairing (u, w) = prod(L_i/2) * sum_k u_k w_k.
inline double inner(const Field& a, const Field& b) {
  require_same_basis(a, b, "inner");
  return a.basis->mode_l2sq() * a.coeffs.dot(b.coeffs);
}

// || (-Laplacian)^{s/2} f ||_{L^2}; s may be negative or fractional.
inline double sobolev_norm(const Field& f, double s) {
  const Vec& lam = f.basis->eigenvalues();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    acc += pow_fast(lam[k], s) * f.coeffs[k] * f.coeffs[k];
  return std::sqrt(f.basis->mode_l2sq() * acc);
}

// (-Laplacian)^s f in coefficient space.
inline Field laplacian_pow(const Field& f, double s) {
  const Vec& lam = f.basis->eigenvalues();
  Vec out(f.coeffs.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) out[k] = pow_fast(lam[k], s) * f.coeffs[k];
  return Field(f.basis, std::move(out));
}

// Solution snapshot: displacement u, velocity v = du/dt, and the time stamp.
struct State {
  Field u;
  Field v;
  double t = 0.0;

  State() = default;
  State(Field u_, Field v_, double t_ = 0.0) : u(std::move(u_)), v(std::move(v_)), t(t_) {
    require_same_basis(u, v, "State");
  }
};

}  // namespace qsdw
