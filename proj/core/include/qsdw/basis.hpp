#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "qsdw/common.hpp"

namespace qsdw {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class Basis;
using BasisPtr = std::shared_ptr<const Basis>;

// Pointwise samples of a gradient-like vector field. Interior collocation
// values per axis, plus the two boundary faces per axis. A sine-series
// gradient has vanishing tangential components on a face, so each face entry
// stores the normal component only (corners carry zero and are omitted).
struct GradientSamples {
  int dim = 1;
  std::array<Vec, 2> axis;                 // interior values, grid_count() each
  std::array<std::array<Vec, 2>, 2> face;  // face[a][side], M^(dim-1) values
};

// Dirichlet sine eigenbasis on a box (0,L1)x...x(0,Ld), d in {1,2}, with the
// first modes_per_axis modes per axis and an interior collocation grid of
// grid_per_axis points per axis, x_j = j*L/(M+1), j = 1..M.
class Basis : public std::enable_shared_from_this<Basis> {
public:
  static BasisPtr build(int dim, int modes_per_axis,
                        std::vector<double> lengths = {},
                        int grid_per_axis = -1);

  int dim() const { return dim_; }
  int modes_per_axis() const { return N_; }
  int grid_per_axis() const { return M_; }
  double length(int axis) const { return L_[static_cast<std::size_t>(axis)]; }
  Eigen::Index mode_count() const { return lambda_.size(); }
  Eigen::Index grid_count() const { return dim_ == 1 ? M_ : Eigen::Index(M_) * M_; }
  Eigen::Index face_count() const { return dim_ == 1 ? 1 : M_; }

  // Laplacian eigenvalue per flat mode index; lambda_k = sum_i (pi k_i / L_i)^2.
  const Vec& eigenvalues() const { return lambda_; }
  double lambda1() const { return lambda1_; }

  // Interior cell weight prod_i L_i/(M+1) (rectangle rule on the open box).
  double quad_weight() const { return weight_; }
  // ||e_k||_{L^2}^2 = prod_i L_i/2, shared by every mode.
  double mode_l2sq() const { return l2sq_; }

  // Flat index helpers. 1D: mode k = idx+1. 2D: column-major, axis 0 fastest.
  Eigen::Index flat_mode(int k0, int k1 = 1) const;
  double grid_x(int axis, int j) const {  // j = 0..M-1 maps to x_{j+1}
    return (j + 1) * L_[static_cast<std::size_t>(axis)] / (M_ + 1);
  }

  // Synthesis on the interior grid and exact analysis back (band-limited data
  // round-trips to machine precision).
  Vec to_grid(const Vec& coeffs) const;
  Vec to_spectral(const Vec& grid_values) const;

  // Gradient of a sine series, interior values per axis.
  std::array<Vec, 2> grad_to_grid(const Vec& coeffs) const;
  // Same plus boundary faces; this is what the quadrature-exact divergence
  // and the gradient-channel integrals consume.
  GradientSamples gradient_samples(const Vec& coeffs) const;

  // Divergence analyzed back into the sine band, two routes.
  // From interior values only: per-axis cosine interpolation through the M
  // collocation points, then exact differentiation (LU solve per axis).
  Vec div_from_grid(const std::array<Vec, 2>& axis_values) const;
  // From interior + face samples: endpoint-completed trapezoid analysis. This
  // route is the exact negative adjoint of gradient_samples under the
  // trapezoid pairing, and div(grad u) = Laplacian u holds exactly on the
  // retained band.
  Vec div_from_samples(const GradientSamples& samples) const;

  // Interior rectangle rule, w * sum(values).
  double integrate_values(const Vec& grid_values) const;
  // L^r norm of pointwise values under the rectangle rule, r >= 1.
  double lp_norm_values(const Vec& grid_values, double r) const;

  // Trapezoid-rule integral of fn(|a|) over the box for sampled vector data:
  // full weight on interior points, half weight on faces.
  template <class Fn>
  double integrate_gradient(const GradientSamples& s, Fn&& fn) const {
    double acc = 0.0;
    if (dim_ == 1) {
      for (Eigen::Index j = 0; j < s.axis[0].size(); ++j) acc += fn(std::abs(s.axis[0][j]));
      double faces = fn(std::abs(s.face[0][0][0])) + fn(std::abs(s.face[0][1][0]));
      return weight_ * (acc + 0.5 * faces);
    }
    for (Eigen::Index j = 0; j < s.axis[0].size(); ++j)
      acc += fn(std::hypot(s.axis[0][j], s.axis[1][j]));
    double faces = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int side = 0; side < 2; ++side)
        for (Eigen::Index j = 0; j < s.face[a][side].size(); ++j)
          faces += fn(std::abs(s.face[a][side][j]));
    return weight_ * (acc + 0.5 * faces);
  }

  // Rescale sampled vector data by a radial factor: a(x) -> factor(|a(x)|) * a(x).
  template <class Fn>
  GradientSamples map_gradient(const GradientSamples& s, Fn&& factor) const {
    GradientSamples out;
    out.dim = dim_;
    if (dim_ == 1) {
      out.axis[0] = s.axis[0];
      for (Eigen::Index j = 0; j < out.axis[0].size(); ++j)
        out.axis[0][j] *= factor(std::abs(s.axis[0][j]));
      for (int side = 0; side < 2; ++side) {
        out.face[0][side] = s.face[0][side];
        out.face[0][side][0] *= factor(std::abs(s.face[0][side][0]));
      }
      return out;
    }
    out.axis[0] = s.axis[0];
    out.axis[1] = s.axis[1];
    for (Eigen::Index j = 0; j < out.axis[0].size(); ++j) {
      double f = factor(std::hypot(s.axis[0][j], s.axis[1][j]));
      out.axis[0][j] *= f;
      out.axis[1][j] *= f;
    }
    for (int a = 0; a < 2; ++a)
      for (int side = 0; side < 2; ++side) {
        out.face[a][side] = s.face[a][side];
        for (Eigen::Index j = 0; j < out.face[a][side].size(); ++j)
          out.face[a][side][j] *= factor(std::abs(s.face[a][side][j]));
      }
    return out;
  }

private:
  Basis() = default;

  int dim_ = 1;
  int N_ = 0;
  int M_ = 0;
  std::array<double, 2> L_{0.0, 0.0};
  Vec lambda_;
  double lambda1_ = 0.0;
  double weight_ = 0.0;
  double l2sq_ = 0.0;

  Mat S_;                       // M x N sine synthesis, sin(k j pi / (M+1))
  Mat C_;                       // M x N cosine synthesis, cos(k j pi / (M+1))
  std::array<Vec, 2> g_;        // per-axis derivative factors k pi / L_a
  Vec alt_;                     // (-1)^k for mode k = idx+1
  Eigen::PartialPivLU<Mat> cos_lu_;  // M x M cosine interpolation (modes 0..M-1)
};

BasisPtr build_basis(int dim, int modes_per_axis,
                     std::vector<double> lengths = {}, int grid_per_axis = -1);

// pow with exact fast paths for the exponents the solvers use pervasively.
inline double pow_fast(double x, double s) {
  if (s == 0.0) return 1.0;
  if (s == 1.0) return x;
  if (s == 2.0) return x * x;
  if (s == -1.0) return 1.0 / x;
  return std::pow(x, s);
}

}  // namespace qsdw
