#include "qsdw/basis.hpp"

#include <string>

namespace qsdw {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}
}  // namespace

BasisPtr Basis::build(int dim, int modes_per_axis, std::vector<double> lengths,
                      int grid_per_axis) {
  require(dim == 1 || dim == 2,
          "build_basis: dim must be 1 or 2 (got " + std::to_string(dim) + ")");
  require(modes_per_axis >= 1, "build_basis: modes_per_axis must be >= 1 (got " +
                                   std::to_string(modes_per_axis) + ")");
  if (lengths.empty()) lengths.assign(static_cast<std::size_t>(dim), kPi);
  require(static_cast<int>(lengths.size()) == dim,
          "build_basis: lengths must have one entry per axis (got " +
              std::to_string(lengths.size()) + " for dim " + std::to_string(dim) + ")");
  for (double L : lengths)
    require(L > 0.0 && std::isfinite(L), "build_basis: domain lengths must be positive");

  const int N = modes_per_axis;
  const int min_M = (3 * N + 1) / 2;  // ceil(3N/2), de-aliasing margin
  int M = grid_per_axis;
  if (M < 0) M = min_M;
  require(M >= min_M, "build_basis: grid_per_axis must be >= ceil(3*modes/2) = " +
                          std::to_string(min_M) + " (got " + std::to_string(M) + ")");

  auto b = std::shared_ptr<Basis>(new Basis());
  b->dim_ = dim;
  b->N_ = N;
  b->M_ = M;
  b->L_[0] = lengths[0];
  b->L_[1] = dim == 2 ? lengths[1] : 0.0;

  b->weight_ = 1.0;
  b->l2sq_ = 1.0;
  for (int a = 0; a < dim; ++a) {
    b->weight_ *= lengths[static_cast<std::size_t>(a)] / (M + 1);
    b->l2sq_ *= lengths[static_cast<std::size_t>(a)] / 2.0;
  }

  for (int a = 0; a < dim; ++a) {
    Vec g(N);
    for (int k = 1; k <= N; ++k) g[k - 1] = k * kPi / lengths[static_cast<std::size_t>(a)];
    b->g_[static_cast<std::size_t>(a)] = std::move(g);
  }

  if (dim == 1) {
    b->lambda_ = b->g_[0].array().square();
  } else {
    b->lambda_.resize(Eigen::Index(N) * N);
    for (int k1 = 0; k1 < N; ++k1)
      for (int k0 = 0; k0 < N; ++k0)
        b->lambda_[k0 + Eigen::Index(N) * k1] =
            b->g_[0][k0] * b->g_[0][k0] + b->g_[1][k1] * b->g_[1][k1];
  }
  b->lambda1_ = b->lambda_[0];

  b->S_.resize(M, N);
  b->C_.resize(M, N);
  for (int j = 0; j < M; ++j) {
    const double theta = (j + 1) * kPi / (M + 1);
    for (int k = 1; k <= N; ++k) {
      b->S_(j, k - 1) = std::sin(k * theta);
      b->C_(j, k - 1) = std::cos(k * theta);
    }
  }

  b->alt_.resize(N);
  for (int k = 1; k <= N; ++k) b->alt_[k - 1] = (k % 2 == 0) ? 1.0 : -1.0;

  Mat cos_full(M, M);
  for (int j = 0; j < M; ++j) {
    const double theta = (j + 1) * kPi / (M + 1);
    for (int m = 0; m < M; ++m) cos_full(j, m) = std::cos(m * theta);
  }
  b->cos_lu_.compute(cos_full);

  return b;
}

Eigen::Index Basis::flat_mode(int k0, int k1) const {
  require(k0 >= 1 && k0 <= N_, "flat_mode: axis-0 index out of range");
  if (dim_ == 1) return k0 - 1;
  require(k1 >= 1 && k1 <= N_, "flat_mode: axis-1 index out of range");
  return (k0 - 1) + Eigen::Index(N_) * (k1 - 1);
}

Vec Basis::to_grid(const Vec& coeffs) const {
  require(coeffs.size() == mode_count(), "to_grid: coefficient vector has wrong size");
  if (dim_ == 1) return S_ * coeffs;
  Eigen::Map<const Mat> U(coeffs.data(), N_, N_);
  Vec out(grid_count());
  Eigen::Map<Mat>(out.data(), M_, M_) = S_ * U * S_.transpose();
  return out;
}

Vec Basis::to_spectral(const Vec& grid_values) const {
  require(grid_values.size() == grid_count(), "to_spectral: grid vector has wrong size");
  const double c = 2.0 / (M_ + 1);
  if (dim_ == 1) return c * (S_.transpose() * grid_values);
  Eigen::Map<const Mat> V(grid_values.data(), M_, M_);
  Vec out(mode_count());
  Eigen::Map<Mat>(out.data(), N_, N_) = (c * c) * (S_.transpose() * V * S_);
  return out;
}

std::array<Vec, 2> Basis::grad_to_grid(const Vec& coeffs) const {
  require(coeffs.size() == mode_count(), "grad_to_grid: coefficient vector has wrong size");
  std::array<Vec, 2> out;
  if (dim_ == 1) {
    out[0] = C_ * g_[0].cwiseProduct(coeffs);
    return out;
  }
  Eigen::Map<const Mat> U(coeffs.data(), N_, N_);
  out[0].resize(grid_count());
  out[1].resize(grid_count());
  Eigen::Map<Mat>(out[0].data(), M_, M_) = C_ * (g_[0].asDiagonal() * U) * S_.transpose();
  Eigen::Map<Mat>(out[1].data(), M_, M_) = S_ * (U * g_[1].asDiagonal()) * C_.transpose();
  return out;
}

GradientSamples Basis::gradient_samples(const Vec& coeffs) const {
  GradientSamples s;
  s.dim = dim_;
  auto interior = grad_to_grid(coeffs);
  s.axis[0] = std::move(interior[0]);
  if (dim_ == 1) {
    s.face[0][0] = Vec::Constant(1, g_[0].dot(coeffs));
    s.face[0][1] = Vec::Constant(1, g_[0].cwiseProduct(alt_).dot(coeffs));
    return s;
  }
  s.axis[1] = std::move(interior[1]);
  Eigen::Map<const Mat> U(coeffs.data(), N_, N_);
  s.face[0][0] = S_ * (U.transpose() * g_[0]);
  s.face[0][1] = S_ * (U.transpose() * g_[0].cwiseProduct(alt_));
  s.face[1][0] = S_ * (U * g_[1]);
  s.face[1][1] = S_ * (U * g_[1].cwiseProduct(alt_));
  return s;
}

Vec Basis::div_from_grid(const std::array<Vec, 2>& axis_values) const {
  for (int a = 0; a < dim_; ++a)
    require(axis_values[static_cast<std::size_t>(a)].size() == grid_count(),
            "div_from_grid: component vector has wrong size");
  const double c = 2.0 / (M_ + 1);
  if (dim_ == 1) {
    // Interpolate by cosine modes 0..M-1 through the interior points, then
    // differentiate exactly: mode m cosine feeds sine mode m.
    Vec coef = cos_lu_.solve(axis_values[0]);
    Vec out(N_);
    for (int k = 1; k <= N_; ++k) out[k - 1] = -g_[0][k - 1] * coef[k];
    return out;
  }
  Vec out = Vec::Zero(mode_count());
  Eigen::Map<Mat> R(out.data(), N_, N_);
  {
    Eigen::Map<const Mat> A(axis_values[0].data(), M_, M_);
    Mat coef = cos_lu_.solve(Mat(A));          // rows: cosine modes along axis 0
    Mat t = c * (coef * S_);                   // sine analysis along axis 1
    for (int k0 = 1; k0 <= N_; ++k0)
      R.row(k0 - 1) -= g_[0][k0 - 1] * t.row(k0).head(N_);
  }
  {
    Eigen::Map<const Mat> A(axis_values[1].data(), M_, M_);
    Mat coef = cos_lu_.solve(Mat(A.transpose()));  // rows: cosine modes along axis 1
    Mat t = c * (coef * S_);                       // sine analysis along axis 0, (m, k0)
    for (int k1 = 1; k1 <= N_; ++k1)
      R.col(k1 - 1) -= g_[1][k1 - 1] * t.row(k1).head(N_).transpose();
  }
  return out;
}

Vec Basis::div_from_samples(const GradientSamples& s) const {
  require(s.dim == dim_, "div_from_samples: sample dimension mismatch");
  for (int a = 0; a < dim_; ++a) {
    require(s.axis[static_cast<std::size_t>(a)].size() == grid_count(),
            "div_from_samples: interior component has wrong size");
    for (int side = 0; side < 2; ++side)
      require(s.face[static_cast<std::size_t>(a)][static_cast<std::size_t>(side)].size() ==
                  face_count(),
              "div_from_samples: face component has wrong size");
  }
  const double c = 2.0 / (M_ + 1);
  if (dim_ == 1) {
    const double a0 = s.face[0][0][0];
    const double aL = s.face[0][1][0];
    Vec b = C_.transpose() * s.axis[0];
    b.array() += 0.5 * a0;
    b += (0.5 * aL) * alt_;
    return (-c) * g_[0].cwiseProduct(b);
  }
  Vec out = Vec::Zero(mode_count());
  Eigen::Map<Mat> R(out.data(), N_, N_);
  {
    Eigen::Map<const Mat> A(s.axis[0].data(), M_, M_);
    Mat B = C_.transpose() * A;                                   // (k0, j1)
    B += 0.5 * (Vec::Ones(N_) * s.face[0][0].transpose());        // x0 = 0 face
    B += 0.5 * (alt_ * s.face[0][1].transpose());                 // x0 = L0 face
    Mat t = (c * c) * (B * S_);                                   // (k0, k1)
    R -= g_[0].asDiagonal() * t;
  }
  {
    Eigen::Map<const Mat> A(s.axis[1].data(), M_, M_);
    Mat B = C_.transpose() * Mat(A.transpose());                  // (k1, j0)
    B += 0.5 * (Vec::Ones(N_) * s.face[1][0].transpose());
    B += 0.5 * (alt_ * s.face[1][1].transpose());
    Mat t = (c * c) * (B * S_);                                   // (k1, k0)
    R -= (g_[1].asDiagonal() * t).transpose();
  }
  return out;
}

double Basis::integrate_values(const Vec& grid_values) const {
  require(grid_values.size() == grid_count(), "integrate_values: grid vector has wrong size");
  return weight_ * grid_values.sum();
}

double Basis::lp_norm_values(const Vec& grid_values, double r) const {
  require(grid_values.size() == grid_count(), "lp_norm: grid vector has wrong size");
  require(r >= 1.0, "lp_norm: exponent must be >= 1");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < grid_values.size(); ++j)
    acc += std::pow(std::abs(grid_values[j]), r);
  return std::pow(weight_ * acc, 1.0 / r);
}

BasisPtr build_basis(int dim, int modes_per_axis, std::vector<double> lengths,
                     int grid_per_axis) {
  return Basis::build(dim, modes_per_axis, std::move(lengths), grid_per_axis);
}

}  // namespace qsdw
