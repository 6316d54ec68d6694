#include "doctest.h"

#include "oracles.hpp"
#include "qsdw/basis.hpp"
#include "qsdw/field.hpp"
#include "qsdw/rng.hpp"

using namespace qsdw;
using oracle::pi;

namespace {

Vec random_vec(Eigen::Index n, std::uint64_t seed) {
  SplitMix64 gen(seed);
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = gen.normal();
  return out;
}

// Trapezoid pairing of two sampled vector fields: full weight inside, half
// weight on the faces. This is the inner product div_from_samples is adjoint
// under.
double pairing(const Basis& b, const GradientSamples& x, const GradientSamples& y) {
  double acc = 0.0;
  for (int a = 0; a < b.dim(); ++a) acc += x.axis[static_cast<std::size_t>(a)].dot(y.axis[static_cast<std::size_t>(a)]);
  double faces = 0.0;
  for (int a = 0; a < b.dim(); ++a)
    for (int side = 0; side < 2; ++side)
      faces += x.face[static_cast<std::size_t>(a)][static_cast<std::size_t>(side)].dot(
          y.face[static_cast<std::size_t>(a)][static_cast<std::size_t>(side)]);
  return b.quad_weight() * (acc + 0.5 * faces);
}

GradientSamples random_samples(const Basis& b, std::uint64_t seed) {
  GradientSamples s;
  s.dim = b.dim();
  for (int a = 0; a < b.dim(); ++a) {
    s.axis[static_cast<std::size_t>(a)] = random_vec(b.grid_count(), seed + 11 * a);
    for (int side = 0; side < 2; ++side)
      s.face[static_cast<std::size_t>(a)][static_cast<std::size_t>(side)] =
          random_vec(b.face_count(), seed + 100 * a + 17 * side);
  }
  return s;
}

}  // namespace

TEST_SUITE("basis") {

TEST_CASE("construction rejects bad arguments") {
  CHECK_THROWS_AS((void)build_basis(3, 4), ConfigError);
  CHECK_THROWS_AS((void)build_basis(1, 0), ConfigError);
  CHECK_THROWS_AS((void)build_basis(1, 8, {}, 5), ConfigError);  // M < ceil(3N/2)
  CHECK_THROWS_AS((void)build_basis(2, 4, {1.0}), ConfigError);  // one length for two axes
  CHECK_THROWS_AS((void)build_basis(1, 4, {-1.0}), ConfigError);
}

TEST_CASE("eigenvalues and geometry") {
  auto b1 = build_basis(1, 4);  // default length pi
  REQUIRE(b1->mode_count() == 4);
  for (int k = 1; k <= 4; ++k)
    CHECK(b1->eigenvalues()[k - 1] == doctest::Approx(double(k) * k).epsilon(1e-14));
  CHECK(b1->lambda1() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b1->mode_l2sq() == doctest::Approx(pi / 2).epsilon(1e-14));
  CHECK(b1->quad_weight() == doctest::Approx(pi / (b1->grid_per_axis() + 1)).epsilon(1e-14));
  CHECK(b1->grid_x(0, 0) == doctest::Approx(pi / (b1->grid_per_axis() + 1)).epsilon(1e-14));

  auto b2 = build_basis(2, 2);
  CHECK(b2->eigenvalues()[b2->flat_mode(1, 1)] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(b2->eigenvalues()[b2->flat_mode(2, 1)] == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(b2->eigenvalues()[b2->flat_mode(1, 2)] == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(b2->eigenvalues()[b2->flat_mode(2, 2)] == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(b2->mode_l2sq() == doctest::Approx(pi * pi / 4).epsilon(1e-14));

  auto bl = build_basis(1, 3, {2.0 * pi});  // lambda_k = (k/2)^2
  CHECK(bl->eigenvalues()[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(bl->eigenvalues()[2] == doctest::Approx(2.25).epsilon(1e-14));
}

TEST_CASE("synthesis matches direct sine sums") {
  auto b = build_basis(1, 7, {1.7}, 13);
  const Vec c = random_vec(7, 42);
  const Vec fast = b->to_grid(c);
  const Vec slow = oracle::to_grid_1d(c, 13, 1.7);
  CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);

  auto b2 = build_basis(2, 5, {pi, 2.0}, 8);
  const Vec c2 = random_vec(25, 43);
  const Vec fast2 = b2->to_grid(c2);
  const Vec slow2 = oracle::to_grid_2d(c2, 5, 8, pi, 2.0);
  CHECK((fast2 - slow2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("analysis inverts synthesis and matches the naive transform") {
  auto b = build_basis(1, 9, {}, 16);
  const Vec c = random_vec(9, 7);
  const Vec grid = b->to_grid(c);
  CHECK((b->to_spectral(grid) - c).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((oracle::to_spectral_1d(grid, 9) - c).cwiseAbs().maxCoeff() < 1e-12);

  auto b2 = build_basis(2, 6);
  const Vec c2 = random_vec(36, 8);
  CHECK((b2->to_spectral(b2->to_grid(c2)) - c2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Parseval holds exactly for band-limited data") {
  for (int dim : {1, 2}) {
    auto b = build_basis(dim, 6, dim == 1 ? std::vector<double>{1.3}
                                          : std::vector<double>{1.3, 0.9});
    const Vec c = random_vec(b->mode_count(), 99 + dim);
    const Vec f = b->to_grid(c);
    const double grid_sq = b->quad_weight() * f.squaredNorm();
    const double mode_sq = b->mode_l2sq() * c.squaredNorm();
    CHECK(grid_sq == doctest::Approx(mode_sq).epsilon(1e-13));
  }
}

TEST_CASE("divergence of the gradient is the Laplacian on the band") {
  for (int dim : {1, 2}) {
    auto b = build_basis(dim, 5);
    const Vec c = random_vec(b->mode_count(), 3 * dim);
    const Vec expected = (-b->eigenvalues().array() * c.array()).matrix();

    const Vec via_samples = b->div_from_samples(b->gradient_samples(c));
    CHECK((via_samples - expected).cwiseAbs().maxCoeff() < 1e-10);

    const Vec via_grid = b->div_from_grid(b->grad_to_grid(c));
    CHECK((via_grid - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("div_from_samples is the negative adjoint of gradient_samples") {
  // (grad u, s)_trapezoid = -(u, div s)_L2 for arbitrary sampled data s, to
  // machine precision. This is what makes the discrete energy identity exact.
  for (int dim : {1, 2}) {
    auto b = build_basis(dim, 6);
    const Vec u = random_vec(b->mode_count(), 21 * dim);
    const GradientSamples s = random_samples(*b, 77 * dim);

    const double lhs = pairing(*b, b->gradient_samples(u), s);
    const Vec div = b->div_from_samples(s);
    const double rhs = -b->mode_l2sq() * u.dot(div);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("quadrature identities on sin and cos powers") {
  auto b = build_basis(1, 8);
  const int M = b->grid_per_axis();

  // int_0^pi sin^4 = 3 pi / 8, and the interior rectangle rule is exact for it.
  Vec e1 = Vec::Zero(8);
  e1[0] = 1.0;
  const Vec s = b->to_grid(e1);
  CHECK(b->lp_norm_values(s, 4.0) ==
        doctest::Approx(std::pow(3.0 * pi / 8.0, 0.25)).epsilon(1e-13));

  // Constant data: rectangle rule misses the boundary cells, error O(1/M).
  auto bf = build_basis(1, 8, {}, 1024);
  CHECK(bf->lp_norm_values(Vec::Ones(1024), 2.0) ==
        doctest::Approx(std::sqrt(pi)).epsilon(1e-3));

  // Trapezoid-completed gradient integrals are exact for cos powers:
  // int_0^pi cos^2 = pi/2, int_0^pi cos^4 = 3 pi/8.
  const GradientSamples g = b->gradient_samples(e1);
  CHECK(b->integrate_gradient(g, [](double a) { return a * a; }) ==
        doctest::Approx(pi / 2).epsilon(1e-13));
  CHECK(b->integrate_gradient(g, [](double a) { return a * a * a * a; }) ==
        doctest::Approx(3.0 * pi / 8.0).epsilon(1e-13));
  (void)M;
}

TEST_CASE("sobolev norms and laplacian powers") {
  auto b = build_basis(1, 4);
  Vec c = Vec::Zero(4);
  c[1] = 0.5;  // mode 2, lambda = 4
  Field f(b, c);
  CHECK(sobolev_norm(f, 0.0) == doctest::Approx(0.5 * std::sqrt(pi / 2)).epsilon(1e-14));
  CHECK(sobolev_norm(f, 1.0) == doctest::Approx(2.0 * 0.5 * std::sqrt(pi / 2)).epsilon(1e-14));
  CHECK(sobolev_norm(f, -1.0) == doctest::Approx(0.25 * std::sqrt(pi / 2)).epsilon(1e-14));
  CHECK(sobolev_norm(f, 2.0) == doctest::Approx(4.0 * 0.5 * std::sqrt(pi / 2)).epsilon(1e-14));

  const Field lap = laplacian_pow(f, 1.0);
  CHECK(lap.coeffs[1] == doctest::Approx(2.0).epsilon(1e-14));

  // Fractional power: lambda^{1/2} = 2 on mode 2.
  const Field half = laplacian_pow(f, 0.5);
  CHECK(half.coeffs[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("fields demand a shared basis object") {
  auto a = build_basis(1, 4);
  auto b = build_basis(1, 4);  // same parameters, different object
  Field fa(a), fb(b);
  CHECK_THROWS_AS((void)(fa + fb), ConfigError);
  CHECK_THROWS_AS((void)inner(fa, fb), ConfigError);
  CHECK_THROWS_AS(State(fa, fb), ConfigError);
  CHECK_THROWS_AS(Field(a, Vec::Zero(3)), ConfigError);
}

}  // TEST_SUITE
