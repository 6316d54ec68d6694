#include <benchmark/benchmark.h>

#include "qsdw/equation.hpp"
#include "qsdw/integrator.hpp"
#include "qsdw/rng.hpp"

using namespace qsdw;

namespace {

Field random_field(const BasisPtr& basis, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vec c(basis->mode_count());
  for (Eigen::Index k = 0; k < c.size(); ++k)
    c[k] = (2.0 * rng.uniform01() - 1.0) / double(k + 1);
  return Field(basis, std::move(c));
}

EquationSpec cubic_equation() {
  EquationSpec eq;
  eq.nl.p = 3.0;
  eq.nl.q = 2.0;
  return eq;
}

void BM_to_grid(benchmark::State& state) {
  const auto basis = build_basis(1, int(state.range(0)));
  const Field f = random_field(basis, 1);
  for (auto _ : state) benchmark::DoNotOptimize(basis->to_grid(f.coeffs));
}
BENCHMARK(BM_to_grid)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

void BM_to_spectral(benchmark::State& state) {
  const auto basis = build_basis(1, int(state.range(0)));
  const Field f = random_field(basis, 2);
  const Vec vals = basis->to_grid(f.coeffs);
  for (auto _ : state) benchmark::DoNotOptimize(basis->to_spectral(vals));
}
BENCHMARK(BM_to_spectral)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

void BM_nonlinear_accel(benchmark::State& state) {
  const auto basis = build_basis(1, int(state.range(0)));
  const EquationSpec eq = cubic_equation();
  const Field u = random_field(basis, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nonlinear_accel(u, eq));
}
BENCHMARK(BM_nonlinear_accel)->Arg(32)->Arg(64)->Arg(128)->Arg(256);

void BM_nonlinear_accel_2d(benchmark::State& state) {
  const auto basis = build_basis(2, int(state.range(0)));
  const EquationSpec eq = cubic_equation();
  const Field u = random_field(basis, 4);
  for (auto _ : state) benchmark::DoNotOptimize(nonlinear_accel(u, eq));
}
BENCHMARK(BM_nonlinear_accel_2d)->Arg(16)->Arg(32)->Arg(64);

void BM_step_midpoint(benchmark::State& state) {
  const auto basis = build_basis(1, int(state.range(0)));
  const EquationSpec eq = cubic_equation();
  const State y{random_field(basis, 5), random_field(basis, 6)};
  for (auto _ : state) benchmark::DoNotOptimize(step_midpoint(y, eq, 1e-3));
}
BENCHMARK(BM_step_midpoint)->Arg(32)->Arg(64)->Arg(128);

void BM_step_imex(benchmark::State& state) {
  const auto basis = build_basis(1, int(state.range(0)));
  const EquationSpec eq = cubic_equation();
  const State y{random_field(basis, 7), random_field(basis, 8)};
  ImexHistory hist;
  for (auto _ : state) benchmark::DoNotOptimize(step_imex(y, eq, 1e-3, hist));
}
BENCHMARK(BM_step_imex)->Arg(32)->Arg(64)->Arg(128);

void BM_sobolev_norm(benchmark::State& state) {
  const auto basis = build_basis(1, int(state.range(0)));
  const Field f = random_field(basis, 9);
  for (auto _ : state) benchmark::DoNotOptimize(sobolev_norm(f, 1.0));
}
BENCHMARK(BM_sobolev_norm)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
