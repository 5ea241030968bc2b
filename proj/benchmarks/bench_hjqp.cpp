#include <benchmark/benchmark.h>

#include <cmath>

#include "hjqp/dynamics.hpp"
#include "hjqp/effective.hpp"
#include "hjqp/ergodic.hpp"
#include "hjqp/homog.hpp"

namespace {

using namespace hjqp;

const Frequency& golden() {
  static const Frequency xi({1.0, std::sqrt(2.0)});
  return xi;
}

Potential prototype(double gamma) { return Potential(Suspension::prototype_a1(gamma), golden()); }

const EffectiveModel& model(double gamma) {
  static const EffectiveModel m1 = EffectiveModel::build(prototype(1.0), QuadratureSpec{});
  static const EffectiveModel m6 = EffectiveModel::build(prototype(6.0), QuadratureSpec{});
  return gamma < 2.0 ? m1 : m6;
}

void BM_EvalPotential(benchmark::State& state) {
  const auto P = prototype(6.0);
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_potential(P, x));
    x += 0.137;
  }
}
BENCHMARK(BM_EvalPotential);

void BM_LineIntegralSqrt(benchmark::State& state) {
  const auto P = prototype(6.0);
  const double length = double(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(line_integral_sqrt(P, 0.1, 0.0, length, QuadratureSpec{}));
}
BENCHMARK(BM_LineIntegralSqrt)->RangeMultiplier(10)->Range(10, 10000)->Unit(benchmark::kMicrosecond);

void BM_ComputeP0(benchmark::State& state) {
  const auto P = prototype(double(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_p0(P, QuadratureSpec{}));
}
BENCHMARK(BM_ComputeP0)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_EffectiveBuild(benchmark::State& state) {
  const auto P = prototype(double(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(EffectiveModel::build(P, QuadratureSpec{}));
}
BENCHMARK(BM_EffectiveBuild)->Arg(1)->Arg(6)->Unit(benchmark::kMillisecond)->Iterations(2);

void BM_EffectiveH(benchmark::State& state) {
  const auto& M = model(6.0);
  double p = M.p0();
  for (auto _ : state) {
    benchmark::DoNotOptimize(M.H(p));
    p = p > M.p0() + 4.0 ? M.p0() : p + 0.0137;
  }
}
BENCHMARK(BM_EffectiveH)->Unit(benchmark::kMicrosecond);

void BM_Lagrangian(benchmark::State& state) {
  const auto& M = model(1.0);
  const bool exact = state.range(0) != 0;
  double q = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(M.L(q, exact));
    q = q > 0.9 * M.q_max() ? 0.0 : q + 0.0123;
  }
}
BENCHMARK(BM_Lagrangian)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_CharacteristicEndpoint(benchmark::State& state) {
  const Characteristic c{prototype(6.0), 0.05, Branch::plus, 0.0};
  const double s = double(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(characteristic_endpoint(c, s, QuadratureSpec{}));
}
BENCHMARK(BM_CharacteristicEndpoint)->RangeMultiplier(10)->Range(100, 100000)->Unit(benchmark::kMillisecond);

void BM_BirkhoffAverage(benchmark::State& state) {
  const auto F = sum_of_sines_observable();
  const double T = double(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(birkhoff_average(F.F, golden(), T, QuadratureSpec{}));
}
BENCHMARK(BM_BirkhoffAverage)->RangeMultiplier(100)->Range(100, 1000000)->Unit(benchmark::kMillisecond);

void BM_UEps(benchmark::State& state) {
  const auto P = prototype(6.0);
  const auto u0 = InitialData::cone();
  const double eps = std::ldexp(1.0, -int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(u_eps(P, u0, 0.5, 1.0, eps, QuadratureSpec{}).u_eps);
}
BENCHMARK(BM_UEps)->DenseRange(3, 9, 3)->Unit(benchmark::kMillisecond);

void BM_UHom(benchmark::State& state) {
  const auto& M = model(6.0);
  const auto u0 = InitialData::cone();
  for (auto _ : state) benchmark::DoNotOptimize(u_hom(M, u0, 0.5, 1.0));
}
BENCHMARK(BM_UHom)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
