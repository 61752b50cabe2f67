// SPDX-License-Identifier: Apache-2.0
#include "dcmg/equilibrium.hpp"
#include "dcmg/scenarios.hpp"
#include "dcmg/simulator.hpp"
#include "dcmg/stability.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace dcmg;

struct Fixture {
  MicrogridConfig config;
  GainSet gains;
  AssembledSystem sys;
  Vector X;
};

Fixture ring(int n) {
  Fixture f;
  f.config = ring_config(n);
  f.gains = resolve_gains(f.config);
  f.sys = assemble(f.config, f.gains, ControlMode::secondary);
  f.X = reconstruct_full(f.config, f.gains, solve_voltage(f.config)).X.stacked();
  f.X[0] += 0.5;
  return f;
}

void BM_VectorFieldComponents(benchmark::State& state) {
  const Fixture f = ring(static_cast<int>(state.range(0)));
  Vector dX(f.X.size());
  for (auto _ : state) {
    vector_field_components(f.sys, f.X, dX);
    benchmark::DoNotOptimize(dX.data());
  }
}
BENCHMARK(BM_VectorFieldComponents)->Arg(4)->Arg(16)->Arg(64);

void BM_VectorFieldDense(benchmark::State& state) {
  const Fixture f = ring(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vector_field(f.sys, f.X));
}
BENCHMARK(BM_VectorFieldDense)->Arg(4)->Arg(16)->Arg(64);

void BM_Rk4Steps(benchmark::State& state) {
  const Fixture f = ring(static_cast<int>(state.range(0)));
  IntegratorOptions o;
  o.dt = 1e-5;
  o.t_end = 1e-2;
  o.record_every = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(f.config, f.gains, f.X, {}, o));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Rk4Steps)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Certificate(benchmark::State& state) {
  const MicrogridConfig c = ring_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(certificate(c));
}
BENCHMARK(BM_Certificate)->Arg(6)->Arg(24)->Arg(96);

void BM_FixedPoint(benchmark::State& state) {
  const MicrogridConfig c = ring_config(static_cast<int>(state.range(0)));
  const ExistenceCertificate cert = certificate(c);
  for (auto _ : state) benchmark::DoNotOptimize(solve_zip_fixed_point(c, cert));
}
BENCHMARK(BM_FixedPoint)->Arg(6)->Arg(12)->Arg(24);  // ring(96) is past Delta = 1

void BM_AssessStability(benchmark::State& state) {
  const Fixture f = ring(static_cast<int>(state.range(0)));
  const Vector V = f.X.head(f.config.n());
  for (auto _ : state) benchmark::DoNotOptimize(assess_stability(f.config, f.gains, V));
}
BENCHMARK(BM_AssessStability)->Arg(6)->Arg(24);

}  // namespace

BENCHMARK_MAIN();
