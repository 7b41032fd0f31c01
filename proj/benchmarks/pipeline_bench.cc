#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "cpametric/cpa_metric.h"
#include "cpametric/floquet_oracle.h"
#include "cpametric/sdp_assembly.h"
#include "cpametric/sdp_solver.h"
#include "cpametric/triangulation.h"
#include "cpametric/verifier.h"

namespace cpametric {
namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
const char* kLinear1d = "dim = 1; period = 2*pi; f1 = -x1 + sin(t)";
const char* kOscillator = "dim = 2; period = 2*pi; f1 = x2; f2 = -x1 - 2*x2 + sin(t)";

SimplicialComplex linear_complex(const SystemDefinition& sys, int level) {
  SimplicialComplex c =
      build_complex({RegionBox{{-2.0}, {1.0}}}, kTwoPi, level, ScalingMatrix::identity(1));
  c.attach_derivative_bounds(sys);
  return c;
}

SimplicialComplex oscillator_complex(const SystemDefinition& sys, int level) {
  SimplicialComplex c =
      build_complex({RegionBox{{-0.6, -0.6}, {0.6, 0.6}}}, kTwoPi, level,
                    ScalingMatrix::from_spatial(std::vector<double>{0.765, 0.765}));
  c.attach_derivative_bounds(sys);
  return c;
}

void BM_BuildComplex2d(benchmark::State& state) {
  const SystemDefinition sys = parse_system(kOscillator);
  for (auto _ : state) {
    benchmark::DoNotOptimize(oscillator_complex(sys, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_BuildComplex2d)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_Assemble2d(benchmark::State& state) {
  const SystemDefinition sys = parse_system(kOscillator);
  const SimplicialComplex c = oscillator_complex(sys, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble(c, sys));
  state.counters["simplices"] = c.simplex_count();
}
BENCHMARK(BM_Assemble2d)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_SolveLinear1d(benchmark::State& state) {
  const SystemDefinition sys = parse_system(kLinear1d);
  const SimplicialComplex c = linear_complex(sys, static_cast<int>(state.range(0)));
  const AssembledProgram program = assemble(c, sys);
  for (auto _ : state) benchmark::DoNotOptimize(solve(program.problem));
  state.counters["variables"] = program.map.size();
}
BENCHMARK(BM_SolveLinear1d)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_VerifySamples1d(benchmark::State& state) {
  const SystemDefinition sys = parse_system(kLinear1d);
  const SimplicialComplex c = linear_complex(sys, 5);
  const AssembledProgram program = assemble(c, sys);
  const Solution sol = solve(program.problem);
  const CPAMetric cpa(c, program.map.metric_values(sol.y));
  const MetricWitness witness = MetricWitness::from_solution(program, sol.y, 0.01);
  VerifierSettings settings;
  settings.samples_per_simplex = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verify_contraction_sampled(cpa, sys, witness, settings));
  state.SetItemsProcessed(state.iterations() * c.simplex_count() * state.range(0));
}
BENCHMARK(BM_VerifySamples1d)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_LmValue2d(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(2, 2), j(2, 2), d(2, 2);
  a << g(rng), g(rng), g(rng), g(rng);
  const Eigen::MatrixXd metric = a * a.transpose() + Eigen::MatrixXd::Identity(2, 2);
  j << 0, 1, -1, -2;
  d << g(rng), 0.1, 0.1, g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(lm_value(metric, j, d));
}
BENCHMARK(BM_LmValue2d);

void BM_Monodromy2d(benchmark::State& state) {
  const SystemDefinition sys = parse_system(kOscillator);
  const FloquetResult orbit = find_periodic_orbit(sys, Eigen::VectorXd::Zero(2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(monodromy(sys, orbit, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_Monodromy2d)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cpametric

BENCHMARK_MAIN();
