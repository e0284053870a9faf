#include <numbers>

#include <benchmark/benchmark.h>

#include "optomech/dynamics.hpp"
#include "optomech/hamiltonians.hpp"
#include "optomech/phase_space.hpp"
#include "optomech/specfun.hpp"

using namespace optomech;

namespace {

AnalyticEvolutionSpec fig1(double eta) {
  AnalyticEvolutionSpec s;
  s.alpha = 2.0;
  s.gamma = 2.0;
  s.scaled_time = std::numbers::pi;
  s.params = SystemParams{0.0, 1.0, eta, 0.0, 0.01}.with_matched_kerr();
  return s;
}

void BM_DisplacedFockMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(specfun::displaced_fock_matrix({1.5, 0.4}, n, n));
  state.SetComplexityN(n);
}
BENCHMARK(BM_DisplacedFockMatrix)->RangeMultiplier(2)->Range(16, 512)->Complexity();

void BM_Laguerre(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(specfun::laguerre(n, 3, 7.5));
}
BENCHMARK(BM_Laguerre)->Arg(10)->Arg(100)->Arg(1000);

void BM_EvolveAnalytic(benchmark::State& state) {
  const AnalyticEvolutionSpec s = fig1(state.range(0) / 4.0);
  const TruncationSpec tr = dynamics::plan_truncation(s, 1e-12);
  for (auto _ : state) benchmark::DoNotOptimize(dynamics::evolve_analytic(s, tr));
}
BENCHMARK(BM_EvolveAnalytic)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_HusimiMirror(benchmark::State& state) {
  const AnalyticEvolutionSpec s = fig1(0.5);
  const TruncationSpec tr = dynamics::plan_truncation(s, 1e-12);
  GridGeometry g = phase_space::default_grid(s, Mode::mirror);
  g.n_re = g.n_im = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(phase_space::husimi_mechanical_analytic(s, g, tr));
}
BENCHMARK(BM_HusimiMirror)->Arg(51)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_HusimiCavity(benchmark::State& state) {
  const AnalyticEvolutionSpec s = fig1(0.5);
  const TruncationSpec tr = dynamics::plan_truncation(s, 1e-12);
  GridGeometry g = phase_space::default_grid(s, Mode::cavity);
  g.n_re = g.n_im = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(phase_space::husimi_cavity_analytic(s, g, tr));
}
BENCHMARK(BM_HusimiCavity)->Arg(51)->Arg(101)->Unit(benchmark::kMillisecond);

void BM_Propagation(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const TruncationSpec tr{d, d};
  const SystemParams p = SystemParams{0.0, 1.0, 0.25, 0.0, 0.01}.with_matched_kerr();
  const BipartiteState psi0 = BipartiteState::basis(0, 0, d, d);
  for (auto _ : state) {
    const dynamics::Propagator u(hamiltonians::ion_laser_hamiltonian(p, tr), d);
    benchmark::DoNotOptimize(u.evolve(psi0, 100.0));
  }
}
BENCHMARK(BM_Propagation)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
