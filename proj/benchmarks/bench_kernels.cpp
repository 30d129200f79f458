#include <numbers>

#include <benchmark/benchmark.h>

#include "bhpair/ed.hpp"
#include "bhpair/finite_mps.hpp"
#include "bhpair/gaussian.hpp"
#include "bhpair/mps.hpp"
#include "linalg.hpp"

namespace {

using namespace bhpair;

ModelParams pairing_point(double g, double mu) {
  ModelParams p;
  p.g = g;
  p.U = 1.0;
  p.mu = mu;
  p.grand_canonical = true;
  return p;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols) {
  detail::UniformStream rng(42);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.next();
  return m;
}

void BM_NegativityLandscape(benchmark::State& state) {
  const int sites = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(negativity_landscape(1.0, 0.6, sites, sites / 5));
  state.SetItemsProcessed(state.iterations() * sites);
}
BENCHMARK(BM_NegativityLandscape)->Arg(100)->Arg(10000);

void BM_TwoModeED(benchmark::State& state) {
  const int n_max = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(two_mode_check(1.0, 0.6, std::numbers::pi, n_max));
}
BENCHMARK(BM_TwoModeED)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_RingGroundState(benchmark::State& state) {
  const FockSpace space(static_cast<int>(state.range(0)), 4);
  const auto H = build_hamiltonian(build_local_terms(pairing_point(0.3, 0.5)), space);
  for (auto _ : state) benchmark::DoNotOptimize(ground_state(H).energy);
  state.counters["dim"] = static_cast<double>(space.dim());
}
BENCHMARK(BM_RingGroundState)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

// Bond update shape: (chi d) x (chi d) two-site block truncated back to chi.
void BM_TruncatedSvd(benchmark::State& state) {
  const Eigen::Index chi = state.range(0), d = 11;
  const Eigen::MatrixXd a = random_matrix(chi * d, chi * d);
  for (auto _ : state) benchmark::DoNotOptimize(detail::truncated_svd(a, chi).S);
}
BENCHMARK(BM_TruncatedSvd)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_FullSvd(benchmark::State& state) {
  const Eigen::Index chi = state.range(0), d = 11;
  const Eigen::MatrixXd a = random_matrix(chi * d, chi * d);
  for (auto _ : state) benchmark::DoNotOptimize(detail::svd(a).S);
}
BENCHMARK(BM_FullSvd)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ItebdGround(benchmark::State& state) {
  const auto terms = build_local_terms(pairing_point(0.1, 0.5));
  ItebdOptions opt;
  opt.chi = static_cast<int>(state.range(0));
  opt.n_max = 6;
  for (auto _ : state) benchmark::DoNotOptimize(itebd_ground(terms, opt).converged);
}
BENCHMARK(BM_ItebdGround)->Arg(8)->Arg(16)->Unit(benchmark::kSecond)->Iterations(1);

void BM_FiniteGround(benchmark::State& state) {
  const auto terms = build_local_terms(pairing_point(0.2, 0.5));
  FiniteOptions opt;
  opt.chi = 16;
  opt.n_max = 4;
  const int length = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(finite_ground(terms, length, opt).energy);
}
BENCHMARK(BM_FiniteGround)->Arg(12)->Arg(24)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
