#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

#include "spaqr/driver.hpp"
#include "spaqr/kernels.hpp"
#include "spaqr/kernels_ref.hpp"

using namespace spaqr;

namespace {

Matrix randn(int m, int n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  Matrix M(m, n);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = d(g);
  return M;
}

// interface-like block: rank ~ n/4 plus small noise
Matrix lowrank(int m, int n, unsigned seed) {
  return randn(m, n / 4, seed) * randn(n / 4, n, seed + 1) + 1e-6 * randn(m, n, seed + 2);
}

void threads(benchmark::State& st, int arg) {
  omp_set_num_threads(arg);
  st.counters["threads"] = arg;
}

void BM_qr_house(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  threads(st, static_cast<int>(st.range(1)));
  Matrix B = randn(2 * n, n, 1);
  for (auto _ : st) benchmark::DoNotOptimize(qr_house(B));
}

void BM_qr_house_ref(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Matrix B = randn(2 * n, n, 1);
  for (auto _ : st) benchmark::DoNotOptimize(ref::qr_house(B));
}

void BM_apply_panel(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  threads(st, static_cast<int>(st.range(1)));
  QRFactor f = qr_house(randn(2 * n, n, 2));
  Matrix C = randn(2 * n, n, 3);
  for (auto _ : st) {
    apply_panel_left(f.panel, C, true);
    benchmark::ClobberMemory();
  }
}

void BM_apply_panel_ref(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  QRFactor f = ref::qr_house(randn(2 * n, n, 2));
  Matrix C = randn(2 * n, n, 3);
  for (auto _ : st) {
    ref::apply_panel_left(f.panel, C, true);
    benchmark::ClobberMemory();
  }
}

void BM_rrqr(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  threads(st, static_cast<int>(st.range(1)));
  Matrix M = lowrank(3 * n, n, 4);
  for (auto _ : st) benchmark::DoNotOptimize(rrqr_threshold(M, 1e-3));
}

void BM_rrqr_ref(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  Matrix M = lowrank(3 * n, n, 4);
  for (auto _ : st) benchmark::DoNotOptimize(ref::rrqr_threshold(M, 1e-3));
}

void BM_factor(benchmark::State& st) {
  RunConfig c;
  c.gen = "ad2d:n=" + std::to_string(st.range(0)) + ",q=1";
  c.tol = 1e-2;
  Problem p = load_problem(c);
  Equilibrated eq = equilibrate_columns(p.A);
  ClusterTree tree = build_cluster_tree(Problem{p.spec, eq.A, p.grid}, c);
  for (auto _ : st) benchmark::DoNotOptimize(spaqr_factor(eq.A, tree, factor_options(c)));
  st.counters["N"] = p.A.rows();
}

void kernel_args(benchmark::internal::Benchmark* b) {
  const int maxt = omp_get_max_threads();
  for (int n : {64, 128, 256})
    for (int t = 1; t <= maxt; t *= 2) b->Args({n, t});
}

}  // namespace

BENCHMARK(BM_qr_house)->Apply(kernel_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_qr_house_ref)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_apply_panel)->Apply(kernel_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_apply_panel_ref)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_rrqr)->Apply(kernel_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_rrqr_ref)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_factor)->Arg(63)->Arg(127)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
