// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "chainsq/experiments.hpp"
#include "chainsq/kernels.hpp"

using namespace chainsq;

namespace {

const SparseOperator& chain_hamiltonian(int n) {
  static std::map<int, SparseOperator> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    const auto cfg = ChainConfig::make(n, 1.0, 0.05, kPi - 2.0 * kPi / n);
    const auto basis = build_basis(n);
    it = cache.emplace(n, build_h_se(cfg, basis) + build_h_flip(cfg, basis)).first;
  }
  return it->second;
}

kernels::CsrView view(const SparseOperator& h) { return {h.dim(), h.row_ptr(), h.col_idx(), h.values()}; }

void BM_MatvecSerial(benchmark::State& state) {
  const auto& h = chain_hamiltonian(static_cast<int>(state.range(0)));
  CVector x = CVector::Random(static_cast<Eigen::Index>(h.dim()));
  CVector y(x.size());
  for (auto _ : state) {
    kernels::csr_matvec_serial(view(h), {x.data(), h.dim()}, {y.data(), h.dim()});
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(h.nnz()));
}

void BM_MatvecOmp(benchmark::State& state) {
  const auto& h = chain_hamiltonian(static_cast<int>(state.range(0)));
  CVector x = CVector::Random(static_cast<Eigen::Index>(h.dim()));
  CVector y(x.size());
  for (auto _ : state) {
    kernels::csr_matvec_omp(view(h), {x.data(), h.dim()}, {y.data(), h.dim()});
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(h.nnz()));
}

void BM_DotSerial(benchmark::State& state) {
  CVector x = CVector::Random(state.range(0));
  CVector y = CVector::Random(state.range(0));
  const std::size_t n = static_cast<std::size_t>(x.size());
  for (auto _ : state) benchmark::DoNotOptimize(kernels::dot_serial({x.data(), n}, {y.data(), n}));
}

void BM_DotOmp(benchmark::State& state) {
  CVector x = CVector::Random(state.range(0));
  CVector y = CVector::Random(state.range(0));
  const std::size_t n = static_cast<std::size_t>(x.size());
  for (auto _ : state) benchmark::DoNotOptimize(kernels::dot_omp({x.data(), n}, {y.data(), n}));
}

// Effective-model best-squeezing scan, one thread versus all threads.
void BM_ScanBestSqueezing(benchmark::State& state) {
  const int threads = state.range(0) == 0 ? kernels::max_threads() : 1;
  const int saved = kernels::max_threads();
  kernels::set_threads(threads);
  const auto base = ChainConfig::make(40, 1.0, std::abs(std::cos(kPi / 40) - 1.0) / 10.0, kPi);
  const auto phis = linspace_open(2.0, 2.6, 8);
  for (auto _ : state) benchmark::DoNotOptimize(scan_best_squeezing(base, phis, {0.0, 0.0}, Model::Effective));
  kernels::set_threads(saved);
  state.SetLabel(state.range(0) == 0 ? "omp" : "serial");
}

}  // namespace

BENCHMARK(BM_MatvecSerial)->Arg(12)->Arg(14)->Arg(16);
BENCHMARK(BM_MatvecOmp)->Arg(12)->Arg(14)->Arg(16);
BENCHMARK(BM_DotSerial)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_DotOmp)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_ScanBestSqueezing)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
