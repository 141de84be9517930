#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "tenconv/contract.hpp"

using namespace tenconv;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(-1, 1);
  for (Real& v : t.data()) v = static_cast<Real>(d(rng));
  return t;
}

// A batch of [6,6,6,6] cells against a [6,6,6,6] neuron tensor, r = 1..4.
void BM_ContractCells(benchmark::State& state) {
  const std::size_t r = static_cast<std::size_t>(state.range(0));
  const std::size_t batch = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  const Tensor u = random_tensor(Shape{batch, 6, 6, 6, 6}, rng);
  const Tensor w = random_tensor(Shape{6, 6, 6, 6}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(contract(u, w, r));
  const double out = static_cast<double>(batch) * std::pow(6.0, 4 - r) * std::pow(6.0, 4 - r);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out * std::pow(6.0, r)));
}
BENCHMARK(BM_ContractCells)->ArgsProduct({{1, 2, 3, 4}, {1, 225}});

void BM_ContractScalarMatrix(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const Tensor u = random_tensor(Shape{n, n}, rng);
  const Tensor w = random_tensor(Shape{n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(contract(u, w, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_ContractScalarMatrix)->Arg(64)->Arg(256);

void BM_LinearCombine(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<Tensor> parts;
  for (int i = 0; i < 9; ++i) parts.push_back(random_tensor(Shape{6, 6, 6, 6}, rng));
  for (auto _ : state) benchmark::DoNotOptimize(linear_combine(parts));
}
BENCHMARK(BM_LinearCombine);

}  // namespace

BENCHMARK_MAIN();
