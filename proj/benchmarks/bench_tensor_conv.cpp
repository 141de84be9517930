#include <benchmark/benchmark.h>

#include <random>

#include "tenconv/conv.hpp"
#include "tenconv/data.hpp"
#include "tenconv/optimizer.hpp"
#include "tenconv/training.hpp"

using namespace tenconv;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(-1, 1);
  for (Real& v : t.data()) v = static_cast<Real>(d(rng));
  return t;
}

// Cell-preserving 3x3 layer of a tcnn0 block at 15x15 or 7x7.
TensorConvGeometry preserving(std::size_t extent) {
  TensorConvGeometry g;
  g.height = g.width = extent;
  g.kernel = 3;
  g.stride = 1;
  g.pad = 1;
  g.contract = 2;
  g.in_cell = Shape{6, 6, 6, 6};
  g.weight_cell = Shape{6, 6, 6, 6};
  return g;
}

void BM_TensorConvForward(benchmark::State& state) {
  const TensorConvGeometry g = preserving(static_cast<std::size_t>(state.range(0)));
  const std::size_t batch = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  const Tensor x = random_tensor(g.input_shape(batch), rng);
  const Tensor w = random_tensor(g.weight_shape(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(tensor_conv_forward(x, w, g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_TensorConvForward)->Args({7, 8})->Args({15, 8})->Unit(benchmark::kMillisecond);

void BM_TensorConvBackward(benchmark::State& state) {
  const TensorConvGeometry g = preserving(static_cast<std::size_t>(state.range(0)));
  const std::size_t batch = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(2);
  const Tensor x = random_tensor(g.input_shape(batch), rng);
  const Tensor w = random_tensor(g.weight_shape(), rng);
  const Tensor up = random_tensor(g.output_shape(batch), rng);
  Tensor gx(x.shape()), gw(w.shape());
  for (auto _ : state) tensor_conv_backward(x, w, up, &gx, &gw, g);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_TensorConvBackward)->Args({7, 8})->Args({15, 8})->Unit(benchmark::kMillisecond);

// One Adam step of a builtin MNIST model on a batch of 64.
void BM_TrainStep(benchmark::State& state, const char* name) {
  Model model(builtin_spec(name), 1);
  SyntheticConfig s;
  s.classes = 10;
  s.per_class = 7;
  s.height = s.width = 28;
  const LabeledImageSet set = head(make_synthetic(s), 64);
  Adam adam;
  for (auto _ : state) benchmark::DoNotOptimize(train_step(model, adam, set.images, set.labels));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK_CAPTURE(BM_TrainStep, tcnn_small, "mnist-tcnn-small")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, tcnn_47k, "mnist-tcnn-47k")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, cnn_small, "mnist-cnn-small")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainStep, cnn_1_2m, "mnist-cnn-1.2m")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
