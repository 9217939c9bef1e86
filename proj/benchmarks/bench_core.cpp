#include <benchmark/benchmark.h>

#include "agcrn/autodiff.hpp"
#include "agcrn/graph.hpp"
#include "agcrn/model.hpp"
#include "agcrn/ops.hpp"
#include "agcrn/rng.hpp"

using namespace agcrn;

namespace {

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 2.0 * rng.uniform() - 1.0;
  return t;
}

void BM_matmul(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  Rng rng(1);
  Tensor a = random_tensor({n, n}, rng), b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    Tensor c = ops::matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(n * n * n));
}

void BM_dagg(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  Rng rng(1);
  Tensor emb = random_tensor({n, 10}, rng);
  for (auto _ : state) {
    AdaptiveGraph g = dagg_matrix(emb);
    benchmark::DoNotOptimize(g.a_tilde.data());
  }
}

ForecastModel bench_model(std::size_t nodes, std::size_t hidden) {
  ModelConfig cfg;
  cfg.nodes = nodes;
  cfg.hidden = hidden;
  cfg.embed_dim = 8;
  cfg.horizon = 12;
  cfg.lookback = 12;
  return ForecastModel::build(cfg);
}

void BM_forward(benchmark::State& state) {
  ForecastModel model = bench_model(std::size_t(state.range(0)), std::size_t(state.range(1)));
  Rng rng(2);
  Tensor window = random_tensor({12, model.config().nodes, 1}, rng);
  for (auto _ : state) {
    Tensor out = model.predict(window);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_forward_backward(benchmark::State& state) {
  ForecastModel model = bench_model(std::size_t(state.range(0)), std::size_t(state.range(1)));
  Rng rng(2);
  Tensor window = random_tensor({12, model.config().nodes, 1}, rng);
  Tensor target = random_tensor({12, model.config().nodes}, rng);
  for (auto _ : state) {
    model.zero_grads();
    ad::Value loss = ad::l1_mean(model.forward(model.make_plan(true), window), target);
    ad::backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
}

}  // namespace

BENCHMARK(BM_matmul)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_dagg)->Arg(64)->Arg(307);
BENCHMARK(BM_forward)->Args({16, 16})->Args({64, 32});
BENCHMARK(BM_forward_backward)->Args({16, 16})->Args({64, 32});

BENCHMARK_MAIN();
