#include <benchmark/benchmark.h>

#include <vector>

#include "seq2slate/estimators.h"
#include "seq2slate/model.h"
#include "seq2slate/optim.h"

namespace {

using namespace seq2slate;

RankingInstance bench_instance(int n, int m, Rng& rng) {
  RankingInstance inst;
  inst.features = Tensor({n, m});
  for (int64_t i = 0; i < inst.features.size(); ++i) inst.features[i] = rng.uniform(-1, 1);
  inst.labels.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) inst.labels[static_cast<size_t>(i)] = (i % 3 == 0);
  return inst;
}

void BM_DecodeGreedy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int rho = static_cast<int>(state.range(1));
  Rng rng(1);
  PointerNetParams params = init_params(16, 16, rho, rng);
  RankingInstance inst = bench_instance(n, 16, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_greedy(params, inst));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_DecodeGreedy)->Args({10, 32})->Args({10, 128})->Args({40, 128});

void BM_DecodeOneStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int rho = static_cast<int>(state.range(1));
  Rng rng(2);
  PointerNetParams params = init_params(16, 16, rho, rng);
  RankingInstance inst = bench_instance(n, 16, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_onestep(params, inst));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_DecodeOneStep)->Args({10, 32})->Args({10, 128})->Args({40, 128});

void BM_SequenceLossGrad(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int rho = static_cast<int>(state.range(1));
  Rng rng(3);
  PointerNetParams params = init_params(16, 16, rho, rng);
  RankingInstance inst = bench_instance(n, 16, rng);
  std::vector<int> perm = decode_greedy(params, inst).perm;
  const LossConfig cfg{LossFamily::kXent, 1.0, WeightScheme::dcg(), Policy::kSample, false};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sequence_loss_and_grad(params, inst, perm, cfg));
  }
}
BENCHMARK(BM_SequenceLossGrad)->Args({10, 32})->Args({10, 128});

void BM_SupervisedBatchStep(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  Rng rng(4);
  PointerNetParams params = init_params(16, 16, 32, rng);
  std::vector<RankingInstance> instances;
  for (int i = 0; i < batch; ++i) instances.push_back(bench_instance(10, 16, rng));
  const LossConfig cfg{LossFamily::kXent, 1.0, WeightScheme::dcg(), Policy::kSample, false};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        supervised_gradient_batch(params, instances, cfg, 0.0, 0.1, rng));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_SupervisedBatchStep)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
