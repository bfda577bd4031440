#include "seq2slate/optim.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "seq2slate/checkpoint.h"
#include "seq2slate/error.h"
#include "seq2slate/metrics.h"
#include "seq2slate/numerics.h"

namespace seq2slate {

void TrainConfig::validate() const {
  if (batch_size < 1) throw DataError("train config: batch_size must be >= 1");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw DataError("train config: decay_factor must be in (0, 1]");
  }
  if (decay_every < 1) throw DataError("train config: decay_every must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw DataError("train config: dropout must be in [0, 1)");
  }
  if (l2_lambda < 0.0) throw DataError("train config: l2 lambda must be >= 0");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) {
    throw DataError("train config: baseline_decay must be in [0, 1)");
  }
  if (max_steps < 0) throw DataError("train config: max_steps must be >= 0");
  if (eval_every < 1) throw DataError("train config: eval_every must be >= 1");
  if (m_raw < 1) throw DataError("train config: m_raw must be set");
  if (rho < 1) throw DataError("train config: rho must be >= 1");
}

void EmaBaseline::update(double observed) {
  if (!std::isfinite(observed)) throw NumericError("ema baseline: non-finite observation");
  if (!initialized_) {
    value_ = observed;
    initialized_ = true;
    return;
  }
  value_ = decay_ * value_ + (1.0 - decay_) * observed;
}

AdamState AdamState::for_params(const PointerNetParams& params) {
  AdamState state;
  params.for_each_tensor([&](const char*, const Tensor& t) {
    state.m1.push_back(Tensor::zeros_like(t));
    state.m2.push_back(Tensor::zeros_like(t));
  });
  return state;
}

PointerNetParams init_params(int m_raw, int m, int rho, Rng& rng) {
  PointerNetParams params = PointerNetParams::make(m_raw, m, rho);
  params.for_each_tensor([&](const char*, Tensor& t) {
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.1, 0.1);
  });
  return params;
}

double lr_at(int64_t step, const TrainConfig& config) {
  if (step < 0) throw DataError("lr_at: step must be >= 0");
  const int64_t drops = step / config.decay_every;
  return config.lr0 * std::pow(config.decay_factor, static_cast<double>(drops));
}

void adam_step(PointerNetParams& params, const PointerNetParams& grads, AdamState& state,
               double lr, const TrainConfig& config) {
  std::vector<std::pair<const char*, Tensor*>> named;
  params.for_each_tensor([&](const char* name, Tensor& t) { named.emplace_back(name, &t); });
  const auto gs = tensor_list(grads);
  if (gs.size() != named.size() || state.m1.size() != named.size()) {
    throw DataError("adam_step: structure mismatch");
  }
  for (size_t i = 0; i < named.size(); ++i) {
    if (!gs[i]->all_finite()) {
      throw NumericError(std::string("adam_step: non-finite gradient in tensor ") +
                         named[i].first);
    }
  }
  state.t += 1;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (size_t i = 0; i < named.size(); ++i) {
    Tensor& theta = *named[i].second;
    const Tensor& g = *gs[i];
    Tensor& m1 = state.m1[i];
    Tensor& m2 = state.m2[i];
    for (int64_t k = 0; k < theta.size(); ++k) {
      m1[k] = b1 * m1[k] + (1.0 - b1) * g[k];
      m2[k] = b2 * m2[k] + (1.0 - b2) * g[k] * g[k];
      const double mhat = m1[k] / corr1;
      const double vhat = m2[k] / corr2;
      theta[k] -= lr * mhat / (std::sqrt(vhat) + config.adam_eps);
    }
  }
}

void apply_l2(PointerNetParams& grads, const PointerNetParams& params, double lambda) {
  if (lambda < 0.0) throw DataError("apply_l2: lambda must be >= 0");
  if (lambda == 0.0) return;
  axpy_params(2.0 * lambda, params, grads);
}

namespace {

void write_log_header(FILE* f) {
  std::fprintf(f, "step\tobjective_value\tlr\tbaseline\twallclock_ms\n");
}

void write_log_row(FILE* f, const TrainLogRow& row) {
  std::fprintf(f, "%lld\t%.17g\t%.17g\t%.17g\t%lld\n", static_cast<long long>(row.step),
               row.objective, row.lr, row.baseline, static_cast<long long>(row.wallclock_ms));
}

}  // namespace

TrainResult train(std::span<const RankingInstance> train_set,
                  std::span<const RankingInstance> valid_set, const TrainConfig& config,
                  const TrainSinks& sinks) {
  config.validate();
  if (train_set.empty()) throw DataError("train: empty dataset");
  const int m = config.m > 0 ? config.m : config.m_raw;

  Rng rng(config.seed);
  TrainResult result;
  result.params = init_params(config.m_raw, m, config.rho, rng);
  AdamState adam = AdamState::for_params(result.params);
  EmaBaseline baseline(config.baseline_decay);
  const bool reinforce = config.objective == TrainConfig::Objective::kReinforce;
  // Policy-gradient runs are trained unregularized: no dropout, no L2.
  const double dropout_p = reinforce ? 0.0 : config.dropout_p;
  const double lambda = reinforce ? 0.0 : config.l2_lambda;

  FILE* log_file = nullptr;
  if (sinks.log_path) {
    log_file = std::fopen(sinks.log_path->c_str(), "wb");
    if (log_file == nullptr) throw DataError("train: cannot open log: " + *sinks.log_path);
    write_log_header(log_file);
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<RankingInstance> batch;
  int64_t step = 0;
  size_t cursor = order.size();  // forces a shuffle on first use

  while (step < config.max_steps) {
    if (cursor >= order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    batch.clear();
    while (static_cast<int>(batch.size()) < config.batch_size && cursor < order.size()) {
      batch.push_back(train_set[static_cast<size_t>(order[cursor++])]);
    }

    const double lr = lr_at(step, config);
    BatchGradient bg;
    if (reinforce) {
      bg = reinforce_gradient_batch(result.params, batch, config.reward,
                                    baseline.value_or(0.0), rng, config.model_options);
    } else {
      bg = supervised_gradient_batch(result.params, batch, config.loss,
                                     baseline.value_or(0.0), dropout_p, rng,
                                     config.model_options);
    }
    if (!std::isfinite(bg.mean_objective)) {
      throw NumericError("train: non-finite objective at step " + std::to_string(step) +
                         " (lr " + std::to_string(lr) + ")");
    }
    baseline.update(bg.mean_objective);
    apply_l2(bg.grad, result.params, lambda);
    adam_step(result.params, bg.grad, adam, lr, config);
    step += 1;

    const auto now = std::chrono::steady_clock::now();
    TrainLogRow row{step, bg.mean_objective, lr, baseline.value_or(0.0),
                    std::chrono::duration_cast<std::chrono::milliseconds>(now - t0).count()};
    result.log.push_back(row);
    if (log_file != nullptr) write_log_row(log_file, row);

    if (step % config.eval_every == 0 || step == config.max_steps) {
      if (!valid_set.empty()) {
        const int ks[] = {5, 10};
        MetricsReport report = evaluate(result.params, valid_set, ks,
                                        EvalDecoder::kSequential, config.model_options);
        std::fprintf(stderr, "step %lld: valid map %.4f ndcg@10 %.4f rank_gain %.3f\n",
                     static_cast<long long>(step), report.map, report.ndcg.at(10),
                     report.rank_gain);
      }
      if (sinks.checkpoint_path) save_checkpoint(result.params, *sinks.checkpoint_path);
    }
  }

  if (log_file != nullptr && std::fclose(log_file) != 0) {
    throw DataError("train: log write failed");
  }
  if (config.max_steps == 0 && sinks.checkpoint_path) {
    save_checkpoint(result.params, *sinks.checkpoint_path);
  }
  return result;
}

}  // namespace seq2slate
