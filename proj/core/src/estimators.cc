#include "seq2slate/estimators.h"

#include <cmath>
#include <string>

#include "seq2slate/error.h"
#include "seq2slate/numerics.h"

namespace seq2slate {

namespace {

double step_loss(const LossConfig& config, std::span<const double> s,
                 std::span<const int> y, std::span<const char> excluded) {
  if (config.family == LossFamily::kXent) return per_step_xent(s, y, excluded);
  std::optional<double> gamma = config.family == LossFamily::kSmoothHinge
                                    ? std::optional<double>(config.gamma)
                                    : std::nullopt;
  return per_step_hinge(s, y, excluded, gamma,
                        config.family == LossFamily::kSmoothHinge && config.smooth_outer);
}

struct EnumerationContext {
  const PointerNetParams* params;
  const RankingInstance* instance;
  const LossConfig* config;
  const EncoderMemory* memory;
  const Tensor* xt;
  const std::vector<double>* weights;
  int n;
  double total = 0.0;
};

void enumerate_prefixes(EnumerationContext& ctx, const DecoderState& state,
                        std::vector<char>& mask, int depth, double prefix_p) {
  DecoderState local = state;
  StepOutput step = decode_step(*ctx.params, *ctx.memory, local, mask);
  const double wj = (*ctx.weights)[static_cast<size_t>(depth)];
  if (wj != 0.0) {
    ctx.total += prefix_p * wj *
                 step_loss(*ctx.config, step.scores, ctx.instance->labels, mask);
  }
  if (depth + 1 >= ctx.n) return;
  for (int i = 0; i < ctx.n; ++i) {
    if (mask[static_cast<size_t>(i)]) continue;
    const double p = step.probs[static_cast<size_t>(i)];
    DecoderState child = local;
    auto xrow = ctx.xt->row(i);
    child.next_input.assign(xrow.begin(), xrow.end());
    mask[static_cast<size_t>(i)] = 1;
    enumerate_prefixes(ctx, child, mask, depth + 1, prefix_p * p);
    mask[static_cast<size_t>(i)] = 0;
  }
}

}  // namespace

double expected_loss_enumerate(const PointerNetParams& params,
                               const RankingInstance& instance, const LossConfig& config,
                               int enumeration_cap, const ModelOptions& options) {
  const int n = instance.n();
  if (n > enumeration_cap) {
    throw DataError("expected_loss_enumerate: n = " + std::to_string(n) +
                    " exceeds the enumeration cap of " + std::to_string(enumeration_cap) +
                    "; estimate by Monte-Carlo over decode_sample draws instead");
  }
  if (static_cast<int>(instance.labels.size()) != n) {
    throw DataError("expected_loss_enumerate: labels missing");
  }
  EncoderMemory memory = encode(params, instance, options);
  Tensor xt = project_features(params, instance);
  std::vector<double> weights = position_weights(n, config.weights);
  EnumerationContext ctx{&params, &instance, &config, &memory, &xt, &weights, n};
  std::vector<char> mask(static_cast<size_t>(n), 0);
  DecoderState init = decoder_initial_state(params, memory);
  enumerate_prefixes(ctx, init, mask, 0, 1.0);
  return ctx.total;
}

BatchGradient supervised_gradient_batch(const PointerNetParams& params,
                                        std::span<const RankingInstance> batch,
                                        const LossConfig& config, double baseline,
                                        double dropout_p, Rng& rng,
                                        const ModelOptions& options) {
  if (batch.empty()) throw DataError("supervised_gradient_batch: empty batch");
  BatchGradient out{PointerNetParams::zeros_like(params), 0.0};
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const RankingInstance& inst : batch) {
    DropoutPlan plan;
    const DropoutPlan* plan_ptr = nullptr;
    if (dropout_p > 0.0) {
      plan = make_dropout_plan(inst.n(), params.m, dropout_p, rng);
      plan_ptr = &plan;
    }
    DecodeTrace trace = (config.policy == Policy::kSample)
                            ? decode_sample(params, inst, rng, options, plan_ptr)
                            : decode_greedy(params, inst, options, plan_ptr);
    const double loss = sequence_loss(trace.scores, inst.labels, trace.perm, config);
    const double logp_coeff =
        (config.policy == Policy::kSample) ? (loss - baseline) : 0.0;
    TeacherForcedEval eval = teacher_forced_grad(params, inst, trace.perm, &config,
                                                 logp_coeff, 1.0, options, plan_ptr);
    axpy_params(inv_b, eval.grad, out.grad);
    out.mean_objective += loss * inv_b;
  }
  return out;
}

BatchGradient reinforce_gradient_batch(const PointerNetParams& params,
                                       std::span<const RankingInstance> batch,
                                       const RewardConfig& reward, double baseline,
                                       Rng& rng, const ModelOptions& options) {
  if (batch.empty()) throw DataError("reinforce_gradient_batch: empty batch");
  BatchGradient out{PointerNetParams::zeros_like(params), 0.0};
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const RankingInstance& inst : batch) {
    DecodeTrace trace = decode_sample(params, inst, rng, options);
    const double r = reward_for(trace.perm, inst.labels, reward);
    // Negated score-function term: minimizing the result ascends E[R].
    TeacherForcedEval eval = teacher_forced_grad(params, inst, trace.perm, nullptr,
                                                 -(r - baseline), 0.0, options);
    axpy_params(inv_b, eval.grad, out.grad);
    out.mean_objective += r * inv_b;
  }
  return out;
}

}  // namespace seq2slate
