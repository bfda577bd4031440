#ifndef SEQ2SLATE_OPTIM_H_
#define SEQ2SLATE_OPTIM_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seq2slate/estimators.h"
#include "seq2slate/model.h"
#include "seq2slate/rng.h"

namespace seq2slate {

struct TrainConfig {
  int batch_size = 128;
  double lr0 = 3e-4;
  int decay_every = 1000;
  double decay_factor = 0.96;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double l2_lambda = 3e-4;
  double dropout_p = 0.1;
  double baseline_decay = 0.99;
  int max_steps = 1000;
  int eval_every = 500;
  uint64_t seed = 0;

  enum class Objective { kSupervised, kReinforce } objective = Objective::kSupervised;
  LossConfig loss;      // supervised objective
  RewardConfig reward;  // reinforce objective
  ModelOptions model_options;

  // Model dimensions used by init.
  int m_raw = 0;
  int m = 0;      // 0 means "same as m_raw" (projection disabled)
  int rho = 128;

  void validate() const;
};

/// Exponential-moving-average baseline. The first update adopts the
/// observed value; afterwards value <- decay*value + (1-decay)*observed.
class EmaBaseline {
 public:
  explicit EmaBaseline(double decay = 0.99) : decay_(decay) {}

  void update(double observed);
  double value_or(double fallback) const { return initialized_ ? value_ : fallback; }
  bool initialized() const { return initialized_; }
  double decay() const { return decay_; }

 private:
  double decay_;
  double value_ = 0.0;
  bool initialized_ = false;
};

/// Adam moment accumulators, one pair per parameter tensor in the fixed
/// parameter order.
struct AdamState {
  std::vector<Tensor> m1, m2;
  int64_t t = 0;

  static AdamState for_params(const PointerNetParams& params);
};

/// Every parameter entry i.i.d. uniform on [-0.1, 0.1], drawn in the fixed
/// tensor order. Same seed, same parameters, bit for bit.
PointerNetParams init_params(int m_raw, int m, int rho, Rng& rng);

/// Staircase schedule: lr0 * decay_factor^floor(step / decay_every).
double lr_at(int64_t step, const TrainConfig& config);

/// Standard bias-corrected Adam update, applied tensor by tensor in the
/// fixed parameter order. Throws NumericError naming the offending tensor
/// if a gradient is non-finite.
void adam_step(PointerNetParams& params, const PointerNetParams& grads, AdamState& state,
               double lr, const TrainConfig& config);

/// grads += 2*lambda*params (penalty lambda*||theta||^2).
void apply_l2(PointerNetParams& grads, const PointerNetParams& params, double lambda);

struct TrainLogRow {
  int64_t step = 0;
  double objective = 0.0;  // batch mean loss or reward
  double lr = 0.0;
  double baseline = 0.0;
  int64_t wallclock_ms = 0;
};

struct TrainResult {
  PointerNetParams params;
  std::vector<TrainLogRow> log;
};

/// Output hooks: when set, the step log streams to `log_path` as TSV
/// (header `step objective_value lr baseline wallclock_ms`) and a
/// checkpoint is written to `checkpoint_path` every eval_every steps and at
/// the end of training.
struct TrainSinks {
  std::optional<std::string> log_path;
  std::optional<std::string> checkpoint_path;
};

/// Mini-batch training: per epoch the instance order is reshuffled
/// (seeded), batches of `batch_size` form in order, the objective gradient
/// is computed (dropout and L2 apply to the supervised objective only), the
/// EMA baseline absorbs the batch mean, and Adam updates the parameters
/// with the scheduled learning rate. Deterministic given (seed, data,
/// config). Non-finite losses abort with diagnostics.
TrainResult train(std::span<const RankingInstance> train_set,
                  std::span<const RankingInstance> valid_set, const TrainConfig& config,
                  const TrainSinks& sinks = {});

}  // namespace seq2slate

#endif  // SEQ2SLATE_OPTIM_H_
