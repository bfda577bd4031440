#ifndef SEQ2SLATE_LOSSES_H_
#define SEQ2SLATE_LOSSES_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seq2slate/tensor.h"

namespace seq2slate {

enum class LossFamily { kXent, kHinge, kSmoothHinge };
enum class Policy { kSample, kGreedy };

struct WeightScheme {
  enum class Kind { kUniform, kDcg, kTopK } kind = Kind::kUniform;
  int k = 1;  // used by kTopK only

  static WeightScheme uniform() { return {Kind::kUniform, 1}; }
  static WeightScheme dcg() { return {Kind::kDcg, 1}; }
  static WeightScheme topk(int k) { return {Kind::kTopK, k}; }
};

struct LossConfig {
  LossFamily family = LossFamily::kXent;
  double gamma = 1.0;  // smooth-hinge temperature
  WeightScheme weights = WeightScheme::uniform();
  Policy policy = Policy::kSample;
  bool smooth_outer = false;  // also smooth the outer max{0, .} of the hinge
};

struct RewardConfig {
  enum class Metric { kNdcgAtK, kMap } metric = Metric::kNdcgAtK;
  int k = 10;
};

/// Cross-entropy step loss over the non-excluded items: labels are
/// renormalized over the remaining items and scored against the masked
/// softmax of `s`. Returns 0 when no non-excluded positive remains.
double per_step_xent(std::span<const double> s, std::span<const int> y,
                     std::span<const char> excluded);

/// Hinge step loss over the non-excluded items:
/// max{0, 1 - min(positive scores) + max(negative scores)}. When `gamma`
/// is set, the inner min/max are replaced by their smooth counterparts
/// (the outer max stays hard unless `smooth_outer`). Returns 0 when either
/// side is empty.
double per_step_hinge(std::span<const double> s, std::span<const int> y,
                      std::span<const char> excluded,
                      std::optional<double> gamma = std::nullopt,
                      bool smooth_outer = false);

/// Step loss for `config` plus its gradient w.r.t. the scores, written into
/// `ds` (same length as s, zero on excluded entries). Returns the loss.
double per_step_loss_grad(const LossConfig& config, std::span<const double> s,
                          std::span<const int> y, std::span<const char> excluded,
                          std::span<double> ds);

/// Per-position weights w_1..w_n: uniform -> 1; dcg -> 1/log2(j+1);
/// topk(k) -> 1 for j <= k else 0 (j is 1-based).
std::vector<double> position_weights(int n, const WeightScheme& scheme);

/// Sequence loss sum_j w_j * step_loss(s^j, y; excluded = items placed
/// before step j). `scores` is the {n, n} matrix from a decode of the same
/// instance and `perm` the emitted permutation (0-based).
double sequence_loss(const Tensor& scores, std::span<const int> y,
                     std::span<const int> perm, const LossConfig& config);

std::string to_string(LossFamily family);
std::string to_string(Policy policy);

}  // namespace seq2slate

#endif  // SEQ2SLATE_LOSSES_H_
