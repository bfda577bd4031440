#ifndef SEQ2SLATE_METRICS_H_
#define SEQ2SLATE_METRICS_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seq2slate/instance.h"
#include "seq2slate/losses.h"
#include "seq2slate/model.h"

namespace seq2slate {

/// Average precision of `perm` against binary labels `y` (labels indexed by
/// item, perm gives the ranked item order). Returns nullopt when the query
/// has no positive labels; such queries are excluded from dataset means.
std::optional<double> map_score(std::span<const int> perm, std::span<const int> y);

/// Binary-gain NDCG at cutoff k, normalized by the ideal ordering.
/// Returns nullopt for zero-positive queries.
std::optional<double> ndcg_at_k(std::span<const int> perm, std::span<const int> y, int k);

/// Summed upward movement of positive items relative to the base order:
/// sum over positives of (base position - new position), 1-based positions.
/// Positive values mean positives moved toward the top.
double rank_gain(std::span<const int> perm, std::span<const int> y);

/// Reward used by policy-gradient training: the configured metric, or 0 for
/// zero-positive queries (constant across permutations, so it cannot bias
/// the estimator).
double reward_for(std::span<const int> perm, std::span<const int> y,
                  const RewardConfig& config);

struct MetricsReport {
  double map = 0.0;
  std::map<int, double> ndcg;  // k -> mean NDCG@k
  double rank_gain = 0.0;
  int num_queries = 0;
  double zero_click_fraction = 0.0;

  std::string to_tsv() const;
};

enum class EvalDecoder { kSequential, kOneStep, kNoop };

/// Greedy (or one-step / no-op) decode of every instance followed by
/// per-query metrics. MAP and NDCG average over queries with at least one
/// positive label; rank_gain averages over all queries; the zero-positive
/// fraction is reported separately.
MetricsReport evaluate(const PointerNetParams& params,
                       std::span<const RankingInstance> dataset, std::span<const int> ks,
                       EvalDecoder decoder = EvalDecoder::kSequential,
                       const ModelOptions& options = {});

}  // namespace seq2slate

#endif  // SEQ2SLATE_METRICS_H_
