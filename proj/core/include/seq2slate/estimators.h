#ifndef SEQ2SLATE_ESTIMATORS_H_
#define SEQ2SLATE_ESTIMATORS_H_

#include <span>

#include "seq2slate/losses.h"
#include "seq2slate/metrics.h"
#include "seq2slate/model.h"
#include "seq2slate/rng.h"

namespace seq2slate {

/// Exact expected sequence loss E_pi[L_pi] by prefix enumeration: walks the
/// decode tree once, accumulating p(prefix) * w_j * step_loss(prefix) at
/// every node, so shared prefixes are scored once instead of once per full
/// permutation. Throws for n > enumeration_cap (suggesting Monte-Carlo
/// estimation via decode_sample instead).
double expected_loss_enumerate(const PointerNetParams& params,
                               const RankingInstance& instance, const LossConfig& config,
                               int enumeration_cap = 7, const ModelOptions& options = {});

struct BatchGradient {
  PointerNetParams grad;
  double mean_objective = 0.0;  // batch mean loss (supervised) or reward (reinforce)
};

/// Mini-batch gradient of the expected sequence loss. With the sampling
/// policy each instance contributes
///   (L_pi - baseline) * dlogp(pi)/dtheta + dL_pi/dtheta
/// for pi ~ p_theta; with the greedy policy the score-function term is
/// dropped and the contribution is dL_{pi*}/dtheta alone. `dropout_p` > 0
/// draws fresh input-dropout masks per instance (training only).
BatchGradient supervised_gradient_batch(const PointerNetParams& params,
                                        std::span<const RankingInstance> batch,
                                        const LossConfig& config, double baseline,
                                        double dropout_p, Rng& rng,
                                        const ModelOptions& options = {});

/// Mini-batch REINFORCE gradient: mean of (R - baseline) * dlogp(pi)/dtheta
/// over sampled permutations, negated so the caller can minimize uniformly.
BatchGradient reinforce_gradient_batch(const PointerNetParams& params,
                                       std::span<const RankingInstance> batch,
                                       const RewardConfig& reward, double baseline,
                                       Rng& rng, const ModelOptions& options = {});

}  // namespace seq2slate

#endif  // SEQ2SLATE_ESTIMATORS_H_
