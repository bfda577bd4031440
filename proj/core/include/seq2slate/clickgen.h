#ifndef SEQ2SLATE_CLICKGEN_H_
#define SEQ2SLATE_CLICKGEN_H_

#include <set>
#include <span>
#include <vector>

#include "seq2slate/instance.h"
#include "seq2slate/rng.h"

namespace seq2slate {

/// Cascade click-simulator settings. A scanning user observes the item at
/// base rank i with probability 1/i^eta (rank 1 always observed), clicks
/// observed relevant items, and in the diverse/similar modes modulates
/// clicks by feature-space similarity to previously clicked items.
struct CascadeConfig {
  enum class Mode { kNone, kDiverse, kSimilar } mode = Mode::kDiverse;
  double eta = 0.0;                          // observation decay exponent, >= 0
  std::set<int> relevant_grades = {2, 3, 4};
  double q = 0.5;                            // similarity quantile in (0, 1]
};

/// q-quantile (linear interpolation between order statistics) of the
/// n(n-1)/2 pairwise Euclidean distances between item feature vectors.
/// Requires n >= 2.
double similarity_threshold(const Tensor& features, double q);

/// Simulates one scan over an instance ordered by base rank (row 0 = top).
/// Relevance grades are required. Returns the binary click vector.
///
/// Exactly one uniform draw is consumed per item (the observation draw), so
/// runs with the same seed are coupled across modes and eta values.
std::vector<int> simulate_clicks(const RankingInstance& instance,
                                 const CascadeConfig& config, Rng& rng);

struct ClickStats {
  int num_queries = 0;
  int num_items = 0;
  int num_clicks = 0;
  int zero_click_queries = 0;

  double click_rate() const {
    return num_items > 0 ? static_cast<double>(num_clicks) / num_items : 0.0;
  }
  double zero_click_fraction() const {
    return num_queries > 0 ? static_cast<double>(zero_click_queries) / num_queries : 0.0;
  }
};

/// Runs simulate_clicks over base-ordered instances, writing the labels in
/// place. Queries with zero clicks are retained (their fraction is what the
/// stats track). Deterministic given the rng seed.
ClickStats generate_clicks(std::span<RankingInstance> instances,
                           const CascadeConfig& config, Rng& rng);

}  // namespace seq2slate

#endif  // SEQ2SLATE_CLICKGEN_H_
