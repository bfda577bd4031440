#ifndef SEQ2SLATE_INSTANCE_H_
#define SEQ2SLATE_INSTANCE_H_

#include <string>
#include <vector>

#include "seq2slate/tensor.h"

namespace seq2slate {

/// One query's candidate items, ordered by the base ranker (best first).
/// `labels` are binary click labels; `grades` are optional integer relevance
/// grades (empty when the source data carries none).
struct RankingInstance {
  Tensor features;           // {n, feature_dim}, row i = item i
  std::vector<int> labels;   // n entries in {0, 1}
  std::vector<int> grades;   // n entries >= 0, or empty
  std::string query_id;

  int n() const { return features.empty() ? 0 : static_cast<int>(features.dim(0)); }
  int feature_dim() const { return features.empty() ? 0 : static_cast<int>(features.dim(1)); }
  int num_positive() const {
    int c = 0;
    for (int y : labels) c += (y != 0);
    return c;
  }
};

}  // namespace seq2slate

#endif  // SEQ2SLATE_INSTANCE_H_
