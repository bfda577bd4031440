#ifndef SEQ2SLATE_DATA_H_
#define SEQ2SLATE_DATA_H_

#include <span>
#include <string>
#include <vector>

#include "seq2slate/instance.h"
#include "seq2slate/rng.h"

namespace seq2slate {

/// One query's items as read from a LETOR file: feature vectors plus
/// integer relevance grades, in file order.
struct RawQuery {
  std::string query_id;
  Tensor features;          // {n, feature_dim}
  std::vector<int> grades;  // n entries

  int n() const { return features.empty() ? 0 : static_cast<int>(features.dim(0)); }
};

/// Parses LETOR text: lines of `<grade> qid:<id> <fid>:<val> ... [# comment]`
/// with 1-based, possibly sparse feature ids. Lines with the same qid are
/// grouped (keeping file order within the query); missing feature ids read
/// as 0 and every query is padded to the dataset-wide max feature id.
/// Gzip-compressed files are detected by their magic bytes. Malformed lines
/// raise DataError with the line number.
std::vector<RawQuery> parse_letor(const std::string& path);
std::vector<RawQuery> parse_letor_text(const std::string& text);

/// Writes queries in the same format (dense features, full precision).
/// Binary click datasets reuse the grade slot for the 0/1 label.
void write_letor(std::span<const RawQuery> queries, const std::string& path);

RawQuery to_raw_query(const RankingInstance& inst);

/// Items sorted by base score descending (stable: ties keep file order).
/// Grades travel with their items; labels start out zero (a click simulator
/// or a loaded label fills them).
RankingInstance order_by_base(const RawQuery& query, std::span<const double> base_scores);

/// Interprets already-parsed queries as a click dataset: grades must be
/// binary and become the labels, order is taken as the base order.
std::vector<RankingInstance> as_click_dataset(std::span<const RawQuery> queries);

/// `copies` independently shuffled copies of the instance (features, labels
/// and grades move together).
std::vector<RankingInstance> shuffle_augment(const RankingInstance& instance, int copies,
                                             Rng& rng);

/// Synthetic ranking queries with planted feature-space structure. Items
/// are drawn around per-query cluster centers (center ~ N(0, I), item =
/// center + sigma * N(0, I)), so same-cluster items are close and the
/// distance-based click rules bind. Relevance grades come from the item's
/// rank along a per-query utility direction u_q = normalize(g + 0.3 z_q),
/// where g is one global direction per dataset and z_q is query noise; the
/// shared component g is what makes a single pointwise ranker learnable
/// across queries. `grade_noise` adds i.i.d. N(0, grade_noise^2) jitter to
/// the utilities before ranking, partially decorrelating grades from the
/// cluster structure so that relevant items spread across clusters and the
/// similarity-driven click rules cut across the relevance ordering.
/// Grade bands by rank fraction: top 10% grade 4, next 15% grade 3, next
/// 25% grade 2, next 25% grade 1, rest grade 0.
struct SynthConfig {
  int num_queries = 100;
  int items_per_query = 10;
  int feature_dim = 16;
  int num_clusters = 3;
  double noise_sigma = 0.2;
  double grade_noise = 0.7;
};
std::vector<RawQuery> synth_queries(const SynthConfig& config, Rng& rng);

/// Least-squares pointwise ranker (grade ~ features, with intercept),
/// the built-in stand-in for an external base ranker.
struct LinearRanker {
  std::vector<double> weights;  // feature_dim entries
  double bias = 0.0;

  double score(std::span<const double> features) const;
};
LinearRanker fit_linear_ranker(std::span<const RawQuery> queries);
std::vector<double> score_query(const LinearRanker& ranker, const RawQuery& query);

/// Per-dimension standardization statistics, computed on a training split
/// and applied to every split.
struct FeatureStats {
  std::vector<double> mean, stddev;  // stddev floored at 1e-6
};
FeatureStats compute_feature_stats(std::span<const RankingInstance> train);
void apply_feature_stats(std::span<RankingInstance> instances, const FeatureStats& stats);

/// Deterministic 80/10/10 split by seeded hash of the query id.
struct SplitIndices {
  std::vector<int> train, valid, test;
};
SplitIndices split_by_query_hash(std::span<const RankingInstance> instances, uint64_t seed);

}  // namespace seq2slate

#endif  // SEQ2SLATE_DATA_H_
