#include "seq2slate/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "seq2slate/error.h"

namespace seq2slate {

namespace {

int count_positives(std::span<const int> y) {
  int c = 0;
  for (int v : y) c += (v != 0);
  return c;
}

void check_perm_labels(std::span<const int> perm, std::span<const int> y) {
  if (perm.size() != y.size()) throw DataError("metrics: perm/label length mismatch");
}

}  // namespace

std::optional<double> map_score(std::span<const int> perm, std::span<const int> y) {
  check_perm_labels(perm, y);
  const int total_pos = count_positives(y);
  if (total_pos == 0) return std::nullopt;
  double sum = 0.0;
  int hits = 0;
  for (size_t j = 0; j < perm.size(); ++j) {
    if (y[static_cast<size_t>(perm[j])] != 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(j + 1);
    }
  }
  return sum / static_cast<double>(total_pos);
}

std::optional<double> ndcg_at_k(std::span<const int> perm, std::span<const int> y, int k) {
  check_perm_labels(perm, y);
  if (k < 1) throw DataError("ndcg_at_k: k must be >= 1");
  const int total_pos = count_positives(y);
  if (total_pos == 0) return std::nullopt;
  const int n = static_cast<int>(perm.size());
  const int cutoff = std::min(k, n);
  double dcg = 0.0;
  for (int j = 0; j < cutoff; ++j) {
    if (y[static_cast<size_t>(perm[static_cast<size_t>(j)])] != 0) {
      dcg += 1.0 / std::log2(static_cast<double>(j) + 2.0);
    }
  }
  double ideal = 0.0;
  for (int j = 0; j < std::min(cutoff, total_pos); ++j) {
    ideal += 1.0 / std::log2(static_cast<double>(j) + 2.0);
  }
  return dcg / ideal;
}

double rank_gain(std::span<const int> perm, std::span<const int> y) {
  check_perm_labels(perm, y);
  double gain = 0.0;
  for (size_t j = 0; j < perm.size(); ++j) {
    const int item = perm[j];
    if (y[static_cast<size_t>(item)] != 0) {
      // base position is item+1, new position is j+1
      gain += static_cast<double>(item) - static_cast<double>(j);
    }
  }
  return gain;
}

double reward_for(std::span<const int> perm, std::span<const int> y,
                  const RewardConfig& config) {
  std::optional<double> r;
  switch (config.metric) {
    case RewardConfig::Metric::kNdcgAtK:
      r = ndcg_at_k(perm, y, config.k);
      break;
    case RewardConfig::Metric::kMap:
      r = map_score(perm, y);
      break;
  }
  return r.value_or(0.0);
}

std::string MetricsReport::to_tsv() const {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "map\t-\t" << map << "\n";
  for (const auto& [k, v] : ndcg) out << "ndcg\t" << k << "\t" << v << "\n";
  out << "rank_gain\t-\t" << rank_gain << "\n";
  out << "num_queries\t-\t" << num_queries << "\n";
  out << "zero_click_fraction\t-\t" << zero_click_fraction << "\n";
  return out.str();
}

MetricsReport evaluate(const PointerNetParams& params,
                       std::span<const RankingInstance> dataset, std::span<const int> ks,
                       EvalDecoder decoder, const ModelOptions& options) {
  MetricsReport report;
  report.num_queries = static_cast<int>(dataset.size());
  int scored = 0;
  int zero_click = 0;
  double map_sum = 0.0;
  double gain_sum = 0.0;
  std::map<int, double> ndcg_sum;
  for (int k : ks) ndcg_sum[k] = 0.0;

  for (const RankingInstance& inst : dataset) {
    std::vector<int> perm;
    switch (decoder) {
      case EvalDecoder::kSequential:
        perm = decode_greedy(params, inst, options).perm;
        break;
      case EvalDecoder::kOneStep:
        perm = decode_onestep(params, inst, options);
        break;
      case EvalDecoder::kNoop:
        perm.resize(static_cast<size_t>(inst.n()));
        std::iota(perm.begin(), perm.end(), 0);
        break;
    }
    gain_sum += rank_gain(perm, inst.labels);
    const auto ap = map_score(perm, inst.labels);
    if (!ap) {
      ++zero_click;
      continue;
    }
    ++scored;
    map_sum += *ap;
    for (int k : ks) ndcg_sum[k] += ndcg_at_k(perm, inst.labels, k).value();
  }

  if (scored > 0) {
    report.map = map_sum / scored;
    for (int k : ks) report.ndcg[k] = ndcg_sum[k] / scored;
  }
  if (report.num_queries > 0) {
    report.rank_gain = gain_sum / report.num_queries;
    report.zero_click_fraction =
        static_cast<double>(zero_click) / static_cast<double>(report.num_queries);
  }
  return report;
}

}  // namespace seq2slate
