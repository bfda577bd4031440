#include "seq2slate/clickgen.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seq2slate/error.h"

namespace seq2slate {

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace

double similarity_threshold(const Tensor& features, double q) {
  const int n = static_cast<int>(features.dim(0));
  if (n < 2) throw DataError("similarity_threshold: need at least 2 items");
  if (!(q > 0.0 && q <= 1.0)) throw DataError("similarity_threshold: q must be in (0, 1]");
  std::vector<double> dists;
  dists.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      dists.push_back(euclidean(features.row(i), features.row(j)));
    }
  }
  std::sort(dists.begin(), dists.end());
  // Linear interpolation between order statistics at position q*(k-1).
  const double pos = q * static_cast<double>(dists.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= dists.size()) return dists.back();
  return dists[lo] + frac * (dists[lo + 1] - dists[lo]);
}

std::vector<int> simulate_clicks(const RankingInstance& instance,
                                 const CascadeConfig& config, Rng& rng) {
  const int n = instance.n();
  if (static_cast<int>(instance.grades.size()) != n) {
    throw DataError("simulate_clicks: instance has no relevance grades");
  }
  if (config.eta < 0.0) throw DataError("simulate_clicks: eta must be >= 0");

  const bool needs_threshold = config.mode != CascadeConfig::Mode::kNone && n >= 2;
  const double threshold = needs_threshold ? similarity_threshold(instance.features, config.q)
                                           : 0.0;

  std::vector<int> clicks(static_cast<size_t>(n), 0);
  std::vector<int> clicked_items;
  for (int i = 0; i < n; ++i) {
    // One observation draw per item regardless of the outcome keeps runs
    // with equal seeds coupled across eta and mode.
    const double u = rng.uniform();
    const double p_obs = std::pow(static_cast<double>(i + 1), -config.eta);
    if (u >= p_obs) continue;

    const bool relevant =
        config.relevant_grades.count(instance.grades[static_cast<size_t>(i)]) > 0;
    double min_dist = std::numeric_limits<double>::infinity();
    if (config.mode != CascadeConfig::Mode::kNone) {
      for (int c : clicked_items) {
        min_dist = std::min(min_dist, euclidean(instance.features.row(i),
                                                instance.features.row(c)));
      }
    }

    bool click = false;
    switch (config.mode) {
      case CascadeConfig::Mode::kNone:
        click = relevant;
        break;
      case CascadeConfig::Mode::kDiverse:
        // Relevant items click only when strictly farther than the
        // threshold from every previously clicked item (vacuously true for
        // the first click).
        click = relevant && min_dist > threshold;
        break;
      case CascadeConfig::Mode::kSimilar:
        // Relevant items always click; irrelevant ones click when close to
        // something already clicked.
        click = relevant || min_dist <= threshold;
        break;
    }
    if (click) {
      clicks[static_cast<size_t>(i)] = 1;
      clicked_items.push_back(i);
    }
  }
  return clicks;
}

ClickStats generate_clicks(std::span<RankingInstance> instances,
                           const CascadeConfig& config, Rng& rng) {
  ClickStats stats;
  for (RankingInstance& inst : instances) {
    inst.labels = simulate_clicks(inst, config, rng);
    stats.num_queries += 1;
    stats.num_items += inst.n();
    const int c = inst.num_positive();
    stats.num_clicks += c;
    if (c == 0) stats.zero_click_queries += 1;
  }
  return stats;
}

}  // namespace seq2slate
