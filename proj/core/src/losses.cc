#include "seq2slate/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seq2slate/error.h"
#include "seq2slate/numerics.h"

namespace seq2slate {

namespace {

bool is_excluded(std::span<const char> excluded, size_t i) {
  return !excluded.empty() && excluded[i] != 0;
}

}  // namespace

double per_step_xent(std::span<const double> s, std::span<const int> y,
                     std::span<const char> excluded) {
  const size_t n = s.size();
  if (y.size() != n) throw DataError("per_step_xent: label length mismatch");
  int pos = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!is_excluded(excluded, i) && y[i] != 0) ++pos;
  }
  if (pos == 0) return 0.0;

  std::vector<double> log_p(n);
  masked_log_softmax(s, excluded, log_p);
  double loss = 0.0;
  const double yhat = 1.0 / static_cast<double>(pos);
  for (size_t i = 0; i < n; ++i) {
    if (is_excluded(excluded, i) || y[i] == 0) continue;
    loss -= yhat * log_p[i];
  }
  return loss;
}

double per_step_hinge(std::span<const double> s, std::span<const int> y,
                      std::span<const char> excluded,
                      std::optional<double> gamma, bool smooth_outer) {
  const size_t n = s.size();
  if (y.size() != n) throw DataError("per_step_hinge: label length mismatch");
  std::vector<double> pos_scores, neg_scores;
  for (size_t i = 0; i < n; ++i) {
    if (is_excluded(excluded, i)) continue;
    if (!std::isfinite(s[i])) throw NumericError("per_step_hinge: non-finite score");
    (y[i] != 0 ? pos_scores : neg_scores).push_back(s[i]);
  }
  if (pos_scores.empty() || neg_scores.empty()) return 0.0;

  double margin;
  if (gamma) {
    margin = 1.0 - smooth_min(pos_scores, *gamma) + smooth_max(neg_scores, *gamma);
  } else {
    margin = 1.0 - *std::min_element(pos_scores.begin(), pos_scores.end()) +
             *std::max_element(neg_scores.begin(), neg_scores.end());
  }
  if (smooth_outer && gamma) {
    // smooth_max({0, margin}; gamma) = softplus(gamma*margin)/gamma
    const double g = *gamma;
    const double t = g * margin;
    return (t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t))) / g;
  }
  return std::max(0.0, margin);
}

double per_step_loss_grad(const LossConfig& config, std::span<const double> s,
                          std::span<const int> y, std::span<const char> excluded,
                          std::span<double> ds) {
  const size_t n = s.size();
  if (ds.size() != n) throw DataError("per_step_loss_grad: grad length mismatch");
  std::fill(ds.begin(), ds.end(), 0.0);

  if (config.family == LossFamily::kXent) {
    int pos = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!is_excluded(excluded, i) && y[i] != 0) ++pos;
    }
    if (pos == 0) return 0.0;
    std::vector<double> log_p(n);
    masked_log_softmax(s, excluded, log_p);
    const double yhat = 1.0 / static_cast<double>(pos);
    double loss = 0.0;
    // d/ds_i of -sum yhat_k log p_k = p_i - yhat_i on the support.
    for (size_t i = 0; i < n; ++i) {
      if (is_excluded(excluded, i)) continue;
      const double p = std::exp(log_p[i]);
      ds[i] = p - (y[i] != 0 ? yhat : 0.0);
      if (y[i] != 0) loss -= yhat * log_p[i];
    }
    return loss;
  }

  // Hinge families. Collect support indices split by label.
  std::vector<int> pos_idx, neg_idx;
  for (size_t i = 0; i < n; ++i) {
    if (is_excluded(excluded, i)) continue;
    (y[i] != 0 ? pos_idx : neg_idx).push_back(static_cast<int>(i));
  }
  if (pos_idx.empty() || neg_idx.empty()) return 0.0;

  const bool smooth = config.family == LossFamily::kSmoothHinge;
  std::optional<double> gamma = smooth ? std::optional<double>(config.gamma) : std::nullopt;
  const double loss = per_step_hinge(s, y, excluded, gamma, smooth && config.smooth_outer);

  std::vector<double> pos_scores, neg_scores;
  pos_scores.reserve(pos_idx.size());
  neg_scores.reserve(neg_idx.size());
  for (int i : pos_idx) pos_scores.push_back(s[static_cast<size_t>(i)]);
  for (int i : neg_idx) neg_scores.push_back(s[static_cast<size_t>(i)]);

  double margin;
  if (smooth) {
    margin = 1.0 - smooth_min(pos_scores, config.gamma) +
             smooth_max(neg_scores, config.gamma);
  } else {
    margin = 1.0 - *std::min_element(pos_scores.begin(), pos_scores.end()) +
             *std::max_element(neg_scores.begin(), neg_scores.end());
  }

  double outer_scale;
  if (smooth && config.smooth_outer) {
    outer_scale = 1.0 / (1.0 + std::exp(-config.gamma * margin));  // sigmoid
  } else {
    if (margin <= 0.0) return loss;  // flat branch of max{0, .}
    outer_scale = 1.0;
  }

  if (smooth) {
    // d smooth_min(s_P)/ds_i = softmin weights; d smooth_max(s_N)/ds_k = softmax weights.
    std::vector<double> neg_pos(pos_scores);
    for (double& v : neg_pos) v = -v;
    std::vector<double> wmin = smooth_max_grad(neg_pos, config.gamma);
    std::vector<double> wmax = smooth_max_grad(neg_scores, config.gamma);
    for (size_t k = 0; k < pos_idx.size(); ++k) {
      ds[static_cast<size_t>(pos_idx[k])] = -outer_scale * wmin[k];
    }
    for (size_t k = 0; k < neg_idx.size(); ++k) {
      ds[static_cast<size_t>(neg_idx[k])] = outer_scale * wmax[k];
    }
  } else {
    // Subgradient at the active min/max; ties break to the lowest index.
    int arg_min = pos_idx[0];
    for (int i : pos_idx) {
      if (s[static_cast<size_t>(i)] < s[static_cast<size_t>(arg_min)]) arg_min = i;
    }
    int arg_max = neg_idx[0];
    for (int i : neg_idx) {
      if (s[static_cast<size_t>(i)] > s[static_cast<size_t>(arg_max)]) arg_max = i;
    }
    ds[static_cast<size_t>(arg_min)] = -outer_scale;
    ds[static_cast<size_t>(arg_max)] = outer_scale;
  }
  return loss;
}

std::vector<double> position_weights(int n, const WeightScheme& scheme) {
  if (n < 1) throw DataError("position_weights: n must be >= 1");
  std::vector<double> w(static_cast<size_t>(n), 1.0);
  switch (scheme.kind) {
    case WeightScheme::Kind::kUniform:
      break;
    case WeightScheme::Kind::kDcg:
      for (int j = 1; j <= n; ++j) {
        w[static_cast<size_t>(j - 1)] = 1.0 / std::log2(static_cast<double>(j) + 1.0);
      }
      break;
    case WeightScheme::Kind::kTopK:
      if (scheme.k < 1) throw DataError("position_weights: topk requires k >= 1");
      for (int j = 1; j <= n; ++j) {
        w[static_cast<size_t>(j - 1)] = (j <= scheme.k) ? 1.0 : 0.0;
      }
      break;
  }
  return w;
}

double sequence_loss(const Tensor& scores, std::span<const int> y,
                     std::span<const int> perm, const LossConfig& config) {
  const int n = static_cast<int>(perm.size());
  if (scores.shape().size() != 2 || scores.dim(0) != n || scores.dim(1) != n ||
      static_cast<int>(y.size()) != n) {
    throw DataError("sequence_loss: shape mismatch");
  }
  const std::vector<double> w = position_weights(n, config.weights);
  std::vector<char> excluded(static_cast<size_t>(n), 0);
  std::optional<double> gamma = config.family == LossFamily::kSmoothHinge
                                    ? std::optional<double>(config.gamma)
                                    : std::nullopt;
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    if (w[static_cast<size_t>(j)] != 0.0) {
      double step;
      if (config.family == LossFamily::kXent) {
        step = per_step_xent(scores.row(j), y, excluded);
      } else {
        step = per_step_hinge(scores.row(j), y, excluded, gamma,
                              config.family == LossFamily::kSmoothHinge && config.smooth_outer);
      }
      total += w[static_cast<size_t>(j)] * step;
    }
    excluded[static_cast<size_t>(perm[static_cast<size_t>(j)])] = 1;
  }
  return total;
}

std::string to_string(LossFamily family) {
  switch (family) {
    case LossFamily::kXent: return "xent";
    case LossFamily::kHinge: return "hinge";
    case LossFamily::kSmoothHinge: return "smooth-hinge";
  }
  return "?";
}

std::string to_string(Policy policy) {
  return policy == Policy::kSample ? "sample" : "greedy";
}

}  // namespace seq2slate
