#include "seq2slate/numerics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seq2slate/error.h"

namespace seq2slate {

namespace {

void check_mask(size_t n, std::span<const char> excluded) {
  if (!excluded.empty() && excluded.size() != n) {
    throw DataError("masked_softmax: mask length mismatch");
  }
}

bool is_excluded(std::span<const char> excluded, size_t i) {
  return !excluded.empty() && excluded[i] != 0;
}

}  // namespace

double masked_log_softmax(std::span<const double> scores,
                          std::span<const char> excluded,
                          std::span<double> log_probs) {
  const size_t n = scores.size();
  check_mask(n, excluded);
  if (log_probs.size() != n) throw DataError("masked_log_softmax: output length mismatch");

  double max_s = -std::numeric_limits<double>::infinity();
  size_t support = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(scores[i])) {
      throw NumericError("masked_softmax: non-finite score at index " + std::to_string(i));
    }
    if (is_excluded(excluded, i)) continue;
    ++support;
    max_s = std::max(max_s, scores[i]);
  }
  if (support == 0) throw NumericError("masked_softmax: empty support");

  double z = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (is_excluded(excluded, i)) continue;
    z += std::exp(scores[i] - max_s);
  }
  const double log_z = std::log(z);
  for (size_t i = 0; i < n; ++i) {
    log_probs[i] = is_excluded(excluded, i)
                       ? -std::numeric_limits<double>::infinity()
                       : scores[i] - max_s - log_z;
  }
  return log_z;
}

std::vector<double> masked_softmax(std::span<const double> scores,
                                   std::span<const char> excluded) {
  std::vector<double> out(scores.size());
  masked_log_softmax(scores, excluded, out);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = is_excluded(excluded, i) ? 0.0 : std::exp(out[i]);
  }
  return out;
}

double smooth_max(std::span<const double> s, double gamma) {
  if (gamma <= 0.0) throw DataError("smooth_max: gamma must be > 0");
  if (s.empty()) throw DataError("smooth_max: empty input");
  double max_s = *std::max_element(s.begin(), s.end());
  if (!std::isfinite(max_s)) throw NumericError("smooth_max: non-finite input");
  double z = 0.0;
  for (double v : s) z += std::exp(gamma * (v - max_s));
  return max_s + std::log(z) / gamma;
}

double smooth_min(std::span<const double> s, double gamma) {
  std::vector<double> neg(s.begin(), s.end());
  for (double& v : neg) v = -v;
  return -smooth_max(neg, gamma);
}

std::vector<double> smooth_max_grad(std::span<const double> s, double gamma) {
  if (gamma <= 0.0) throw DataError("smooth_max_grad: gamma must be > 0");
  if (s.empty()) throw DataError("smooth_max_grad: empty input");
  const double max_s = *std::max_element(s.begin(), s.end());
  std::vector<double> w(s.size());
  double z = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    w[i] = std::exp(gamma * (s[i] - max_s));
    z += w[i];
  }
  for (double& v : w) v /= z;
  return w;
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  double sum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0)) {
      throw NumericError("sample_categorical: negative or NaN entry at index " +
                         std::to_string(i));
    }
    sum += probs[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw NumericError("sample_categorical: probabilities sum to " + std::to_string(sum));
  }
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = -1;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // u landed in the rounding slack past the last positive entry.
  if (last_positive < 0) throw NumericError("sample_categorical: all-zero distribution");
  return last_positive;
}

std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> theta, double eps) {
  if (eps <= 0.0) throw DataError("finite_difference_gradient: eps must be > 0");
  std::vector<double> point(theta.begin(), theta.end());
  std::vector<double> grad(theta.size());
  for (size_t k = 0; k < point.size(); ++k) {
    const double saved = point[k];
    point[k] = saved + eps;
    const double fp = f(point);
    point[k] = saved - eps;
    const double fm = f(point);
    point[k] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("finite_difference_gradient: non-finite evaluation at coordinate " +
                         std::to_string(k));
    }
    grad[k] = (fp - fm) / (2.0 * eps);
  }
  return grad;
}

void matvec_acc(const Tensor& a, std::span<const double> x, std::span<double> y) {
  const int64_t r = a.dim(0), c = a.dim(1);
  const double* m = a.data();
  for (int64_t i = 0; i < r; ++i) {
    double acc = 0.0;
    const double* row = m + i * c;
    for (int64_t j = 0; j < c; ++j) acc += row[j] * x[static_cast<size_t>(j)];
    y[static_cast<size_t>(i)] += acc;
  }
}

void matvec_t_acc(const Tensor& a, std::span<const double> x, std::span<double> y) {
  const int64_t r = a.dim(0), c = a.dim(1);
  const double* m = a.data();
  for (int64_t i = 0; i < r; ++i) {
    const double xi = x[static_cast<size_t>(i)];
    if (xi == 0.0) continue;
    const double* row = m + i * c;
    for (int64_t j = 0; j < c; ++j) y[static_cast<size_t>(j)] += xi * row[j];
  }
}

void outer_acc(std::span<const double> u, std::span<const double> v, Tensor& a) {
  const int64_t r = a.dim(0), c = a.dim(1);
  double* m = a.data();
  for (int64_t i = 0; i < r; ++i) {
    const double ui = u[static_cast<size_t>(i)];
    if (ui == 0.0) continue;
    double* row = m + i * c;
    for (int64_t j = 0; j < c; ++j) row[j] += ui * v[static_cast<size_t>(j)];
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

std::vector<double> solve_ridge(Tensor a, std::vector<double> b, double ridge) {
  const int64_t n = a.dim(0);
  if (a.dim(1) != n || static_cast<int64_t>(b.size()) != n) {
    throw DataError("solve_ridge: shape mismatch");
  }
  for (int64_t i = 0; i < n; ++i) a.at(i, i) += ridge;
  // Gaussian elimination with partial pivoting.
  for (int64_t col = 0; col < n; ++col) {
    int64_t piv = col;
    for (int64_t r = col + 1; r < n; ++r) {
      if (std::abs(a.at(r, col)) > std::abs(a.at(piv, col))) piv = r;
    }
    if (std::abs(a.at(piv, col)) < 1e-300) throw NumericError("solve_ridge: singular system");
    if (piv != col) {
      for (int64_t j = 0; j < n; ++j) std::swap(a.at(col, j), a.at(piv, j));
      std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(piv)]);
    }
    for (int64_t r = col + 1; r < n; ++r) {
      const double factor = a.at(r, col) / a.at(col, col);
      if (factor == 0.0) continue;
      for (int64_t j = col; j < n; ++j) a.at(r, j) -= factor * a.at(col, j);
      b[static_cast<size_t>(r)] -= factor * b[static_cast<size_t>(col)];
    }
  }
  std::vector<double> w(static_cast<size_t>(n));
  for (int64_t r = n - 1; r >= 0; --r) {
    double acc = b[static_cast<size_t>(r)];
    for (int64_t j = r + 1; j < n; ++j) acc -= a.at(r, j) * w[static_cast<size_t>(j)];
    w[static_cast<size_t>(r)] = acc / a.at(r, r);
  }
  return w;
}

}  // namespace seq2slate
