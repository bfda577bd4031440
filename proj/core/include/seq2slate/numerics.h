#ifndef SEQ2SLATE_NUMERICS_H_
#define SEQ2SLATE_NUMERICS_H_

#include <functional>
#include <span>
#include <vector>

#include "seq2slate/rng.h"
#include "seq2slate/tensor.h"

namespace seq2slate {

/// Softmax over the non-excluded entries of `scores`, computed with
/// max-subtraction so large scores cannot overflow. Excluded entries get
/// probability exactly 0. `excluded` is a byte mask of the same length
/// (nonzero = excluded); an empty mask excludes nothing.
///
/// Throws NumericError if every index is excluded ("empty support") or any
/// score is non-finite.
std::vector<double> masked_softmax(std::span<const double> scores,
                                   std::span<const char> excluded);

/// Writes log-probabilities for non-excluded entries into `log_probs`
/// (excluded slots are set to -inf) and returns log of the partition sum
/// minus the max (so log p_i = scores[i] - max - return). Shares the
/// masked_softmax contract; used where exact log values matter.
double masked_log_softmax(std::span<const double> scores,
                          std::span<const char> excluded,
                          std::span<double> log_probs);

/// (1/gamma) * log sum_i exp(gamma * s[i]), overflow-safe.
/// Bounds: max(s) <= smooth_max(s, gamma) <= max(s) + log(n)/gamma.
double smooth_max(std::span<const double> s, double gamma);
double smooth_min(std::span<const double> s, double gamma);

/// Gradient of smooth_max w.r.t. s: the gamma-softmax of s.
std::vector<double> smooth_max_grad(std::span<const double> s, double gamma);

/// Draws an index distributed according to `probs`. Entries must be
/// nonnegative and sum to 1 within 1e-9. Never returns an index whose
/// probability is exactly 0.
int sample_categorical(std::span<const double> probs, Rng& rng);

/// Central-difference gradient of a scalar function: component k is
/// (f(theta + eps e_k) - f(theta - eps e_k)) / (2 eps).
/// Throws NumericError naming the coordinate if an evaluation is non-finite.
std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> theta, double eps);

// --- small dense kernels shared by the model code ---

/// y += A x, A is {r, c}, x has length c, y length r.
void matvec_acc(const Tensor& a, std::span<const double> x, std::span<double> y);
/// y += A^T x, A is {r, c}, x has length r, y length c.
void matvec_t_acc(const Tensor& a, std::span<const double> x, std::span<double> y);
/// A += u v^T, A is {|u|, |v|}.
void outer_acc(std::span<const double> u, std::span<const double> v, Tensor& a);
/// y += a * x (elementwise).
void axpy(double a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);

/// Solves (A + ridge I) w = b for symmetric positive semi-definite A via
/// Gaussian elimination with partial pivoting. Used by the built-in
/// least-squares ranker; A is tiny (feature_dim + 1 square).
std::vector<double> solve_ridge(Tensor a, std::vector<double> b, double ridge);

}  // namespace seq2slate

#endif  // SEQ2SLATE_NUMERICS_H_
