#ifndef SEQ2SLATE_MODEL_H_
#define SEQ2SLATE_MODEL_H_

#include <span>
#include <string>
#include <vector>

#include "seq2slate/instance.h"
#include "seq2slate/losses.h"
#include "seq2slate/rng.h"
#include "seq2slate/tensor.h"

namespace seq2slate {

/// One LSTM cell's weights. Gates are stacked in the order
/// input, forget, cell, output: w_x is {4*rho, input_dim}, w_h is
/// {4*rho, rho}, b is {4*rho}. Standard cell, no peepholes.
struct LstmWeights {
  Tensor w_x, w_h, b;
};

/// All learned parameters of the pointer network.
///
/// The optional input projection maps raw item features (m_raw) to the
/// model width m; it is present exactly when m_raw != m and is stored as an
/// {m_raw, m} matrix applied as x_proj = P^T x. `go` is the learned first
/// decoder input.
struct PointerNetParams {
  int m_raw = 0;
  int m = 0;
  int rho = 0;
  Tensor input_projection;  // {m_raw, m} or empty
  LstmWeights encoder;      // input size m
  LstmWeights decoder;      // input size m
  Tensor w_enc, w_dec;      // {rho, rho}
  Tensor v;                 // {rho}
  Tensor go;                // {m}

  bool has_projection() const { return !input_projection.empty(); }

  /// Allocates zero-valued parameters of the given dimensions. The
  /// projection is allocated exactly when m_raw != m.
  static PointerNetParams make(int m_raw, int m, int rho);
  static PointerNetParams zeros_like(const PointerNetParams& p) {
    return make(p.m_raw, p.m, p.rho);
  }

  /// Visits every parameter tensor in the fixed serialization order:
  /// input_projection (when present), encoder.w_x, encoder.w_h, encoder.b,
  /// decoder.w_x, decoder.w_h, decoder.b, w_enc, w_dec, v, go.
  /// This order defines the checkpoint layout, the flattened vector used by
  /// finite differences, and the optimizer's update order.
  template <typename F>
  void for_each_tensor(F&& f) {
    if (has_projection()) f("input_projection", input_projection);
    f("encoder.w_x", encoder.w_x);
    f("encoder.w_h", encoder.w_h);
    f("encoder.b", encoder.b);
    f("decoder.w_x", decoder.w_x);
    f("decoder.w_h", decoder.w_h);
    f("decoder.b", decoder.b);
    f("w_enc", w_enc);
    f("w_dec", w_dec);
    f("v", v);
    f("go", go);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    const_cast<PointerNetParams*>(this)->for_each_tensor(
        [&](const char* name, Tensor& t) { f(name, static_cast<const Tensor&>(t)); });
  }

  int64_t num_params() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
  bool all_finite() const;
  bool operator==(const PointerNetParams& other) const;
};

/// Parameter tensors in the fixed order, for zipped traversal of
/// structurally identical parameter sets (gradients, optimizer moments).
std::vector<Tensor*> tensor_list(PointerNetParams& params);
std::vector<const Tensor*> tensor_list(const PointerNetParams& params);

/// acc += scale * g, tensor by tensor. Shapes must match.
void axpy_params(double scale, const PointerNetParams& g, PointerNetParams& acc);

/// Runtime behavior switches that are not part of the learned parameters.
/// `reverse_input` feeds items to the encoder worst-first (the default is
/// base-ranker order, best first); it must match between training and
/// inference since it changes the function the parameters compute.
struct ModelOptions {
  bool reverse_input = false;
};

/// Per-item encoder outputs plus the final cell state used to initialize
/// the decoder. `attn_proj` caches w_enc * e_i, which the attention reuses
/// at every decoding step.
struct EncoderMemory {
  Tensor states;     // {n, rho}, row i = e_i for item i
  std::vector<double> final_h, final_c;
  Tensor attn_proj;  // {n, rho}
};

/// Decoder recurrent state plus the input the next step will consume.
struct DecoderState {
  std::vector<double> h, c;
  std::vector<double> next_input;  // length m
};

struct StepOutput {
  std::vector<double> scores;  // computed for every item, masked or not
  std::vector<double> probs;   // exactly 0 on excluded items
};

/// Full record of one decode: the emitted permutation (0-based item
/// indices), the per-step score and probability matrices (row j belongs to
/// decoding step j), and log p(perm | x).
struct DecodeTrace {
  std::vector<int> perm;
  Tensor scores;  // {n, n}
  Tensor probs;   // {n, n}
  double log_prob = 0.0;
};

/// Inverted dropout masks for the LSTM inputs, drawn once per instance per
/// training step. Entries are 0 or 1/(1-p). Row j of decoder_mask applies
/// to the input consumed at decoder step j (step 0 consumes `go`).
struct DropoutPlan {
  Tensor encoder_mask;  // {n, m}
  Tensor decoder_mask;  // {n, m}
};

DropoutPlan make_dropout_plan(int n, int m, double p, Rng& rng);

/// Applies the input projection (identity when absent): {n, m} matrix of
/// model-width item vectors.
Tensor project_features(const PointerNetParams& params, const RankingInstance& instance);

EncoderMemory encode(const PointerNetParams& params, const RankingInstance& instance,
                     const ModelOptions& options = {});

DecoderState decoder_initial_state(const PointerNetParams& params,
                                   const EncoderMemory& memory);

/// Advances the decoder one step: consumes state.next_input, computes
/// attention scores over all items and the masked distribution over the
/// non-excluded ones. The caller picks the next item and refills
/// state.next_input. `excluded` is a byte mask of length n (or empty).
StepOutput decode_step(const PointerNetParams& params, const EncoderMemory& memory,
                       DecoderState& state, std::span<const char> excluded);

DecodeTrace decode_greedy(const PointerNetParams& params, const RankingInstance& instance,
                          const ModelOptions& options = {},
                          const DropoutPlan* dropout = nullptr);
DecodeTrace decode_sample(const PointerNetParams& params, const RankingInstance& instance,
                          Rng& rng, const ModelOptions& options = {},
                          const DropoutPlan* dropout = nullptr);

/// Single attention step from the `go` input; items sorted by the step-1
/// scores, descending, ties to the lower index. O(n) decoder cost.
std::vector<int> decode_onestep(const PointerNetParams& params,
                                const RankingInstance& instance,
                                const ModelOptions& options = {});

/// log p(perm | x) under teacher forcing (decoder inputs follow `perm`).
double log_prob_of(const PointerNetParams& params, const RankingInstance& instance,
                   std::span<const int> perm, const ModelOptions& options = {});

/// Full trace (scores, probs, log-prob) of a teacher-forced decode of
/// `perm`, forward pass only.
DecodeTrace teacher_forced_trace(const PointerNetParams& params,
                                 const RankingInstance& instance,
                                 std::span<const int> perm,
                                 const ModelOptions& options = {});

struct LogProbGrad {
  double log_prob = 0.0;
  PointerNetParams grad;
};
LogProbGrad log_prob_and_grad(const PointerNetParams& params,
                              const RankingInstance& instance,
                              std::span<const int> perm,
                              const ModelOptions& options = {});

struct SeqLossGrad {
  double loss = 0.0;
  PointerNetParams grad;
};
SeqLossGrad sequence_loss_and_grad(const PointerNetParams& params,
                                   const RankingInstance& instance,
                                   std::span<const int> perm, const LossConfig& config,
                                   const ModelOptions& options = {});

/// Fused teacher-forced pass computing
///   d/dtheta [ logp_coeff * log p(perm|x) + loss_coeff * L_perm(theta) ]
/// in a single forward/backward sweep. The batch estimators use this to
/// combine the score-function and pathwise terms; `loss` may be null when
/// loss_coeff is 0.
struct TeacherForcedEval {
  double log_prob = 0.0;
  double seq_loss = 0.0;
  PointerNetParams grad;
};
TeacherForcedEval teacher_forced_grad(const PointerNetParams& params,
                                      const RankingInstance& instance,
                                      std::span<const int> perm,
                                      const LossConfig* loss, double logp_coeff,
                                      double loss_coeff,
                                      const ModelOptions& options = {},
                                      const DropoutPlan* dropout = nullptr);

}  // namespace seq2slate

#endif  // SEQ2SLATE_MODEL_H_
