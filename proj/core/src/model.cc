#include "seq2slate/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seq2slate/error.h"
#include "seq2slate/numerics.h"

namespace seq2slate {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Activations of one LSTM step, kept for the backward pass.
struct StepCache {
  std::vector<double> x;  // input as consumed (after dropout)
  std::vector<double> gi, gf, gg, go;
  std::vector<double> c, h;
};

void lstm_forward(const LstmWeights& w, std::span<const double> x,
                  std::span<const double> h_prev, std::span<const double> c_prev,
                  StepCache& out) {
  const int rho = static_cast<int>(w.w_h.dim(1));
  std::vector<double> z(w.b.view().begin(), w.b.view().end());
  matvec_acc(w.w_x, x, z);
  matvec_acc(w.w_h, h_prev, z);
  out.gi.resize(rho);
  out.gf.resize(rho);
  out.gg.resize(rho);
  out.go.resize(rho);
  out.c.resize(rho);
  out.h.resize(rho);
  for (int k = 0; k < rho; ++k) {
    const double i = sigmoid(z[static_cast<size_t>(k)]);
    const double f = sigmoid(z[static_cast<size_t>(rho + k)]);
    const double g = std::tanh(z[static_cast<size_t>(2 * rho + k)]);
    const double o = sigmoid(z[static_cast<size_t>(3 * rho + k)]);
    const double c = f * c_prev[static_cast<size_t>(k)] + i * g;
    out.gi[static_cast<size_t>(k)] = i;
    out.gf[static_cast<size_t>(k)] = f;
    out.gg[static_cast<size_t>(k)] = g;
    out.go[static_cast<size_t>(k)] = o;
    out.c[static_cast<size_t>(k)] = c;
    out.h[static_cast<size_t>(k)] = o * std::tanh(c);
  }
}

// Backward through one LSTM step. dh/dc_in are the gradients flowing into
// this step's h and c; dh_prev/dc_prev/dx are overwritten; weight gradients
// accumulate into `grad`.
void lstm_backward(const LstmWeights& w, const StepCache& cache,
                   std::span<const double> h_prev, std::span<const double> c_prev,
                   std::span<const double> dh, std::span<const double> dc_in,
                   std::span<double> dh_prev, std::span<double> dc_prev,
                   std::span<double> dx, LstmWeights& grad) {
  const int rho = static_cast<int>(w.w_h.dim(1));
  std::vector<double> da(static_cast<size_t>(4 * rho));
  for (int k = 0; k < rho; ++k) {
    const size_t sk = static_cast<size_t>(k);
    const double i = cache.gi[sk], f = cache.gf[sk], g = cache.gg[sk], o = cache.go[sk];
    const double tc = std::tanh(cache.c[sk]);
    const double dout = dh[sk] * tc;
    const double dc = dc_in[sk] + dh[sk] * o * (1.0 - tc * tc);
    const double di = dc * g;
    const double df = dc * c_prev[sk];
    const double dg = dc * i;
    dc_prev[sk] = dc * f;
    da[sk] = di * i * (1.0 - i);
    da[static_cast<size_t>(rho + k)] = df * f * (1.0 - f);
    da[static_cast<size_t>(2 * rho + k)] = dg * (1.0 - g * g);
    da[static_cast<size_t>(3 * rho + k)] = dout * o * (1.0 - o);
  }
  outer_acc(da, cache.x, grad.w_x);
  outer_acc(da, h_prev, grad.w_h);
  axpy(1.0, da, grad.b.view());
  std::fill(dx.begin(), dx.end(), 0.0);
  matvec_t_acc(w.w_x, da, dx);
  std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
  matvec_t_acc(w.w_h, da, dh_prev);
}

void check_instance(const PointerNetParams& params, const RankingInstance& instance) {
  if (instance.n() < 1) throw DataError("model: instance has no items");
  if (instance.feature_dim() != params.m_raw) {
    throw DataError("model: instance feature dim " + std::to_string(instance.feature_dim()) +
                    " does not match model m_raw " + std::to_string(params.m_raw));
  }
}

void validate_perm(int n, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != n) throw DataError("model: permutation length mismatch");
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (int v : perm) {
    if (v < 0 || v >= n || seen[static_cast<size_t>(v)]) {
      throw DataError("model: not a valid permutation");
    }
    seen[static_cast<size_t>(v)] = 1;
  }
}

enum class DecodeMode { kGreedy, kSample, kFixed };

struct ForwardPass {
  Tensor xt;                    // {n, m} projected features (pre-dropout)
  std::vector<int> feed_order;  // encoder consumption order (item indices)
  std::vector<StepCache> enc;   // indexed by feed position
  EncoderMemory memory;
  std::vector<StepCache> dec;  // indexed by decoder step
  Tensor dec_proj;             // {n, rho}: w_dec * d_j
  Tensor scores, probs, log_probs;
  std::vector<char> excl;  // {n*n}: exclusion mask in effect at step j
  std::vector<int> perm;
  double log_prob = 0.0;
};

ForwardPass run_forward(const PointerNetParams& params, const RankingInstance& instance,
                        DecodeMode mode, std::span<const int> fixed_perm, Rng* rng,
                        const ModelOptions& options, const DropoutPlan* dropout) {
  check_instance(params, instance);
  const int n = instance.n();
  const int m = params.m;
  const int rho = params.rho;
  if (mode == DecodeMode::kFixed) validate_perm(n, fixed_perm);

  ForwardPass fp;
  fp.xt = project_features(params, instance);
  fp.feed_order.resize(static_cast<size_t>(n));
  std::iota(fp.feed_order.begin(), fp.feed_order.end(), 0);
  if (options.reverse_input) std::reverse(fp.feed_order.begin(), fp.feed_order.end());

  // Encoder sweep.
  fp.enc.resize(static_cast<size_t>(n));
  fp.memory.states = Tensor({n, rho});
  std::vector<double> h(static_cast<size_t>(rho), 0.0), c(static_cast<size_t>(rho), 0.0);
  for (int pos = 0; pos < n; ++pos) {
    const int item = fp.feed_order[static_cast<size_t>(pos)];
    StepCache& sc = fp.enc[static_cast<size_t>(pos)];
    auto xrow = fp.xt.row(item);
    sc.x.assign(xrow.begin(), xrow.end());
    if (dropout != nullptr) {
      for (int k = 0; k < m; ++k) sc.x[static_cast<size_t>(k)] *= dropout->encoder_mask.at(item, k);
    }
    lstm_forward(params.encoder, sc.x, h, c, sc);
    h = sc.h;
    c = sc.c;
    std::copy(sc.h.begin(), sc.h.end(), fp.memory.states.row(item).begin());
  }
  fp.memory.final_h = h;
  fp.memory.final_c = c;
  fp.memory.attn_proj = Tensor({n, rho});
  for (int i = 0; i < n; ++i) {
    matvec_acc(params.w_enc, fp.memory.states.row(i), fp.memory.attn_proj.row(i));
  }

  // Decoder sweep with attention.
  fp.dec.resize(static_cast<size_t>(n));
  fp.dec_proj = Tensor({n, rho});
  fp.scores = Tensor({n, n});
  fp.probs = Tensor({n, n});
  fp.log_probs = Tensor({n, n});
  fp.excl.assign(static_cast<size_t>(n) * static_cast<size_t>(n), 0);
  fp.perm.resize(static_cast<size_t>(n));

  std::vector<char> mask(static_cast<size_t>(n), 0);
  std::vector<double> input(params.go.view().begin(), params.go.view().end());
  if (dropout != nullptr) {
    for (int k = 0; k < m; ++k) input[static_cast<size_t>(k)] *= dropout->decoder_mask.at(0, k);
  }
  h = fp.memory.final_h;
  c = fp.memory.final_c;

  double total_log_prob = 0.0;
  for (int j = 0; j < n; ++j) {
    StepCache& sc = fp.dec[static_cast<size_t>(j)];
    sc.x = input;
    lstm_forward(params.decoder, sc.x, h, c, sc);
    h = sc.h;
    c = sc.c;

    auto dpj = fp.dec_proj.row(j);
    matvec_acc(params.w_dec, sc.h, dpj);
    auto srow = fp.scores.row(j);
    for (int i = 0; i < n; ++i) {
      auto arow = fp.memory.attn_proj.row(i);
      double s = 0.0;
      for (int k = 0; k < rho; ++k) {
        s += params.v[k] * std::tanh(arow[static_cast<size_t>(k)] + dpj[static_cast<size_t>(k)]);
      }
      srow[static_cast<size_t>(i)] = s;
    }

    std::copy(mask.begin(), mask.end(),
              fp.excl.begin() + static_cast<size_t>(j) * static_cast<size_t>(n));
    auto lrow = fp.log_probs.row(j);
    masked_log_softmax(srow, mask, lrow);
    auto prow = fp.probs.row(j);
    for (int i = 0; i < n; ++i) {
      prow[static_cast<size_t>(i)] = mask[static_cast<size_t>(i)] ? 0.0
                                                                  : std::exp(lrow[static_cast<size_t>(i)]);
    }

    int choice = -1;
    switch (mode) {
      case DecodeMode::kFixed:
        choice = fixed_perm[static_cast<size_t>(j)];
        break;
      case DecodeMode::kGreedy: {
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
          if (mask[static_cast<size_t>(i)]) continue;
          const double p = prow[static_cast<size_t>(i)];
          if (p > best) {  // ties keep the lowest index
            best = p;
            choice = i;
          }
        }
        break;
      }
      case DecodeMode::kSample:
        choice = sample_categorical(prow, *rng);
        break;
    }
    fp.perm[static_cast<size_t>(j)] = choice;
    total_log_prob += lrow[static_cast<size_t>(choice)];
    mask[static_cast<size_t>(choice)] = 1;

    if (j + 1 < n) {
      auto xrow = fp.xt.row(choice);
      input.assign(xrow.begin(), xrow.end());
      if (dropout != nullptr) {
        for (int k = 0; k < m; ++k) {
          input[static_cast<size_t>(k)] *= dropout->decoder_mask.at(j + 1, k);
        }
      }
    }
  }
  fp.log_prob = total_log_prob;
  return fp;
}

// Reverse sweep given d(objective)/d(scores). Handles attention, both LSTM
// chains, the decoder-init link into the encoder's final state, dropout
// masks, and the optional input projection.
PointerNetParams backward(const PointerNetParams& params, const RankingInstance& instance,
                          const ForwardPass& fp, const Tensor& dscores,
                          const DropoutPlan* dropout) {
  const int n = instance.n();
  const int m = params.m;
  const int rho = params.rho;
  PointerNetParams g = PointerNetParams::zeros_like(params);

  // Attention: da = ds_ji * v .* (1 - t^2) with t recomputed from the cached
  // projections. Sums over j (per item) and over i (per step) let us do one
  // outer product / transposed matvec per item and per step instead of n^2.
  Tensor da_item({n, rho});
  Tensor dd({n, rho});
  for (int j = 0; j < n; ++j) {
    std::vector<double> da_step(static_cast<size_t>(rho), 0.0);
    auto dpj = fp.dec_proj.row(j);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      const double dsji = dscores.at(j, i);
      if (dsji == 0.0) continue;
      any = true;
      auto arow = fp.memory.attn_proj.row(i);
      auto dai = da_item.row(i);
      for (int k = 0; k < rho; ++k) {
        const size_t sk = static_cast<size_t>(k);
        const double t = std::tanh(arow[sk] + dpj[sk]);
        const double da = dsji * params.v[k] * (1.0 - t * t);
        g.v[k] += dsji * t;
        dai[sk] += da;
        da_step[sk] += da;
      }
    }
    if (any) {
      outer_acc(da_step, fp.dec[static_cast<size_t>(j)].h, g.w_dec);
      matvec_t_acc(params.w_dec, da_step, dd.row(j));
    }
  }
  Tensor de({n, rho});
  for (int i = 0; i < n; ++i) {
    outer_acc(da_item.row(i), fp.memory.states.row(i), g.w_enc);
    matvec_t_acc(params.w_enc, da_item.row(i), de.row(i));
  }

  // Decoder chain, last step first.
  std::vector<double> dh(static_cast<size_t>(rho), 0.0), dc(static_cast<size_t>(rho), 0.0);
  std::vector<double> dh_prev(static_cast<size_t>(rho)), dc_prev(static_cast<size_t>(rho));
  std::vector<double> dx(static_cast<size_t>(m));
  std::vector<double> dh_tot(static_cast<size_t>(rho));
  Tensor dxt({n, m});
  for (int j = n - 1; j >= 0; --j) {
    auto ddj = dd.row(j);
    for (int k = 0; k < rho; ++k) {
      dh_tot[static_cast<size_t>(k)] = dh[static_cast<size_t>(k)] + ddj[static_cast<size_t>(k)];
    }
    std::span<const double> h_prev =
        (j == 0) ? std::span<const double>(fp.memory.final_h)
                 : std::span<const double>(fp.dec[static_cast<size_t>(j - 1)].h);
    std::span<const double> c_prev =
        (j == 0) ? std::span<const double>(fp.memory.final_c)
                 : std::span<const double>(fp.dec[static_cast<size_t>(j - 1)].c);
    lstm_backward(params.decoder, fp.dec[static_cast<size_t>(j)], h_prev, c_prev, dh_tot, dc,
                  dh_prev, dc_prev, dx, g.decoder);
    if (j == 0) {
      for (int k = 0; k < m; ++k) {
        const double mval = dropout ? dropout->decoder_mask.at(0, k) : 1.0;
        g.go[k] += dx[static_cast<size_t>(k)] * mval;
      }
    } else {
      const int item = fp.perm[static_cast<size_t>(j - 1)];
      auto drow = dxt.row(item);
      for (int k = 0; k < m; ++k) {
        const double mval = dropout ? dropout->decoder_mask.at(j, k) : 1.0;
        drow[static_cast<size_t>(k)] += dx[static_cast<size_t>(k)] * mval;
      }
    }
    dh = dh_prev;
    dc = dc_prev;
  }

  // Encoder chain; dh/dc now hold the decoder-initial-state gradients, which
  // land on the encoder's final state.
  const std::vector<double> zero(static_cast<size_t>(rho), 0.0);
  for (int pos = n - 1; pos >= 0; --pos) {
    const int item = fp.feed_order[static_cast<size_t>(pos)];
    auto derow = de.row(item);
    for (int k = 0; k < rho; ++k) {
      dh_tot[static_cast<size_t>(k)] = dh[static_cast<size_t>(k)] + derow[static_cast<size_t>(k)];
    }
    std::span<const double> h_prev =
        (pos == 0) ? std::span<const double>(zero)
                   : std::span<const double>(fp.enc[static_cast<size_t>(pos - 1)].h);
    std::span<const double> c_prev =
        (pos == 0) ? std::span<const double>(zero)
                   : std::span<const double>(fp.enc[static_cast<size_t>(pos - 1)].c);
    lstm_backward(params.encoder, fp.enc[static_cast<size_t>(pos)], h_prev, c_prev, dh_tot, dc,
                  dh_prev, dc_prev, dx, g.encoder);
    auto drow = dxt.row(item);
    for (int k = 0; k < m; ++k) {
      const double mval = dropout ? dropout->encoder_mask.at(item, k) : 1.0;
      drow[static_cast<size_t>(k)] += dx[static_cast<size_t>(k)] * mval;
    }
    dh = dh_prev;
    dc = dc_prev;
  }

  if (params.has_projection()) {
    for (int i = 0; i < n; ++i) {
      outer_acc(instance.features.row(i), dxt.row(i), g.input_projection);
    }
  }
  return g;
}

// d log p(perm) / d s^j on the support: indicator(chosen) - p.
void add_logprob_score_grads(const ForwardPass& fp, double coeff, Tensor& dscores) {
  if (coeff == 0.0) return;
  const int n = static_cast<int>(fp.perm.size());
  for (int j = 0; j < n; ++j) {
    const int chosen = fp.perm[static_cast<size_t>(j)];
    for (int i = 0; i < n; ++i) {
      if (fp.excl[static_cast<size_t>(j) * static_cast<size_t>(n) + static_cast<size_t>(i)]) {
        continue;
      }
      const double ind = (i == chosen) ? 1.0 : 0.0;
      dscores.at(j, i) += coeff * (ind - fp.probs.at(j, i));
    }
  }
}

// Weighted per-step loss gradients; returns the sequence loss.
double add_loss_score_grads(const ForwardPass& fp, const RankingInstance& instance,
                            const LossConfig& config, double coeff, Tensor& dscores) {
  const int n = static_cast<int>(fp.perm.size());
  if (static_cast<int>(instance.labels.size()) != n) {
    throw DataError("model: labels missing or wrong length for loss");
  }
  const std::vector<double> w = position_weights(n, config.weights);
  std::vector<double> ds(static_cast<size_t>(n));
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    const double wj = w[static_cast<size_t>(j)];
    if (wj == 0.0) continue;
    std::span<const char> excl(fp.excl.data() + static_cast<size_t>(j) * static_cast<size_t>(n),
                               static_cast<size_t>(n));
    const double step =
        per_step_loss_grad(config, fp.scores.row(j), instance.labels, excl, ds);
    total += wj * step;
    if (coeff != 0.0) {
      for (int i = 0; i < n; ++i) dscores.at(j, i) += coeff * wj * ds[static_cast<size_t>(i)];
    }
  }
  return total;
}

DecodeTrace trace_from(ForwardPass&& fp) {
  DecodeTrace tr;
  tr.perm = std::move(fp.perm);
  tr.scores = std::move(fp.scores);
  tr.probs = std::move(fp.probs);
  tr.log_prob = fp.log_prob;
  return tr;
}

}  // namespace

PointerNetParams PointerNetParams::make(int m_raw, int m, int rho) {
  if (m_raw < 1 || m < 1 || rho < 1) throw DataError("params: dims must be >= 1");
  PointerNetParams p;
  p.m_raw = m_raw;
  p.m = m;
  p.rho = rho;
  if (m_raw != m) p.input_projection = Tensor({m_raw, m});
  p.encoder = {Tensor({4 * rho, m}), Tensor({4 * rho, rho}), Tensor({4 * rho})};
  p.decoder = {Tensor({4 * rho, m}), Tensor({4 * rho, rho}), Tensor({4 * rho})};
  p.w_enc = Tensor({rho, rho});
  p.w_dec = Tensor({rho, rho});
  p.v = Tensor({rho});
  p.go = Tensor({m});
  return p;
}

int64_t PointerNetParams::num_params() const {
  int64_t total = 0;
  for_each_tensor([&](const char*, const Tensor& t) { total += t.size(); });
  return total;
}

std::vector<double> PointerNetParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(num_params()));
  for_each_tensor([&](const char*, const Tensor& t) {
    flat.insert(flat.end(), t.view().begin(), t.view().end());
  });
  return flat;
}

void PointerNetParams::unflatten(std::span<const double> flat) {
  size_t offset = 0;
  for_each_tensor([&](const char*, Tensor& t) {
    if (offset + static_cast<size_t>(t.size()) > flat.size()) {
      throw DataError("params: unflatten length mismatch");
    }
    std::copy(flat.begin() + static_cast<ptrdiff_t>(offset),
              flat.begin() + static_cast<ptrdiff_t>(offset + static_cast<size_t>(t.size())),
              t.view().begin());
    offset += static_cast<size_t>(t.size());
  });
  if (offset != flat.size()) throw DataError("params: unflatten length mismatch");
}

bool PointerNetParams::all_finite() const {
  bool ok = true;
  for_each_tensor([&](const char*, const Tensor& t) { ok = ok && t.all_finite(); });
  return ok;
}

bool PointerNetParams::operator==(const PointerNetParams& other) const {
  if (m_raw != other.m_raw || m != other.m || rho != other.rho) return false;
  const auto mine = tensor_list(*this);
  const auto theirs = tensor_list(other);
  for (size_t i = 0; i < mine.size(); ++i) {
    if (!(*mine[i] == *theirs[i])) return false;
  }
  return true;
}

std::vector<Tensor*> tensor_list(PointerNetParams& params) {
  std::vector<Tensor*> out;
  params.for_each_tensor([&](const char*, Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> tensor_list(const PointerNetParams& params) {
  std::vector<const Tensor*> out;
  params.for_each_tensor([&](const char*, const Tensor& t) { out.push_back(&t); });
  return out;
}

void axpy_params(double scale, const PointerNetParams& g, PointerNetParams& acc) {
  const auto src = tensor_list(g);
  const auto dst = tensor_list(acc);
  if (src.size() != dst.size()) throw DataError("axpy_params: structure mismatch");
  for (size_t i = 0; i < src.size(); ++i) {
    if (src[i]->size() != dst[i]->size()) throw DataError("axpy_params: shape mismatch");
    axpy(scale, src[i]->view(), dst[i]->view());
  }
}

DropoutPlan make_dropout_plan(int n, int m, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw DataError("dropout: p must be in [0, 1)");
  DropoutPlan plan{Tensor({n, m}), Tensor({n, m})};
  const double keep = 1.0 / (1.0 - p);
  for (int64_t i = 0; i < plan.encoder_mask.size(); ++i) {
    plan.encoder_mask[i] = (rng.uniform() < p) ? 0.0 : keep;
  }
  for (int64_t i = 0; i < plan.decoder_mask.size(); ++i) {
    plan.decoder_mask[i] = (rng.uniform() < p) ? 0.0 : keep;
  }
  return plan;
}

Tensor project_features(const PointerNetParams& params, const RankingInstance& instance) {
  check_instance(params, instance);
  const int n = instance.n();
  if (!params.has_projection()) return instance.features;
  Tensor xt({n, params.m});
  for (int i = 0; i < n; ++i) {
    matvec_t_acc(params.input_projection, instance.features.row(i), xt.row(i));
  }
  return xt;
}

EncoderMemory encode(const PointerNetParams& params, const RankingInstance& instance,
                     const ModelOptions& options) {
  ForwardPass fp = run_forward(params, instance, DecodeMode::kGreedy, {}, nullptr, options,
                               nullptr);
  return std::move(fp.memory);
}

DecoderState decoder_initial_state(const PointerNetParams& params,
                                   const EncoderMemory& memory) {
  DecoderState st;
  st.h = memory.final_h;
  st.c = memory.final_c;
  st.next_input.assign(params.go.view().begin(), params.go.view().end());
  return st;
}

StepOutput decode_step(const PointerNetParams& params, const EncoderMemory& memory,
                       DecoderState& state, std::span<const char> excluded) {
  const int n = static_cast<int>(memory.states.dim(0));
  const int rho = params.rho;
  StepCache sc;
  sc.x = state.next_input;
  lstm_forward(params.decoder, sc.x, state.h, state.c, sc);
  state.h = sc.h;
  state.c = sc.c;

  std::vector<double> dpj(static_cast<size_t>(rho), 0.0);
  matvec_acc(params.w_dec, state.h, dpj);
  StepOutput out;
  out.scores.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto arow = memory.attn_proj.row(i);
    double s = 0.0;
    for (int k = 0; k < rho; ++k) {
      s += params.v[k] * std::tanh(arow[static_cast<size_t>(k)] + dpj[static_cast<size_t>(k)]);
    }
    out.scores[static_cast<size_t>(i)] = s;
  }
  out.probs = masked_softmax(out.scores, excluded);
  return out;
}

DecodeTrace decode_greedy(const PointerNetParams& params, const RankingInstance& instance,
                          const ModelOptions& options, const DropoutPlan* dropout) {
  return trace_from(
      run_forward(params, instance, DecodeMode::kGreedy, {}, nullptr, options, dropout));
}

DecodeTrace decode_sample(const PointerNetParams& params, const RankingInstance& instance,
                          Rng& rng, const ModelOptions& options, const DropoutPlan* dropout) {
  return trace_from(
      run_forward(params, instance, DecodeMode::kSample, {}, &rng, options, dropout));
}

std::vector<int> decode_onestep(const PointerNetParams& params,
                                const RankingInstance& instance,
                                const ModelOptions& options) {
  EncoderMemory memory = encode(params, instance, options);
  DecoderState state = decoder_initial_state(params, memory);
  StepOutput step = decode_step(params, memory, state, {});
  std::vector<int> order(static_cast<size_t>(instance.n()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return step.scores[static_cast<size_t>(a)] > step.scores[static_cast<size_t>(b)];
  });
  return order;
}

double log_prob_of(const PointerNetParams& params, const RankingInstance& instance,
                   std::span<const int> perm, const ModelOptions& options) {
  return run_forward(params, instance, DecodeMode::kFixed, perm, nullptr, options, nullptr)
      .log_prob;
}

DecodeTrace teacher_forced_trace(const PointerNetParams& params,
                                 const RankingInstance& instance,
                                 std::span<const int> perm, const ModelOptions& options) {
  return trace_from(
      run_forward(params, instance, DecodeMode::kFixed, perm, nullptr, options, nullptr));
}

TeacherForcedEval teacher_forced_grad(const PointerNetParams& params,
                                      const RankingInstance& instance,
                                      std::span<const int> perm, const LossConfig* loss,
                                      double logp_coeff, double loss_coeff,
                                      const ModelOptions& options,
                                      const DropoutPlan* dropout) {
  ForwardPass fp =
      run_forward(params, instance, DecodeMode::kFixed, perm, nullptr, options, dropout);
  const int n = instance.n();
  Tensor dscores({n, n});
  TeacherForcedEval eval;
  eval.log_prob = fp.log_prob;
  add_logprob_score_grads(fp, logp_coeff, dscores);
  if (loss != nullptr) {
    eval.seq_loss = add_loss_score_grads(fp, instance, *loss, loss_coeff, dscores);
  }
  eval.grad = backward(params, instance, fp, dscores, dropout);
  return eval;
}

LogProbGrad log_prob_and_grad(const PointerNetParams& params,
                              const RankingInstance& instance, std::span<const int> perm,
                              const ModelOptions& options) {
  TeacherForcedEval eval =
      teacher_forced_grad(params, instance, perm, nullptr, 1.0, 0.0, options, nullptr);
  return {eval.log_prob, std::move(eval.grad)};
}

SeqLossGrad sequence_loss_and_grad(const PointerNetParams& params,
                                   const RankingInstance& instance,
                                   std::span<const int> perm, const LossConfig& config,
                                   const ModelOptions& options) {
  TeacherForcedEval eval =
      teacher_forced_grad(params, instance, perm, &config, 0.0, 1.0, options, nullptr);
  return {eval.seq_loss, std::move(eval.grad)};
}

}  // namespace seq2slate
