#include "seq2slate/verify.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "seq2slate/estimators.h"
#include "seq2slate/metrics.h"
#include "seq2slate/model.h"
#include "seq2slate/numerics.h"
#include "seq2slate/optim.h"

namespace seq2slate {

namespace {

RankingInstance random_instance(int n, int m_raw, Rng& rng) {
  RankingInstance inst;
  inst.features = Tensor({n, m_raw});
  for (int64_t i = 0; i < inst.features.size(); ++i) inst.features[i] = rng.uniform(-1.0, 1.0);
  inst.labels.resize(static_cast<size_t>(n));
  for (;;) {
    int pos = 0;
    for (int i = 0; i < n; ++i) {
      inst.labels[static_cast<size_t>(i)] = rng.uniform() < 0.5 ? 1 : 0;
      pos += inst.labels[static_cast<size_t>(i)];
    }
    if (n == 1 || (pos > 0 && pos < n)) break;  // keep both classes present
  }
  return inst;
}

std::vector<int> random_perm(int n, Rng& rng) {
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  return perm;
}

double rel_l2_error(std::span<const double> got, std::span<const double> want) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < got.size(); ++i) {
    const double d = got[i] - want[i];
    num += d * d;
    den += want[i] * want[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

CheckResult fd_check(const std::string& suite, const std::string& name,
                     const PointerNetParams& params, const RankingInstance& inst,
                     std::span<const int> perm, const LossConfig* loss) {
  constexpr double kEps = 1e-5;
  constexpr double kTol = 1e-4;
  std::vector<double> analytic;
  if (loss == nullptr) {
    analytic = log_prob_and_grad(params, inst, perm).grad.flatten();
  } else {
    analytic = sequence_loss_and_grad(params, inst, perm, *loss).grad.flatten();
  }
  PointerNetParams probe = params;
  const auto f = [&](std::span<const double> flat) {
    probe.unflatten(flat);
    if (loss == nullptr) return log_prob_of(probe, inst, perm);
    DecodeTrace tr = teacher_forced_trace(probe, inst, perm);
    return sequence_loss(tr.scores, inst.labels, perm, *loss);
  };
  const std::vector<double> flat = params.flatten();
  const std::vector<double> numeric = finite_difference_gradient(f, flat, kEps);
  const double err = rel_l2_error(analytic, numeric);
  return {suite, name, err < kTol, "rel_l2_err=" + fmt(err) + " tol=" + fmt(kTol)};
}

// Exact expectation helpers on small n by full permutation enumeration.
template <typename Fn>
void for_each_perm(int n, Fn&& fn) {
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  do {
    fn(std::span<const int>(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
}

}  // namespace

bool all_passed(std::span<const CheckResult> results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.pass; });
}

std::vector<CheckResult> run_gradient_suite(int num_seeds) {
  std::vector<CheckResult> out;
  const LossConfig families[] = {
      {LossFamily::kXent, 1.0, WeightScheme::dcg(), Policy::kSample, false},
      {LossFamily::kHinge, 1.0, WeightScheme::dcg(), Policy::kSample, false},
      {LossFamily::kSmoothHinge, 1.0, WeightScheme::dcg(), Policy::kSample, false},
  };
  for (int seed = 1; seed <= num_seeds; ++seed) {
    Rng rng(static_cast<uint64_t>(seed));
    PointerNetParams params = init_params(4, 4, 8, rng);
    RankingInstance inst = random_instance(5, 4, rng);
    std::vector<int> perm = random_perm(5, rng);
    out.push_back(fd_check("gradients", "log_prob seed=" + std::to_string(seed), params,
                           inst, perm, nullptr));
    for (const LossConfig& cfg : families) {
      out.push_back(fd_check("gradients",
                             to_string(cfg.family) + " seed=" + std::to_string(seed), params,
                             inst, perm, &cfg));
    }
  }
  return out;
}

std::vector<CheckResult> run_oracle_suite() {
  std::vector<CheckResult> out;

  // Chain-rule normalization: teacher-forced probabilities over all n!
  // permutations must sum to 1.
  for (int n = 2; n <= 5; ++n) {
    Rng rng(100 + static_cast<uint64_t>(n));
    PointerNetParams params = init_params(4, 4, 8, rng);
    RankingInstance inst = random_instance(n, 4, rng);
    double total = 0.0;
    for_each_perm(n, [&](std::span<const int> perm) {
      total += std::exp(log_prob_of(params, inst, perm));
    });
    const double err = std::abs(total - 1.0);
    out.push_back({"oracle", "chain_rule_normalization n=" + std::to_string(n), err <= 1e-8,
                   "sum=" + fmt(total) + " |err|=" + fmt(err)});
  }

  // Prefix-factorized expected loss against the naive sum over explicit
  // permutations.
  const LossConfig configs[] = {
      {LossFamily::kXent, 1.0, WeightScheme::dcg(), Policy::kSample, false},
      {LossFamily::kHinge, 1.0, WeightScheme::uniform(), Policy::kSample, false},
  };
  for (int n = 2; n <= 5; ++n) {
    for (const LossConfig& cfg : configs) {
      Rng rng(200 + static_cast<uint64_t>(n));
      PointerNetParams params = init_params(4, 4, 8, rng);
      RankingInstance inst = random_instance(n, 4, rng);
      const double factorized = expected_loss_enumerate(params, inst, cfg);
      double naive = 0.0;
      for_each_perm(n, [&](std::span<const int> perm) {
        DecodeTrace tr = teacher_forced_trace(params, inst, perm);
        naive += std::exp(tr.log_prob) * sequence_loss(tr.scores, inst.labels, perm, cfg);
      });
      const double err = std::abs(factorized - naive);
      out.push_back({"oracle",
                     "expected_loss_" + to_string(cfg.family) + " n=" + std::to_string(n),
                     err <= 1e-8,
                     "factorized=" + fmt(factorized) + " naive=" + fmt(naive)});
    }
  }

  // Monte-Carlo cross-check on n=4: the sample mean of sequence losses from
  // decode_sample must land within 3 standard errors of the enumerated
  // expectation.
  {
    Rng rng(301);
    PointerNetParams params = init_params(4, 4, 8, rng);
    RankingInstance inst = random_instance(4, 4, rng);
    const LossConfig cfg{LossFamily::kXent, 1.0, WeightScheme::uniform(), Policy::kSample,
                         false};
    const double exact = expected_loss_enumerate(params, inst, cfg);
    const int draws = 200000;
    double mean = 0.0, m2 = 0.0;
    for (int i = 1; i <= draws; ++i) {
      DecodeTrace tr = decode_sample(params, inst, rng);
      const double loss = sequence_loss(tr.scores, inst.labels, tr.perm, cfg);
      const double delta = loss - mean;
      mean += delta / i;
      m2 += delta * (loss - mean);
    }
    const double se = std::sqrt(m2 / (draws - 1)) / std::sqrt(static_cast<double>(draws));
    const double err = std::abs(mean - exact);
    out.push_back({"oracle", "expected_loss_monte_carlo n=4", err <= 3.0 * se,
                   "exact=" + fmt(exact) + " mc=" + fmt(mean) + " |err|=" + fmt(err) +
                       " 3se=" + fmt(3.0 * se)});
  }
  return out;
}

std::vector<CheckResult> run_estimator_suite() {
  std::vector<CheckResult> out;

  // Supervised estimator against the finite-difference gradient of the
  // enumerated expected loss (n=4, batch size 1, 200k draws, baseline set
  // to the exact expectation).
  {
    Rng rng(401);
    PointerNetParams params = init_params(4, 4, 8, rng);
    RankingInstance inst = random_instance(4, 4, rng);
    const LossConfig cfg{LossFamily::kXent, 1.0, WeightScheme::dcg(), Policy::kSample, false};
    const double exact_loss = expected_loss_enumerate(params, inst, cfg);

    PointerNetParams probe = params;
    const auto f = [&](std::span<const double> flat) {
      probe.unflatten(flat);
      return expected_loss_enumerate(probe, inst, cfg);
    };
    const std::vector<double> exact_grad =
        finite_difference_gradient(f, params.flatten(), 1e-5);

    const int draws = 200000;
    std::vector<double> mean(exact_grad.size(), 0.0);
    const RankingInstance batch[] = {inst};
    for (int i = 0; i < draws; ++i) {
      BatchGradient bg = supervised_gradient_batch(params, batch, cfg, exact_loss, 0.0, rng);
      const std::vector<double> flat = bg.grad.flatten();
      axpy(1.0, flat, mean);
    }
    for (double& v : mean) v /= draws;
    const double err = rel_l2_error(mean, exact_grad);
    out.push_back({"estimators", "supervised_unbiased n=4", err < 0.01,
                   "rel_l2_err=" + fmt(err) + " tol=0.01 draws=200000"});
  }

  // REINFORCE estimator against the enumerated gradient of E[NDCG@2]
  // (negated: the estimator returns the descent direction on -E[R]).
  {
    Rng rng(402);
    PointerNetParams params = init_params(4, 4, 8, rng);
    RankingInstance inst = random_instance(3, 4, rng);
    const RewardConfig reward{RewardConfig::Metric::kNdcgAtK, 2};

    PointerNetParams probe = params;
    const auto expected_reward = [&](std::span<const double> flat) {
      probe.unflatten(flat);
      double total = 0.0;
      for_each_perm(3, [&](std::span<const int> perm) {
        total += std::exp(log_prob_of(probe, inst, perm)) *
                 reward_for(perm, inst.labels, reward);
      });
      return total;
    };
    const double exact_r = expected_reward(params.flatten());
    std::vector<double> exact_grad =
        finite_difference_gradient(expected_reward, params.flatten(), 1e-5);
    for (double& v : exact_grad) v = -v;

    const int draws = 200000;
    std::vector<double> mean(exact_grad.size(), 0.0);
    const RankingInstance batch[] = {inst};
    for (int i = 0; i < draws; ++i) {
      BatchGradient bg = reinforce_gradient_batch(params, batch, reward, exact_r, rng);
      axpy(1.0, bg.grad.flatten(), mean);
    }
    for (double& v : mean) v /= draws;
    const double err = rel_l2_error(mean, exact_grad);
    out.push_back({"estimators", "reinforce_unbiased n=3", err < 0.01,
                   "rel_l2_err=" + fmt(err) + " tol=0.01 draws=200000"});
  }

  // Baseline invariance: sum over permutations of p(pi) * grad log p(pi)
  // is the zero vector, so any constant baseline leaves the expectation
  // unchanged.
  for (int n = 2; n <= 4; ++n) {
    Rng rng(500 + static_cast<uint64_t>(n));
    PointerNetParams params = init_params(4, 4, 8, rng);
    RankingInstance inst = random_instance(n, 4, rng);
    std::vector<double> acc(static_cast<size_t>(params.num_params()), 0.0);
    for_each_perm(n, [&](std::span<const int> perm) {
      LogProbGrad lpg = log_prob_and_grad(params, inst, perm);
      axpy(std::exp(lpg.log_prob), lpg.grad.flatten(), acc);
    });
    double max_abs = 0.0;
    for (double v : acc) max_abs = std::max(max_abs, std::abs(v));
    out.push_back({"estimators", "baseline_invariance n=" + std::to_string(n),
                   max_abs <= 1e-8, "max|E[grad log p]|=" + fmt(max_abs)});
  }
  return out;
}

}  // namespace seq2slate
