#ifndef SEQ2SLATE_VERIFY_H_
#define SEQ2SLATE_VERIFY_H_

#include <span>
#include <string>
#include <vector>

namespace seq2slate {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

bool all_passed(std::span<const CheckResult> results);

/// Finite-difference verification of the analytic gradients: for
/// `num_seeds` random models (m_raw=4, m=4, rho=8, n=5), log-prob and
/// sequence-loss gradients (all three loss families, dcg weights) must
/// match central differences (eps=1e-5) within 1e-4 relative L2 error.
std::vector<CheckResult> run_gradient_suite(int num_seeds = 20);

/// Enumeration oracles: chain-rule normalization (sum over all n!
/// teacher-forced permutation probabilities equals 1) for n in 2..5, the
/// prefix-factorized expected loss against the naive sum over permutations,
/// and a Monte-Carlo cross-check of the expected loss on n=4.
std::vector<CheckResult> run_oracle_suite();

/// Estimator unbiasedness: Monte-Carlo means of the supervised and
/// REINFORCE batch gradients against enumerated exact gradients, plus the
/// baseline-invariance identity E[grad log p] = 0.
std::vector<CheckResult> run_estimator_suite();

}  // namespace seq2slate

#endif  // SEQ2SLATE_VERIFY_H_
