#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "seq2slate/metrics.h"
#include "seq2slate/optim.h"

using namespace seq2slate;

namespace {

// Independent naive references, written from the metric definitions.
double naive_ap(const std::vector<int>& perm, const std::vector<int>& y) {
  std::vector<int> ranked;
  for (int item : perm) ranked.push_back(y[static_cast<size_t>(item)]);
  double sum = 0.0;
  int pos = 0, seen = 0;
  for (size_t r = 0; r < ranked.size(); ++r) {
    if (ranked[r] == 1) {
      ++seen;
      sum += static_cast<double>(seen) / static_cast<double>(r + 1);
    }
  }
  for (int v : y) pos += v;
  return sum / pos;
}

double naive_ndcg(const std::vector<int>& perm, const std::vector<int>& y, int k) {
  double dcg = 0.0;
  for (int j = 0; j < std::min<int>(k, static_cast<int>(perm.size())); ++j) {
    dcg += y[static_cast<size_t>(perm[static_cast<size_t>(j)])] /
           std::log2(static_cast<double>(j + 2));
  }
  int pos = 0;
  for (int v : y) pos += v;
  double ideal = 0.0;
  for (int j = 0; j < std::min<int>(k, pos); ++j) ideal += 1.0 / std::log2(static_cast<double>(j + 2));
  return dcg / ideal;
}

}  // namespace

TEST_CASE("map_score") {
  SUBCASE("all positives first") {
    const int perm[] = {0, 1, 2, 3};
    const int y[] = {1, 1, 0, 0};
    CHECK(map_score(perm, y).value() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("ranked labels 1,0,1") {
    const int perm[] = {0, 1, 2};
    const int y[] = {1, 0, 1};
    CHECK(map_score(perm, y).value() == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
  }
  SUBCASE("single positive item") {
    const int perm[] = {0};
    const int y[] = {1};
    CHECK(map_score(perm, y).value() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("zero positives skip") {
    const int perm[] = {0, 1};
    const int y[] = {0, 0};
    CHECK(!map_score(perm, y).has_value());
  }
}

TEST_CASE("ndcg_at_k") {
  SUBCASE("perfect ranking") {
    const int perm[] = {1, 0, 2};
    const int y[] = {0, 1, 0};
    CHECK(ndcg_at_k(perm, y, 3).value() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("ranked labels 1,0,1 at k=2") {
    const int perm[] = {0, 1, 2};
    const int y[] = {1, 0, 1};
    const double ideal = 1.0 + 1.0 / std::log2(3.0);
    CHECK(ndcg_at_k(perm, y, 2).value() == doctest::Approx(1.0 / ideal).epsilon(1e-10));
    CHECK(ndcg_at_k(perm, y, 2).value() == doctest::Approx(0.6131).epsilon(1e-4));
  }
  SUBCASE("k beyond n is full NDCG") {
    const int perm[] = {2, 0, 1};
    const int y[] = {1, 0, 1};
    CHECK(ndcg_at_k(perm, y, 100).value() == ndcg_at_k(perm, y, 3).value());
  }
}

TEST_CASE("rank_gain") {
  SUBCASE("identity permutation") {
    const int perm[] = {0, 1, 2, 3};
    const int y[] = {0, 1, 1, 0};
    CHECK(rank_gain(perm, y) == 0.0);
  }
  SUBCASE("sole positive moved from base rank 3 to rank 1") {
    const int perm[] = {2, 0, 1};
    const int y[] = {0, 0, 1};
    CHECK(rank_gain(perm, y) == 2.0);
  }
  SUBCASE("reversal pushes the top positive to the bottom") {
    const int perm[] = {3, 2, 1, 0};
    const int y[] = {1, 0, 0, 0};
    CHECK(rank_gain(perm, y) == -3.0);
  }
  SUBCASE("single-positive antisymmetry") {
    const int fwd[] = {2, 0, 1};
    const int y[] = {0, 0, 1};
    // Applying a permutation and then ranking back to base cancels out.
    std::vector<int> inverse(3);
    for (int j = 0; j < 3; ++j) inverse[static_cast<size_t>(fwd[j])] = j;
    std::vector<int> label_after(3);
    for (int j = 0; j < 3; ++j) label_after[static_cast<size_t>(j)] = y[fwd[j]];
    CHECK(rank_gain(fwd, y) + rank_gain(inverse, label_after) == 0.0);
  }
}

TEST_CASE("metrics match a naive reference on random cases") {
  Rng rng(90);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(9));
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<int> y(static_cast<size_t>(n));
    int pos = 0;
    for (int& v : y) pos += (v = rng.uniform() < 0.4 ? 1 : 0);
    if (pos == 0) y[static_cast<size_t>(rng.below(static_cast<uint64_t>(n)))] = 1;
    const int k = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(n)));
    CHECK(map_score(perm, y).value() == doctest::Approx(naive_ap(perm, y)).epsilon(1e-12));
    CHECK(ndcg_at_k(perm, y, k).value() == doctest::Approx(naive_ndcg(perm, y, k)).epsilon(1e-12));
  }
}

TEST_CASE("upward swap of a positive never hurts") {
  Rng rng(91);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(5));
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<int> y(static_cast<size_t>(n), 0);
    y[0] = 1;
    y[static_cast<size_t>(n - 1)] = 1;
    // find a negative ranked above a positive and swap them
    for (int a = 0; a + 1 < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (y[static_cast<size_t>(perm[static_cast<size_t>(a)])] == 0 &&
            y[static_cast<size_t>(perm[static_cast<size_t>(b)])] == 1) {
          std::vector<int> swapped = perm;
          std::swap(swapped[static_cast<size_t>(a)], swapped[static_cast<size_t>(b)]);
          CHECK(map_score(swapped, y).value() >= map_score(perm, y).value() - 1e-12);
          CHECK(ndcg_at_k(swapped, y, n).value() >= ndcg_at_k(perm, y, n).value() - 1e-12);
          CHECK(rank_gain(swapped, y) >= rank_gain(perm, y));
        }
      }
    }
  }
}

TEST_CASE("evaluate") {
  Rng rng(92);
  PointerNetParams p = init_params(3, 3, 4, rng);
  std::vector<RankingInstance> data;
  for (int q = 0; q < 5; ++q) {
    RankingInstance inst;
    inst.features = Tensor({4, 3});
    for (int64_t i = 0; i < inst.features.size(); ++i) inst.features[i] = rng.uniform(-1.0, 1.0);
    inst.labels = {0, 1, 0, q == 0 ? 1 : 0};
    inst.query_id = "q" + std::to_string(q);
    data.push_back(std::move(inst));
  }
  const int ks[] = {2, 10};

  SUBCASE("no-op decoder has zero rank gain") {
    MetricsReport report = evaluate(p, data, ks, EvalDecoder::kNoop);
    CHECK(report.rank_gain == 0.0);
    CHECK(report.num_queries == 5);
    CHECK(report.zero_click_fraction == 0.0);
  }
  SUBCASE("single query dataset reports that query's metrics") {
    std::vector<RankingInstance> one(data.begin(), data.begin() + 1);
    MetricsReport report = evaluate(p, one, ks);
    DecodeTrace tr = decode_greedy(p, one[0]);
    CHECK(report.map == doctest::Approx(map_score(tr.perm, one[0].labels).value()).epsilon(1e-12));
    CHECK(report.ndcg.at(2) ==
          doctest::Approx(ndcg_at_k(tr.perm, one[0].labels, 2).value()).epsilon(1e-12));
  }
  SUBCASE("zero-positive queries are excluded from means but counted") {
    std::vector<RankingInstance> with_empty = data;
    with_empty[2].labels = {0, 0, 0, 0};
    MetricsReport report = evaluate(p, with_empty, ks, EvalDecoder::kNoop);
    CHECK(report.zero_click_fraction == doctest::Approx(0.2).epsilon(1e-12));
    MetricsReport skipped = evaluate(
        p, std::vector<RankingInstance>{with_empty[0], with_empty[1], with_empty[3], with_empty[4]},
        ks, EvalDecoder::kNoop);
    CHECK(report.map == doctest::Approx(skipped.map).epsilon(1e-12));
  }
}
