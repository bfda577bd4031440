#include <doctest.h>

#include <cmath>
#include <vector>

#include "seq2slate/clickgen.h"
#include "seq2slate/error.h"

using namespace seq2slate;

namespace {

RankingInstance graded_instance(std::vector<std::vector<double>> rows, std::vector<int> grades) {
  RankingInstance inst;
  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(rows[0].size());
  inst.features = Tensor({n, m});
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) inst.features.at(i, k) = rows[static_cast<size_t>(i)][static_cast<size_t>(k)];
  }
  inst.grades = std::move(grades);
  inst.labels.assign(static_cast<size_t>(n), 0);
  return inst;
}

}  // namespace

TEST_CASE("similarity_threshold") {
  SUBCASE("identical items give zero") {
    RankingInstance inst = graded_instance({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}}, {0, 0, 0});
    CHECK(similarity_threshold(inst.features, 0.5) == 0.0);
  }
  SUBCASE("two items: the single distance for any q") {
    RankingInstance inst = graded_instance({{0.0, 0.0}, {2.0, 0.0}}, {0, 0});
    for (double q : {0.1, 0.5, 1.0}) {
      CHECK(similarity_threshold(inst.features, q) == doctest::Approx(2.0).epsilon(1e-12));
    }
  }
  SUBCASE("linear interpolation between order statistics") {
    // Distances from item 0 along a line: {1,2,3,4} plus {1,2,3} ... use a
    // 1-D arrangement where pairwise distances are {1,2,3,1,2,1} sorted ->
    // {1,1,1,2,2,3}; q=0.5 -> position 2.5 -> 1.5.
    RankingInstance inst = graded_instance({{0.0}, {1.0}, {2.0}, {3.0}}, {0, 0, 0, 0});
    CHECK(similarity_threshold(inst.features, 0.5) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(similarity_threshold(inst.features, 1.0) == doctest::Approx(3.0).epsilon(1e-12));
    // 3-4-5 triangle: distances {3,4,5}; q=0.25 interpolates to 3.5.
    RankingInstance tri =
        graded_instance({{0.0, 0.0}, {3.0, 0.0}, {3.0, 4.0}}, {0, 0, 0});
    CHECK(similarity_threshold(tri.features, 0.25) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(similarity_threshold(tri.features, 0.5) == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("single item is an error") {
    RankingInstance inst = graded_instance({{1.0}}, {0});
    CHECK_THROWS_AS(similarity_threshold(inst.features, 0.5), DataError);
  }
}

TEST_CASE("simulate_clicks") {
  SUBCASE("threshold rule only (mode none, eta 0)") {
    RankingInstance inst = graded_instance({{0.0}, {1.0}, {2.0}}, {3, 0, 2});
    CascadeConfig cfg;
    cfg.mode = CascadeConfig::Mode::kNone;
    cfg.eta = 0.0;
    Rng rng(1);
    CHECK(simulate_clicks(inst, cfg, rng) == std::vector<int>{1, 0, 1});
  }
  SUBCASE("diverse mode suppresses the identical second relevant item") {
    RankingInstance inst = graded_instance({{1.0, 1.0}, {1.0, 1.0}}, {3, 3});
    CascadeConfig cfg;
    cfg.mode = CascadeConfig::Mode::kDiverse;
    cfg.eta = 0.0;
    Rng rng(2);
    CHECK(simulate_clicks(inst, cfg, rng) == std::vector<int>{1, 0});
  }
  SUBCASE("huge eta observes only the top item") {
    RankingInstance inst = graded_instance({{0.0}, {5.0}, {9.0}}, {4, 4, 4});
    CascadeConfig cfg;
    cfg.mode = CascadeConfig::Mode::kNone;
    cfg.eta = 1e9;
    Rng rng(3);
    CHECK(simulate_clicks(inst, cfg, rng) == std::vector<int>{1, 0, 0});
  }
  SUBCASE("similar mode adds irrelevant items near clicked ones") {
    // Item 0 relevant; item 1 irrelevant but identical to item 0; item 2
    // irrelevant and far away. Distances {0, 100, 100} with q=0.25 put the
    // threshold at 50: item 1 is within it, item 2 beyond it.
    RankingInstance inst = graded_instance({{0.0}, {0.0}, {100.0}}, {4, 0, 0});
    CascadeConfig cfg;
    cfg.mode = CascadeConfig::Mode::kSimilar;
    cfg.eta = 0.0;
    cfg.q = 0.25;
    CHECK(similarity_threshold(inst.features, cfg.q) == doctest::Approx(50.0).epsilon(1e-12));
    Rng rng(4);
    CHECK(simulate_clicks(inst, cfg, rng) == std::vector<int>{1, 1, 0});
  }
  SUBCASE("missing grades are an error") {
    RankingInstance inst = graded_instance({{0.0}}, {1});
    inst.grades.clear();
    CascadeConfig cfg;
    Rng rng(5);
    CHECK_THROWS_AS(simulate_clicks(inst, cfg, rng), DataError);
  }
}

TEST_CASE("mode ordering under coupled draws") {
  // Only observation draws consume randomness, so equal seeds couple runs:
  // diverse removes clicks from `none`, similar adds clicks to it.
  Rng data_rng(6);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(data_rng.below(6));
    std::vector<std::vector<double>> rows;
    std::vector<int> grades;
    for (int i = 0; i < n; ++i) {
      rows.push_back({data_rng.uniform(-1, 1), data_rng.uniform(-1, 1)});
      grades.push_back(static_cast<int>(data_rng.below(5)));
    }
    RankingInstance inst = graded_instance(rows, grades);
    CascadeConfig cfg;
    cfg.eta = 0.3;
    const uint64_t seed = 1000 + static_cast<uint64_t>(trial);

    cfg.mode = CascadeConfig::Mode::kNone;
    Rng r1(seed);
    auto none = simulate_clicks(inst, cfg, r1);
    cfg.mode = CascadeConfig::Mode::kDiverse;
    Rng r2(seed);
    auto diverse = simulate_clicks(inst, cfg, r2);
    cfg.mode = CascadeConfig::Mode::kSimilar;
    Rng r3(seed);
    auto similar = simulate_clicks(inst, cfg, r3);

    int c_none = 0, c_div = 0, c_sim = 0;
    for (int i = 0; i < n; ++i) {
      c_none += none[static_cast<size_t>(i)];
      c_div += diverse[static_cast<size_t>(i)];
      c_sim += similar[static_cast<size_t>(i)];
    }
    CHECK(c_div <= c_none);
    CHECK(c_sim >= c_none);
  }
}

TEST_CASE("eta monotonicity under coupled draws") {
  Rng data_rng(7);
  RankingInstance inst = graded_instance(
      {{0.1}, {0.4}, {-0.3}, {0.9}, {-0.8}, {0.2}}, {4, 3, 2, 4, 3, 2});
  CascadeConfig cfg;
  cfg.mode = CascadeConfig::Mode::kNone;
  int prev_clicks = 6;
  for (double eta : {0.0, 0.3, 1.0, 3.0}) {
    cfg.eta = eta;
    Rng rng(99);
    auto y = simulate_clicks(inst, cfg, rng);
    int clicks = 0;
    for (int v : y) clicks += v;
    CHECK(clicks <= prev_clicks);
    prev_clicks = clicks;
  }
}

TEST_CASE("generate_clicks") {
  SUBCASE("empty input") {
    std::vector<RankingInstance> empty;
    CascadeConfig cfg;
    Rng rng(8);
    ClickStats stats = generate_clicks(empty, cfg, rng);
    CHECK(stats.num_queries == 0);
    CHECK(stats.zero_click_fraction() == 0.0);
  }
  SUBCASE("zero-click fraction matches a hand count") {
    // Ten single-relevance queries: those graded 0 never click under mode
    // none; grades 2..4 always do (eta 0).
    std::vector<RankingInstance> data;
    for (int q = 0; q < 10; ++q) {
      RankingInstance inst = graded_instance({{0.0}, {1.0}}, {q < 4 ? 0 : 3, 0});
      inst.query_id = "q" + std::to_string(q);
      data.push_back(inst);
    }
    CascadeConfig cfg;
    cfg.mode = CascadeConfig::Mode::kNone;
    cfg.eta = 0.0;
    Rng rng(9);
    ClickStats stats = generate_clicks(data, cfg, rng);
    CHECK(stats.zero_click_queries == 4);
    CHECK(stats.zero_click_fraction() == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(stats.num_clicks == 6);
    for (const auto& inst : data) CHECK(inst.labels.size() == 2);
  }
  SUBCASE("same seed reproduces the dataset") {
    std::vector<RankingInstance> a, b;
    Rng data_rng(10);
    for (int q = 0; q < 5; ++q) {
      RankingInstance inst = graded_instance(
          {{data_rng.uniform(-1, 1)}, {data_rng.uniform(-1, 1)}, {data_rng.uniform(-1, 1)}},
          {3, 1, 2});
      a.push_back(inst);
      b.push_back(inst);
    }
    CascadeConfig cfg;
    cfg.eta = 0.5;
    Rng r1(42), r2(42);
    generate_clicks(a, cfg, r1);
    generate_clicks(b, cfg, r2);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].labels == b[i].labels);
  }
}
