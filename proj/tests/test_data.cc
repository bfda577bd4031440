#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "seq2slate/data.h"
#include "seq2slate/error.h"

using namespace seq2slate;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "s2sl_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("parse_letor") {
  SUBCASE("sparse features pad to the dataset max id") {
    auto queries = parse_letor_text("2 qid:1 1:0.5 3:1.0\n");
    REQUIRE(queries.size() == 1);
    CHECK(queries[0].grades == std::vector<int>{2});
    CHECK(queries[0].features.dim(1) == 3);
    CHECK(queries[0].features.at(0, 0) == 0.5);
    CHECK(queries[0].features.at(0, 1) == 0.0);
    CHECK(queries[0].features.at(0, 2) == 1.0);
  }
  SUBCASE("empty stream") {
    CHECK(parse_letor_text("").empty());
    CHECK(parse_letor_text("\n\n").empty());
  }
  SUBCASE("grouping by qid keeps file order") {
    auto queries = parse_letor_text(
        "1 qid:a 1:1.0 # first\n"
        "0 qid:b 1:2.0\n"
        "2 qid:a 1:3.0\n");
    REQUIRE(queries.size() == 2);
    CHECK(queries[0].query_id == "a");
    CHECK(queries[0].n() == 2);
    CHECK(queries[0].grades == std::vector<int>{1, 2});
    CHECK(queries[0].features.at(1, 0) == 3.0);
    CHECK(queries[1].query_id == "b");
    CHECK(queries[1].n() == 1);
  }
  SUBCASE("malformed lines carry the line number") {
    try {
      parse_letor_text("1 qid:a 1:1.0\nbogus line\n");
      CHECK(false);
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_letor_text("1 nofqid 1:1.0\n"), DataError);
    CHECK_THROWS_AS(parse_letor_text("1 qid:a 0:1.0\n"), DataError);
    CHECK_THROWS_AS(parse_letor_text("1 qid:a 1:abc\n"), DataError);
  }
  SUBCASE("round trip through serialize") {
    const std::string text =
        "2 qid:q1 1:0.25 2:-1.5\n"
        "0 qid:q1 1:0.125 2:3.25\n"
        "1 qid:q2 1:7 2:0.001953125\n";
    auto first = parse_letor_text(text);
    auto path = temp_file("roundtrip.txt");
    write_letor(first, path.string());
    auto second = parse_letor(path.string());
    REQUIRE(first.size() == second.size());
    for (size_t q = 0; q < first.size(); ++q) {
      CHECK(first[q].query_id == second[q].query_id);
      CHECK(first[q].grades == second[q].grades);
      CHECK(first[q].features == second[q].features);
    }
  }
  SUBCASE("gzip-compressed input is detected by magic bytes") {
    const std::string text = "3 qid:z 1:1.5\n1 qid:z 1:-2.5\n";
    auto plain = temp_file("plain.txt");
    write_text(plain, text);
    auto gz = temp_file("data.txt.gz");
    gzFile f = gzopen(gz.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
    auto a = parse_letor(plain.string());
    auto b = parse_letor(gz.string());
    REQUIRE(a.size() == b.size());
    CHECK(a[0].features == b[0].features);
    CHECK(a[0].grades == b[0].grades);
  }
}

TEST_CASE("order_by_base") {
  RawQuery q;
  q.query_id = "q";
  q.features = Tensor({3, 1});
  q.features.at(0, 0) = 10.0;
  q.features.at(1, 0) = 20.0;
  q.features.at(2, 0) = 30.0;
  q.grades = {0, 1, 2};

  SUBCASE("sorts by score descending") {
    const double scores[] = {1.0, 3.0, 2.0};
    RankingInstance inst = order_by_base(q, scores);
    CHECK(inst.grades == std::vector<int>{1, 2, 0});
    CHECK(inst.features.at(0, 0) == 20.0);
    CHECK(inst.features.at(2, 0) == 10.0);
  }
  SUBCASE("equal scores preserve the original order") {
    const double scores[] = {1.0, 1.0, 1.0};
    RankingInstance inst = order_by_base(q, scores);
    CHECK(inst.grades == std::vector<int>{0, 1, 2});
  }
  SUBCASE("single item unchanged") {
    RawQuery one;
    one.features = Tensor({1, 1});
    one.grades = {3};
    const double scores[] = {0.5};
    CHECK(order_by_base(one, scores).grades == std::vector<int>{3});
  }
  SUBCASE("length mismatch is an error") {
    const double scores[] = {1.0, 2.0};
    CHECK_THROWS_AS(order_by_base(q, scores), DataError);
  }
}

TEST_CASE("shuffle_augment") {
  Rng rng(101);
  RankingInstance inst;
  inst.features = Tensor({4, 2});
  for (int i = 0; i < 4; ++i) {
    inst.features.at(i, 0) = i;
    inst.features.at(i, 1) = 10.0 * i;
  }
  inst.labels = {1, 0, 0, 1};
  inst.grades = {4, 0, 1, 3};

  SUBCASE("copy count") {
    CHECK(shuffle_augment(inst, 10, rng).size() == 10);
  }
  SUBCASE("feature-label pairing survives shuffling") {
    for (const RankingInstance& copy : shuffle_augment(inst, 20, rng)) {
      std::multiset<int> labels(copy.labels.begin(), copy.labels.end());
      CHECK(labels == std::multiset<int>{0, 0, 1, 1});
      for (int i = 0; i < 4; ++i) {
        const int orig = static_cast<int>(copy.features.at(i, 0));
        CHECK(copy.features.at(i, 1) == 10.0 * orig);
        CHECK(copy.labels[static_cast<size_t>(i)] == inst.labels[static_cast<size_t>(orig)]);
        CHECK(copy.grades[static_cast<size_t>(i)] == inst.grades[static_cast<size_t>(orig)]);
      }
    }
  }
  SUBCASE("single item copies are identical") {
    RankingInstance one;
    one.features = Tensor({1, 2});
    one.labels = {1};
    for (const RankingInstance& copy : shuffle_augment(one, 3, rng)) {
      CHECK(copy.features == one.features);
      CHECK(copy.labels == one.labels);
    }
  }
}

TEST_CASE("synth_queries") {
  SynthConfig cfg;
  cfg.num_queries = 50;
  cfg.items_per_query = 9;
  cfg.feature_dim = 6;
  cfg.num_clusters = 3;

  SUBCASE("zero noise makes same-cluster items identical") {
    SynthConfig exact = cfg;
    exact.noise_sigma = 0.0;
    Rng rng(102);
    auto queries = synth_queries(exact, rng);
    const RawQuery& q = queries[0];
    // items i and i+num_clusters share a cluster
    for (int k = 0; k < exact.feature_dim; ++k) {
      CHECK(q.features.at(0, k) == q.features.at(3, k));
      CHECK(q.features.at(1, k) == q.features.at(4, k));
    }
  }
  SUBCASE("both grade bands are populated") {
    SynthConfig big = cfg;
    big.num_queries = 1000;
    Rng rng(103);
    auto queries = synth_queries(big, rng);
    int relevant = 0, irrelevant = 0;
    for (const RawQuery& q : queries) {
      for (int g : q.grades) (g >= 2 ? relevant : irrelevant) += 1;
    }
    CHECK(relevant > 0);
    CHECK(irrelevant > 0);
  }
  SUBCASE("same seed reproduces the dataset") {
    Rng r1(104), r2(104);
    auto a = synth_queries(cfg, r1);
    auto b = synth_queries(cfg, r2);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].features == b[i].features);
      CHECK(a[i].grades == b[i].grades);
    }
  }
}

TEST_CASE("linear ranker recovers a planted direction") {
  // Features in R^2, grade = round(3 * x0) clipped: the fitted ranker must
  // order items by x0.
  std::vector<RawQuery> queries;
  Rng rng(105);
  for (int qi = 0; qi < 200; ++qi) {
    RawQuery q;
    q.query_id = "q" + std::to_string(qi);
    q.features = Tensor({4, 2});
    q.grades.resize(4);
    for (int i = 0; i < 4; ++i) {
      const double x0 = rng.uniform(0.0, 1.0);
      q.features.at(i, 0) = x0;
      q.features.at(i, 1) = rng.uniform(-1.0, 1.0);
      q.grades[static_cast<size_t>(i)] = std::min(4, static_cast<int>(x0 * 5.0));
    }
    queries.push_back(std::move(q));
  }
  LinearRanker ranker = fit_linear_ranker(queries);
  CHECK(ranker.weights[0] > 10.0 * std::abs(ranker.weights[1]));
  auto scores = score_query(ranker, queries[0]);
  CHECK(scores.size() == 4);
}

TEST_CASE("feature normalization") {
  std::vector<RankingInstance> train(2), test(1);
  train[0].features = Tensor({2, 2});
  train[0].features.at(0, 0) = 1.0;
  train[0].features.at(1, 0) = 3.0;
  train[0].features.at(0, 1) = 5.0;  // constant dimension
  train[0].features.at(1, 1) = 5.0;
  train[0].labels = {0, 0};
  train[1] = train[0];
  test[0] = train[0];

  FeatureStats stats = compute_feature_stats(train);
  SUBCASE("constant features collapse to zero via the stddev floor") {
    apply_feature_stats(train, stats);
    CHECK(train[0].features.at(0, 1) == 0.0);
    CHECK(train[0].features.at(1, 1) == 0.0);
    double mean0 = (train[0].features.at(0, 0) + train[0].features.at(1, 0) +
                    train[1].features.at(0, 0) + train[1].features.at(1, 0)) /
                   4.0;
    CHECK(std::abs(mean0) < 1e-9);
  }
  SUBCASE("test split uses training statistics") {
    apply_feature_stats(test, stats);
    // (1 - 2) / 1 and (3 - 2) / 1 with train mean 2, stddev 1
    CHECK(test[0].features.at(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(test[0].features.at(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("split_by_query_hash") {
  std::vector<RankingInstance> data(1000);
  for (int i = 0; i < 1000; ++i) {
    data[static_cast<size_t>(i)].query_id = "query" + std::to_string(i);
  }
  SplitIndices split = split_by_query_hash(data, 7);
  CHECK(split.train.size() + split.valid.size() + split.test.size() == 1000);
  CHECK(split.train.size() > 700);
  CHECK(split.valid.size() > 40);
  CHECK(split.test.size() > 40);
  SplitIndices again = split_by_query_hash(data, 7);
  CHECK(split.train == again.train);
  SplitIndices other = split_by_query_hash(data, 8);
  CHECK(split.train != other.train);
}

TEST_CASE("as_click_dataset validates binary labels") {
  RawQuery q;
  q.query_id = "c";
  q.features = Tensor({2, 1});
  q.grades = {1, 0};
  auto ds = as_click_dataset(std::vector<RawQuery>{q});
  CHECK(ds[0].labels == std::vector<int>{1, 0});
  q.grades = {2, 0};
  CHECK_THROWS_AS(as_click_dataset(std::vector<RawQuery>{q}), DataError);
}
