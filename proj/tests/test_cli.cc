// Integration tests that drive the s2sl binary end to end. The binary path
// comes from the S2SL_BIN environment variable (set by ctest).

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "seq2slate/clickgen.h"
#include "seq2slate/data.h"
#include "seq2slate/rng.h"

using namespace seq2slate;

namespace {

namespace fs = std::filesystem;

std::string binary() {
  const char* env = std::getenv("S2SL_BIN");
  REQUIRE_MESSAGE(env != nullptr, "S2SL_BIN must point at the s2sl binary");
  return env;
}

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "s2sl_cli_test";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = binary() + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Small synthetic LETOR fixture with planted structure.
fs::path fixture_letor(const std::string& name, int queries, uint64_t seed) {
  Rng rng(seed);
  SynthConfig cfg;
  cfg.num_queries = queries;
  cfg.items_per_query = 5;
  cfg.feature_dim = 4;
  cfg.num_clusters = 2;
  auto data = synth_queries(cfg, rng);
  auto path = work_dir() / name;
  write_letor(data, path.string());
  return path;
}

}  // namespace

TEST_CASE("cli usage errors exit 1") {
  CHECK(run("") == 1);
  CHECK(run("bogus-subcommand") == 1);
  CHECK(run("simulate") == 1);  // missing required --input
}

TEST_CASE("cli simulate") {
  auto raw = fixture_letor("raw.txt", 20, 1);
  auto wd = work_dir();

  SUBCASE("deterministic output and sane stats") {
    auto out1 = wd / "clicks1.txt";
    auto out2 = wd / "clicks2.txt";
    CHECK(run("simulate --input " + raw.string() + " --mode diverse --eta 0 --q 0.5 --seed 9 --output " + out1.string()) == 0);
    CHECK(run("simulate --input " + raw.string() + " --mode diverse --eta 0 --q 0.5 --seed 9 --output " + out2.string()) == 0);
    CHECK(slurp(out1) == slurp(out2));
    CHECK(fs::exists(out1.string() + ".stats.tsv"));
  }
  SUBCASE("diverse produces no more clicks than none on the same seed") {
    auto none_out = wd / "clicks_none.txt";
    auto div_out = wd / "clicks_div.txt";
    CHECK(run("simulate --input " + raw.string() + " --mode none --eta 0.2 --seed 11 --output " + none_out.string()) == 0);
    CHECK(run("simulate --input " + raw.string() + " --mode diverse --eta 0.2 --seed 11 --output " + div_out.string()) == 0);
    auto count_clicks = [](const fs::path& p) {
      std::ifstream in(p);
      std::string line;
      int c = 0;
      while (std::getline(in, line)) c += (line.rfind("1 ", 0) == 0);
      return c;
    };
    CHECK(count_clicks(div_out) <= count_clicks(none_out));
  }
  SUBCASE("all-irrelevant fixture yields zero clicks under mode none") {
    auto path = wd / "irrelevant.txt";
    std::ofstream out(path);
    out << "0 qid:a 1:1.0 2:0.0\n1 qid:a 1:0.0 2:1.0\n0 qid:b 1:0.5 2:0.5\n1 qid:b 1:0.25 2:0.5\n";
    out.close();
    auto clicks = wd / "irrelevant_clicks.txt";
    CHECK(run("simulate --input " + path.string() + " --mode none --eta 0 --output " + clicks.string()) == 0);
    std::ifstream in(clicks);
    std::string line;
    while (std::getline(in, line)) CHECK(line.rfind("0 ", 0) == 0);
  }
  SUBCASE("missing input exits 2") {
    CHECK(run("simulate --input /nonexistent.txt --output " + (wd / "x.txt").string()) == 2);
  }
}

TEST_CASE("cli train, eval, rerank") {
  auto wd = work_dir();
  auto raw = fixture_letor("raw_train.txt", 24, 2);
  auto clicks = wd / "train_clicks.txt";
  REQUIRE(run("simulate --input " + raw.string() + " --mode diverse --eta 0 --seed 3 --output " + clicks.string()) == 0);
  auto ckpt = wd / "model.s2sl";
  REQUIRE(run("train --data " + clicks.string() +
              " --steps 10 --batch-size 6 --hidden-size 6 --seed 5 --eval-every 5 --output " +
              ckpt.string()) == 0);
  REQUIRE(fs::exists(ckpt));
  REQUIRE(fs::exists(ckpt.string() + ".log.tsv"));

  SUBCASE("training log has the documented columns") {
    std::ifstream log(ckpt.string() + ".log.tsv");
    std::string header;
    std::getline(log, header);
    CHECK(header == "step\tobjective_value\tlr\tbaseline\twallclock_ms");
    int rows = 0;
    std::string line;
    while (std::getline(log, line)) ++rows;
    CHECK(rows == 10);
  }
  SUBCASE("eval prints the report and noop has zero rank gain") {
    auto table = wd / "eval.tsv";
    CHECK(std::system((binary() + " eval --data " + clicks.string() + " --checkpoint " +
                       ckpt.string() + " --decoder noop --ks 5 > " + table.string() +
                       " 2>/dev/null")
                          .c_str()) == 0);
    const std::string text = slurp(table);
    CHECK(text.find("rank_gain\t-\t0.000000") != std::string::npos);
    CHECK(text.find("ndcg\t5\t") != std::string::npos);
  }
  SUBCASE("eval rejects mismatched dimensions with exit 2") {
    auto other = fixture_letor("raw_wide.txt", 4, 6);
    // raw_wide has feature_dim 4 as well; widen it by writing a 6-dim file
    auto wide = wd / "wide.txt";
    std::ofstream out(wide);
    out << "1 qid:w 1:1 2:2 3:3 4:4 5:5 6:6\n0 qid:w 1:0 2:0 3:1 4:0 5:0 6:1\n";
    out.close();
    CHECK(run("eval --data " + wide.string() + " --checkpoint " + ckpt.string()) == 2);
  }
  SUBCASE("rerank emits 1-based permutations deterministically") {
    auto out1 = wd / "rr1.txt";
    auto out2 = wd / "rr2.txt";
    CHECK(run("rerank --checkpoint " + ckpt.string() + " --input " + clicks.string() +
              " --output " + out1.string()) == 0);
    CHECK(run("rerank --checkpoint " + ckpt.string() + " --input " + clicks.string() +
              " --output " + out2.string()) == 0);
    CHECK(slurp(out1) == slurp(out2));
    std::ifstream in(out1);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
      ++lines;
      std::istringstream ss(line);
      std::string qid;
      ss >> qid;
      CHECK(qid.back() == ':');
      std::vector<bool> seen(5, false);
      int pos, count = 0;
      while (ss >> pos) {
        CHECK(pos >= 1);
        CHECK(pos <= 5);
        CHECK(!seen[static_cast<size_t>(pos - 1)]);
        seen[static_cast<size_t>(pos - 1)] = true;
        ++count;
      }
      CHECK(count == 5);
    }
    CHECK(lines == 24);
  }
  SUBCASE("single-item query reranks to position 1") {
    auto single = wd / "single.txt";
    std::ofstream out(single);
    out << "1 qid:s 1:0.5 2:0.25 3:0.125 4:1\n";
    out.close();
    auto rr = wd / "rr_single.txt";
    CHECK(run("rerank --checkpoint " + ckpt.string() + " --input " + single.string() +
              " --output " + rr.string()) == 0);
    CHECK(slurp(rr) == "s: 1\n");
  }
  SUBCASE("config file values are used and unknown keys rejected") {
    auto cfg_path = wd / "train.cfg";
    std::ofstream cfg(cfg_path);
    cfg << "# comment line\nmax_steps = 3\nbatch_size = 4\nhidden_size = 5\nseed = 6\n";
    cfg.close();
    auto ckpt2 = wd / "model2.s2sl";
    CHECK(run("train --data " + clicks.string() + " --config " + cfg_path.string() +
              " --output " + ckpt2.string()) == 0);
    std::ifstream log(ckpt2.string() + ".log.tsv");
    std::string header, line;
    std::getline(log, header);
    int rows = 0;
    while (std::getline(log, line)) ++rows;
    CHECK(rows == 3);

    std::ofstream bad(cfg_path, std::ios::app);
    bad << "bogus_key = 1\n";
    bad.close();
    CHECK(run("train --data " + clicks.string() + " --config " + cfg_path.string() +
              " --output " + ckpt2.string()) == 2);
  }
  SUBCASE("same seed twice gives byte-identical checkpoints") {
    auto c1 = wd / "same1.s2sl";
    auto c2 = wd / "same2.s2sl";
    CHECK(run("train --data " + clicks.string() +
              " --steps 8 --batch-size 4 --hidden-size 4 --seed 21 --output " + c1.string()) == 0);
    CHECK(run("train --data " + clicks.string() +
              " --steps 8 --batch-size 4 --hidden-size 4 --seed 21 --output " + c2.string()) == 0);
    CHECK(slurp(c1) == slurp(c2));
  }
}

TEST_CASE("cli verify quick suites") {
  // The estimator suite takes minutes; gradients + oracle are the quick ones.
  CHECK(run("verify --suite gradients > /dev/null") == 0);
  CHECK(run("verify --suite oracle > /dev/null") == 0);
  CHECK(run("verify --suite bogus") == 2);
}
