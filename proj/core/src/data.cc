#include "seq2slate/data.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "seq2slate/error.h"
#include "seq2slate/numerics.h"

namespace seq2slate {

namespace {

// gzopen reads both plain and gzip files (magic-byte detection).
std::string read_file_maybe_gzip(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw DataError("cannot open " + path);
  std::string out;
  char buf[1 << 16];
  int got;
  while ((got = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<size_t>(got));
  const bool bad = got < 0;
  gzclose(f);
  if (bad) throw DataError("read error (corrupt gzip?) in " + path);
  return out;
}

struct ParsedLine {
  int grade = 0;
  std::string qid;
  std::vector<std::pair<int, double>> feats;
};

ParsedLine parse_line(const std::string& line, int line_no) {
  const auto fail = [&](const std::string& what) {
    throw DataError("letor parse error at line " + std::to_string(line_no) + ": " + what);
  };
  ParsedLine out;
  std::string body = line;
  if (const size_t hash = body.find('#'); hash != std::string::npos) body.resize(hash);
  std::istringstream ss(body);
  std::string tok;
  if (!(ss >> tok)) fail("empty line");
  try {
    size_t used = 0;
    out.grade = std::stoi(tok, &used);
    if (used != tok.size()) fail("bad grade '" + tok + "'");
  } catch (const std::exception&) {
    fail("bad grade '" + tok + "'");
  }
  if (!(ss >> tok) || tok.rfind("qid:", 0) != 0 || tok.size() <= 4) fail("missing qid");
  out.qid = tok.substr(4);
  while (ss >> tok) {
    const size_t colon = tok.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size()) {
      fail("bad feature token '" + tok + "'");
    }
    int fid = 0;
    const char* fb = tok.data();
    auto [p1, ec1] = std::from_chars(fb, fb + colon, fid);
    if (ec1 != std::errc() || p1 != fb + colon || fid < 1) {
      fail("bad feature id in '" + tok + "'");
    }
    char* endp = nullptr;
    const std::string val_str = tok.substr(colon + 1);
    const double val = std::strtod(val_str.c_str(), &endp);
    if (endp == val_str.c_str() || *endp != '\0' || !std::isfinite(val)) {
      fail("bad feature value in '" + tok + "'");
    }
    out.feats.emplace_back(fid, val);
  }
  return out;
}

}  // namespace

std::vector<RawQuery> parse_letor_text(const std::string& text) {
  std::vector<std::string> order;                      // qids in first-appearance order
  std::map<std::string, std::vector<ParsedLine>> rows;
  int line_no = 0;
  size_t start = 0;
  int max_fid = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (end == text.size() && line.empty()) break;
    // skip blank lines
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ParsedLine pl = parse_line(line, line_no);
    for (const auto& [fid, _] : pl.feats) max_fid = std::max(max_fid, fid);
    auto it = rows.find(pl.qid);
    if (it == rows.end()) {
      order.push_back(pl.qid);
      rows[pl.qid].push_back(std::move(pl));
    } else {
      it->second.push_back(std::move(pl));
    }
  }

  std::vector<RawQuery> queries;
  queries.reserve(order.size());
  for (const std::string& qid : order) {
    const auto& lines = rows[qid];
    RawQuery q;
    q.query_id = qid;
    const int n = static_cast<int>(lines.size());
    q.features = Tensor({n, std::max(max_fid, 1)});
    q.grades.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      q.grades[static_cast<size_t>(i)] = lines[static_cast<size_t>(i)].grade;
      for (const auto& [fid, val] : lines[static_cast<size_t>(i)].feats) {
        q.features.at(i, fid - 1) = val;
      }
    }
    queries.push_back(std::move(q));
  }
  return queries;
}

std::vector<RawQuery> parse_letor(const std::string& path) {
  return parse_letor_text(read_file_maybe_gzip(path));
}

void write_letor(std::span<const RawQuery> queries, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw DataError("cannot open for writing: " + path);
  for (const RawQuery& q : queries) {
    const int n = q.n();
    const int dim = n > 0 ? static_cast<int>(q.features.dim(1)) : 0;
    for (int i = 0; i < n; ++i) {
      std::fprintf(f, "%d qid:%s", q.grades[static_cast<size_t>(i)], q.query_id.c_str());
      for (int k = 0; k < dim; ++k) {
        std::fprintf(f, " %d:%.17g", k + 1, q.features.at(i, k));
      }
      std::fprintf(f, "\n");
    }
  }
  if (std::fclose(f) != 0) throw DataError("write failed: " + path);
}

RawQuery to_raw_query(const RankingInstance& inst) {
  RawQuery q;
  q.query_id = inst.query_id;
  q.features = inst.features;
  if (!inst.labels.empty()) {
    q.grades = inst.labels;
  } else {
    q.grades = inst.grades;
  }
  return q;
}

RankingInstance order_by_base(const RawQuery& query, std::span<const double> base_scores) {
  const int n = query.n();
  if (static_cast<int>(base_scores.size()) != n) {
    throw DataError("order_by_base: one score per item required");
  }
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return base_scores[static_cast<size_t>(a)] > base_scores[static_cast<size_t>(b)];
  });
  RankingInstance inst;
  inst.query_id = query.query_id;
  const int dim = static_cast<int>(query.features.dim(1));
  inst.features = Tensor({n, dim});
  inst.grades.resize(static_cast<size_t>(n));
  inst.labels.assign(static_cast<size_t>(n), 0);
  for (int pos = 0; pos < n; ++pos) {
    const int src = order[static_cast<size_t>(pos)];
    auto row = query.features.row(src);
    std::copy(row.begin(), row.end(), inst.features.row(pos).begin());
    inst.grades[static_cast<size_t>(pos)] = query.grades[static_cast<size_t>(src)];
  }
  return inst;
}

std::vector<RankingInstance> as_click_dataset(std::span<const RawQuery> queries) {
  std::vector<RankingInstance> out;
  out.reserve(queries.size());
  for (const RawQuery& q : queries) {
    RankingInstance inst;
    inst.query_id = q.query_id;
    inst.features = q.features;
    inst.grades = q.grades;
    inst.labels.resize(q.grades.size());
    for (size_t i = 0; i < q.grades.size(); ++i) {
      const int g = q.grades[i];
      if (g != 0 && g != 1) {
        throw DataError("click dataset expects binary labels; query " + q.query_id +
                        " has grade " + std::to_string(g));
      }
      inst.labels[i] = g;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<RankingInstance> shuffle_augment(const RankingInstance& instance, int copies,
                                             Rng& rng) {
  if (copies < 1) throw DataError("shuffle_augment: copies must be >= 1");
  const int n = instance.n();
  std::vector<RankingInstance> out;
  out.reserve(static_cast<size_t>(copies));
  for (int c = 0; c < copies; ++c) {
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    RankingInstance copy;
    copy.query_id = instance.query_id;
    copy.features = Tensor({n, instance.feature_dim()});
    copy.labels.resize(static_cast<size_t>(n));
    if (!instance.grades.empty()) copy.grades.resize(static_cast<size_t>(n));
    for (int pos = 0; pos < n; ++pos) {
      const int src = order[static_cast<size_t>(pos)];
      auto row = instance.features.row(src);
      std::copy(row.begin(), row.end(), copy.features.row(pos).begin());
      copy.labels[static_cast<size_t>(pos)] = instance.labels[static_cast<size_t>(src)];
      if (!instance.grades.empty()) {
        copy.grades[static_cast<size_t>(pos)] = instance.grades[static_cast<size_t>(src)];
      }
    }
    out.push_back(std::move(copy));
  }
  return out;
}

std::vector<RawQuery> synth_queries(const SynthConfig& config, Rng& rng) {
  if (config.num_clusters < 2) throw DataError("synth_queries: num_clusters must be >= 2");
  if (config.items_per_query < 2) throw DataError("synth_queries: need n >= 2");
  const int n = config.items_per_query;
  const int m = config.feature_dim;

  // Global utility direction shared by all queries (unit norm).
  std::vector<double> global_dir(static_cast<size_t>(m));
  for (double& v : global_dir) v = rng.normal();
  double norm = std::sqrt(dot(global_dir, global_dir));
  for (double& v : global_dir) v /= std::max(norm, 1e-12);

  std::vector<RawQuery> queries;
  queries.reserve(static_cast<size_t>(config.num_queries));
  for (int qi = 0; qi < config.num_queries; ++qi) {
    RawQuery q;
    q.query_id = "synth" + std::to_string(qi + 1);
    q.features = Tensor({n, m});
    q.grades.resize(static_cast<size_t>(n));

    Tensor centers({config.num_clusters, m});
    for (int64_t i = 0; i < centers.size(); ++i) centers[i] = rng.normal();

    std::vector<double> utility(static_cast<size_t>(n));
    std::vector<double> u_q(global_dir);
    for (int k = 0; k < m; ++k) u_q[static_cast<size_t>(k)] += 0.3 * rng.normal();
    norm = std::sqrt(dot(u_q, u_q));
    for (double& v : u_q) v /= std::max(norm, 1e-12);

    std::vector<int> cluster_of(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int cluster = i % config.num_clusters;
      cluster_of[static_cast<size_t>(i)] = cluster;
      auto row = q.features.row(i);
      for (int k = 0; k < m; ++k) {
        row[static_cast<size_t>(k)] =
            centers.at(cluster, k) + config.noise_sigma * rng.normal();
      }
      utility[static_cast<size_t>(i)] = dot(row, u_q) + config.grade_noise * rng.normal();
    }

    // Cluster capability tiers: clusters ranked by center utility get peak
    // grades 4, 3, then 1 for the rest. Within a cluster, grades step down
    // from the peak by the item's utility rank among its cluster mates.
    // Grades therefore depend on relative standing within the slate, which
    // a pointwise scorer cannot fully express.
    std::vector<int> cluster_rank(static_cast<size_t>(config.num_clusters));
    {
      std::vector<int> order(static_cast<size_t>(config.num_clusters));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double va = 0.0, vb = 0.0;
        for (int k = 0; k < m; ++k) {
          va += centers.at(a, k) * u_q[static_cast<size_t>(k)];
          vb += centers.at(b, k) * u_q[static_cast<size_t>(k)];
        }
        return va > vb;
      });
      for (int r = 0; r < config.num_clusters; ++r) {
        cluster_rank[static_cast<size_t>(order[static_cast<size_t>(r)])] = r;
      }
    }
    for (int c = 0; c < config.num_clusters; ++c) {
      const int peak = cluster_rank[static_cast<size_t>(c)] == 0   ? 4
                       : cluster_rank[static_cast<size_t>(c)] == 1 ? 3
                                                                   : 1;
      std::vector<int> members;
      for (int i = 0; i < n; ++i) {
        if (cluster_of[static_cast<size_t>(i)] == c) members.push_back(i);
      }
      std::stable_sort(members.begin(), members.end(), [&](int a, int b) {
        return utility[static_cast<size_t>(a)] > utility[static_cast<size_t>(b)];
      });
      for (size_t within = 0; within < members.size(); ++within) {
        q.grades[static_cast<size_t>(members[within])] =
            std::max(0, peak - static_cast<int>(within));
      }
    }
    queries.push_back(std::move(q));
  }
  return queries;
}

double LinearRanker::score(std::span<const double> features) const {
  return bias + dot(weights, features);
}

LinearRanker fit_linear_ranker(std::span<const RawQuery> queries) {
  if (queries.empty()) throw DataError("fit_linear_ranker: no queries");
  const int m = static_cast<int>(queries[0].features.dim(1));
  const int d = m + 1;  // intercept in the last slot
  Tensor xtx({d, d});
  std::vector<double> xty(static_cast<size_t>(d), 0.0);
  std::vector<double> row(static_cast<size_t>(d), 1.0);
  for (const RawQuery& q : queries) {
    for (int i = 0; i < q.n(); ++i) {
      auto f = q.features.row(i);
      std::copy(f.begin(), f.end(), row.begin());
      row[static_cast<size_t>(m)] = 1.0;
      const double y = static_cast<double>(q.grades[static_cast<size_t>(i)]);
      for (int a = 0; a < d; ++a) {
        const double ra = row[static_cast<size_t>(a)];
        xty[static_cast<size_t>(a)] += ra * y;
        for (int b = 0; b < d; ++b) xtx.at(a, b) += ra * row[static_cast<size_t>(b)];
      }
    }
  }
  std::vector<double> w = solve_ridge(std::move(xtx), std::move(xty), 1e-6);
  LinearRanker ranker;
  ranker.weights.assign(w.begin(), w.end() - 1);
  ranker.bias = w.back();
  return ranker;
}

std::vector<double> score_query(const LinearRanker& ranker, const RawQuery& query) {
  std::vector<double> scores(static_cast<size_t>(query.n()));
  for (int i = 0; i < query.n(); ++i) scores[static_cast<size_t>(i)] = ranker.score(query.features.row(i));
  return scores;
}

FeatureStats compute_feature_stats(std::span<const RankingInstance> train) {
  if (train.empty()) throw DataError("compute_feature_stats: empty training split");
  const int m = train[0].feature_dim();
  FeatureStats stats;
  stats.mean.assign(static_cast<size_t>(m), 0.0);
  stats.stddev.assign(static_cast<size_t>(m), 0.0);
  int64_t count = 0;
  for (const RankingInstance& inst : train) {
    for (int i = 0; i < inst.n(); ++i) {
      axpy(1.0, inst.features.row(i), stats.mean);
      ++count;
    }
  }
  for (double& v : stats.mean) v /= static_cast<double>(count);
  for (const RankingInstance& inst : train) {
    for (int i = 0; i < inst.n(); ++i) {
      auto row = inst.features.row(i);
      for (int k = 0; k < m; ++k) {
        const double d = row[static_cast<size_t>(k)] - stats.mean[static_cast<size_t>(k)];
        stats.stddev[static_cast<size_t>(k)] += d * d;
      }
    }
  }
  for (double& v : stats.stddev) v = std::max(std::sqrt(v / static_cast<double>(count)), 1e-6);
  return stats;
}

void apply_feature_stats(std::span<RankingInstance> instances, const FeatureStats& stats) {
  for (RankingInstance& inst : instances) {
    if (inst.feature_dim() != static_cast<int>(stats.mean.size())) {
      throw DataError("apply_feature_stats: dimension mismatch");
    }
    for (int i = 0; i < inst.n(); ++i) {
      auto row = inst.features.row(i);
      for (size_t k = 0; k < stats.mean.size(); ++k) {
        row[k] = (row[k] - stats.mean[k]) / stats.stddev[k];
      }
    }
  }
}

SplitIndices split_by_query_hash(std::span<const RankingInstance> instances, uint64_t seed) {
  SplitIndices out;
  for (size_t idx = 0; idx < instances.size(); ++idx) {
    // FNV-1a over the qid, mixed with the seed.
    uint64_t h = 14695981039346656037ULL ^ seed;
    for (char c : instances[idx].query_id) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    h ^= h >> 33;
    h *= 0xFF51AFD7ED558CCDULL;
    h ^= h >> 33;
    const uint64_t bucket = h % 10;
    if (bucket < 8) {
      out.train.push_back(static_cast<int>(idx));
    } else if (bucket == 8) {
      out.valid.push_back(static_cast<int>(idx));
    } else {
      out.test.push_back(static_cast<int>(idx));
    }
  }
  return out;
}

}  // namespace seq2slate
