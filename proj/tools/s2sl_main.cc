// s2sl: slate re-ranking pipeline driver.
//
// Subcommands: simulate (click generation), train, eval, rerank, verify.
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure,
// 4 verification failure.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seq2slate/checkpoint.h"
#include "seq2slate/clickgen.h"
#include "seq2slate/data.h"
#include "seq2slate/error.h"
#include "seq2slate/estimators.h"
#include "seq2slate/metrics.h"
#include "seq2slate/model.h"
#include "seq2slate/optim.h"
#include "seq2slate/verify.h"

namespace {

using namespace seq2slate;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerification = 4;

uint64_t seed_fallback() {
  if (const char* env = std::getenv("S2SL_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw DataError("empty integer list: '" + csv + "'");
  return out;
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Flat `key = value` config file; '#' starts a comment.
std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw DataError("config " + path + " line " + std::to_string(line_no) +
                      ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw DataError("config " + path + " line " + std::to_string(line_no) + ": empty key");
    }
    out[key] = value;
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

// All tunables of a training run, config-file and flag addressable.
struct TrainSettings {
  std::string data, valid_data, output = "model.s2sl", log_path;
  std::string objective = "xent";      // xent | hinge | smooth-hinge | reinforce
  std::string policy = "sample";       // sample | greedy
  std::string weight_scheme = "dcg";   // uniform | dcg | topk:K
  std::string reward_metric = "ndcg";  // ndcg | map
  int reward_k = 10;
  double gamma = 1.0;
  bool onestep = false;
  bool smooth_outer = false;
  bool reverse_input = false;
  int shuffle_augment = 0;
  int batch_size = 128;
  double lr0 = 3e-4;
  int decay_every = 1000;
  double decay_factor = 0.96;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double l2_lambda = 3e-4;
  double dropout = 0.1;
  double baseline_decay = 0.99;
  int max_steps = 1000;
  int eval_every = 500;
  int hidden_size = 128;
  int model_dim = 0;  // 0 keeps the raw feature width (no projection)
  uint64_t seed = seed_fallback();

  void apply_kv(const std::map<std::string, std::string>& kv,
                const std::set<std::string>& cli_set) {
    for (const auto& [key, value] : kv) {
      if (cli_set.count(key)) continue;  // explicit flags beat file values
      if (key == "data") data = value;
      else if (key == "valid_data") valid_data = value;
      else if (key == "output") output = value;
      else if (key == "log") log_path = value;
      else if (key == "objective") objective = value;
      else if (key == "policy") policy = value;
      else if (key == "weight_scheme") weight_scheme = value;
      else if (key == "reward_metric") reward_metric = value;
      else if (key == "reward_k") reward_k = std::stoi(value);
      else if (key == "gamma") gamma = std::stod(value);
      else if (key == "onestep") onestep = parse_bool(value, key);
      else if (key == "smooth_outer") smooth_outer = parse_bool(value, key);
      else if (key == "reverse_input") reverse_input = parse_bool(value, key);
      else if (key == "shuffle_augment") shuffle_augment = std::stoi(value);
      else if (key == "batch_size") batch_size = std::stoi(value);
      else if (key == "lr0") lr0 = std::stod(value);
      else if (key == "decay_every") decay_every = std::stoi(value);
      else if (key == "decay_factor") decay_factor = std::stod(value);
      else if (key == "adam_beta1") adam_beta1 = std::stod(value);
      else if (key == "adam_beta2") adam_beta2 = std::stod(value);
      else if (key == "adam_eps") adam_eps = std::stod(value);
      else if (key == "l2_lambda") l2_lambda = std::stod(value);
      else if (key == "dropout") dropout = std::stod(value);
      else if (key == "baseline_decay") baseline_decay = std::stod(value);
      else if (key == "max_steps") max_steps = std::stoi(value);
      else if (key == "eval_every") eval_every = std::stoi(value);
      else if (key == "hidden_size") hidden_size = std::stoi(value);
      else if (key == "model_dim") model_dim = std::stoi(value);
      else if (key == "seed") seed = std::stoull(value);
      else throw DataError("unknown config key '" + key + "'");
    }
  }

  WeightScheme parse_weights() const {
    if (weight_scheme == "uniform") return WeightScheme::uniform();
    if (weight_scheme == "dcg") return WeightScheme::dcg();
    if (weight_scheme.rfind("topk:", 0) == 0) {
      return WeightScheme::topk(std::stoi(weight_scheme.substr(5)));
    }
    throw DataError("unknown weight_scheme '" + weight_scheme + "'");
  }

  TrainConfig to_train_config(int m_raw) const {
    TrainConfig cfg;
    cfg.batch_size = batch_size;
    cfg.lr0 = lr0;
    cfg.decay_every = decay_every;
    cfg.decay_factor = decay_factor;
    cfg.adam_beta1 = adam_beta1;
    cfg.adam_beta2 = adam_beta2;
    cfg.adam_eps = adam_eps;
    cfg.l2_lambda = l2_lambda;
    cfg.dropout_p = dropout;
    cfg.baseline_decay = baseline_decay;
    cfg.max_steps = max_steps;
    cfg.eval_every = eval_every;
    cfg.seed = seed;
    cfg.m_raw = m_raw;
    cfg.m = model_dim;
    cfg.rho = hidden_size;
    cfg.model_options.reverse_input = reverse_input;

    if (objective == "reinforce") {
      cfg.objective = TrainConfig::Objective::kReinforce;
      if (reward_metric == "ndcg") {
        cfg.reward = {RewardConfig::Metric::kNdcgAtK, reward_k};
      } else if (reward_metric == "map") {
        cfg.reward = {RewardConfig::Metric::kMap, reward_k};
      } else {
        throw DataError("unknown reward_metric '" + reward_metric + "'");
      }
      return cfg;
    }
    cfg.objective = TrainConfig::Objective::kSupervised;
    if (objective == "xent") cfg.loss.family = LossFamily::kXent;
    else if (objective == "hinge") cfg.loss.family = LossFamily::kHinge;
    else if (objective == "smooth-hinge") cfg.loss.family = LossFamily::kSmoothHinge;
    else throw DataError("unknown objective '" + objective + "'");
    cfg.loss.gamma = gamma;
    cfg.loss.smooth_outer = smooth_outer;
    cfg.loss.weights = parse_weights();
    if (policy == "sample") cfg.loss.policy = Policy::kSample;
    else if (policy == "greedy") cfg.loss.policy = Policy::kGreedy;
    else throw DataError("unknown policy '" + policy + "'");
    if (onestep) {
      // One-step decoder variant: only the first-step loss trains, and the
      // score-function term vanishes for a pi-independent loss.
      cfg.loss.weights = WeightScheme::topk(1);
      cfg.loss.policy = Policy::kGreedy;
    }
    return cfg;
  }

  void print_resolved(FILE* out) const {
    std::fprintf(out, "# resolved config (checkpoint format v%u)\n", kCheckpointVersion);
    std::fprintf(out, "# data = %s\n# valid_data = %s\n# output = %s\n# log = %s\n",
                 data.c_str(), valid_data.c_str(), output.c_str(), log_path.c_str());
    std::fprintf(out, "# objective = %s\n# policy = %s\n# weight_scheme = %s\n",
                 objective.c_str(), policy.c_str(), weight_scheme.c_str());
    std::fprintf(out, "# reward_metric = %s\n# reward_k = %d\n# gamma = %g\n",
                 reward_metric.c_str(), reward_k, gamma);
    std::fprintf(out, "# onestep = %d\n# smooth_outer = %d\n# reverse_input = %d\n",
                 onestep, smooth_outer, reverse_input);
    std::fprintf(out, "# shuffle_augment = %d\n# batch_size = %d\n# lr0 = %g\n",
                 shuffle_augment, batch_size, lr0);
    std::fprintf(out, "# decay_every = %d\n# decay_factor = %g\n", decay_every, decay_factor);
    std::fprintf(out, "# adam_beta1 = %g\n# adam_beta2 = %g\n# adam_eps = %g\n", adam_beta1,
                 adam_beta2, adam_eps);
    std::fprintf(out, "# l2_lambda = %g\n# dropout = %g\n# baseline_decay = %g\n", l2_lambda,
                 dropout, baseline_decay);
    std::fprintf(out, "# max_steps = %d\n# eval_every = %d\n", max_steps, eval_every);
    std::fprintf(out, "# hidden_size = %d\n# model_dim = %d\n# seed = %llu\n", hidden_size,
                 model_dim, static_cast<unsigned long long>(seed));
  }
};

// --- simulate ---------------------------------------------------------------

std::map<std::string, std::vector<double>> load_base_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open base scores: " + path);
  std::map<std::string, std::vector<double>> out;
  std::string qid;
  double score;
  while (in >> qid >> score) out[qid].push_back(score);
  return out;
}

int cmd_simulate(const std::string& input, const std::string& base_scores,
                 const std::string& mode, double eta, double q, uint64_t seed,
                 const std::string& relevant, const std::string& output) {
  CascadeConfig cfg;
  if (mode == "diverse") cfg.mode = CascadeConfig::Mode::kDiverse;
  else if (mode == "similar") cfg.mode = CascadeConfig::Mode::kSimilar;
  else if (mode == "none") cfg.mode = CascadeConfig::Mode::kNone;
  else throw DataError("unknown mode '" + mode + "'");
  cfg.eta = eta;
  cfg.q = q;
  cfg.relevant_grades.clear();
  for (int g : parse_int_list(relevant)) cfg.relevant_grades.insert(g);

  std::fprintf(stderr,
               "# resolved config\n# input = %s\n# base_scores = %s\n# mode = %s\n"
               "# eta = %g\n# q = %g\n# relevant_grades = %s\n# seed = %llu\n# output = %s\n",
               input.c_str(), base_scores.c_str(), mode.c_str(), eta, q, relevant.c_str(),
               static_cast<unsigned long long>(seed), output.c_str());

  std::vector<RawQuery> queries = parse_letor(input);
  std::vector<RankingInstance> instances;
  instances.reserve(queries.size());
  if (base_scores == "builtin") {
    LinearRanker ranker = fit_linear_ranker(queries);
    for (const RawQuery& query : queries) {
      instances.push_back(order_by_base(query, score_query(ranker, query)));
    }
  } else {
    auto scores = load_base_scores(base_scores);
    for (const RawQuery& query : queries) {
      auto it = scores.find(query.query_id);
      if (it == scores.end()) {
        throw DataError("base scores missing qid " + query.query_id);
      }
      instances.push_back(order_by_base(query, it->second));
    }
  }

  Rng rng(seed);
  ClickStats stats = generate_clicks(instances, cfg, rng);

  std::vector<RawQuery> out_queries;
  out_queries.reserve(instances.size());
  for (const RankingInstance& inst : instances) out_queries.push_back(to_raw_query(inst));
  write_letor(out_queries, output);

  std::ofstream side(output + ".stats.tsv", std::ios::trunc);
  if (!side) throw DataError("cannot write stats sidecar for " + output);
  side << "num_queries\t" << stats.num_queries << "\n";
  side << "num_items\t" << stats.num_items << "\n";
  side << "num_clicks\t" << stats.num_clicks << "\n";
  side << "click_rate\t" << stats.click_rate() << "\n";
  side << "zero_click_fraction\t" << stats.zero_click_fraction() << "\n";
  std::fprintf(stderr, "wrote %s (%d queries, click rate %.4f)\n", output.c_str(),
               stats.num_queries, stats.click_rate());
  return kExitOk;
}

// --- train -------------------------------------------------------------------

int cmd_train(const TrainSettings& settings) {
  settings.print_resolved(stderr);
  if (settings.data.empty()) throw DataError("train: --data is required");

  std::vector<RawQuery> queries = parse_letor(settings.data);
  std::vector<RankingInstance> instances = as_click_dataset(queries);
  if (instances.empty()) throw DataError("train: empty dataset");

  if (settings.shuffle_augment > 0) {
    Rng aug_rng = Rng(settings.seed).derive(0x5157);
    std::vector<RankingInstance> augmented;
    augmented.reserve(instances.size() * static_cast<size_t>(settings.shuffle_augment));
    for (const RankingInstance& inst : instances) {
      for (RankingInstance& copy : shuffle_augment(inst, settings.shuffle_augment, aug_rng)) {
        augmented.push_back(std::move(copy));
      }
    }
    instances = std::move(augmented);
    std::fprintf(stderr, "shuffle augmentation: %zu instances\n", instances.size());
  }

  std::vector<RankingInstance> valid;
  if (!settings.valid_data.empty()) {
    valid = as_click_dataset(parse_letor(settings.valid_data));
  }

  TrainConfig cfg = settings.to_train_config(instances[0].feature_dim());
  TrainSinks sinks;
  sinks.checkpoint_path = settings.output;
  sinks.log_path =
      settings.log_path.empty() ? settings.output + ".log.tsv" : settings.log_path;

  TrainResult result = train(instances, valid, cfg, sinks);
  std::fprintf(stderr, "trained %d steps; checkpoint %s; log %s\n", cfg.max_steps,
               settings.output.c_str(), sinks.log_path->c_str());
  if (!result.log.empty()) {
    std::fprintf(stderr, "final objective %.6f\n", result.log.back().objective);
  }
  return kExitOk;
}

// --- eval / rerank ----------------------------------------------------------

EvalDecoder parse_decoder(const std::string& name) {
  if (name == "seq") return EvalDecoder::kSequential;
  if (name == "onestep") return EvalDecoder::kOneStep;
  if (name == "noop") return EvalDecoder::kNoop;
  throw DataError("unknown decoder '" + name + "'");
}

void check_dims(const PointerNetParams& params, const std::vector<RankingInstance>& data) {
  if (!data.empty() && data[0].feature_dim() != params.m_raw) {
    throw DataError("checkpoint expects feature dim " + std::to_string(params.m_raw) +
                    " but data has " + std::to_string(data[0].feature_dim()));
  }
}

int cmd_eval(const std::string& data_path, const std::string& checkpoint,
             const std::string& ks_csv, const std::string& decoder, bool reverse_input) {
  std::fprintf(stderr,
               "# resolved config (checkpoint format v%u)\n# data = %s\n# checkpoint = %s\n"
               "# ks = %s\n# decoder = %s\n# reverse_input = %d\n",
               kCheckpointVersion, data_path.c_str(), checkpoint.c_str(), ks_csv.c_str(),
               decoder.c_str(), reverse_input);
  PointerNetParams params = load_checkpoint(checkpoint);
  std::vector<RankingInstance> data = as_click_dataset(parse_letor(data_path));
  check_dims(params, data);
  const std::vector<int> ks = parse_int_list(ks_csv);
  ModelOptions options{.reverse_input = reverse_input};
  MetricsReport report = evaluate(params, data, ks, parse_decoder(decoder), options);
  std::fputs(report.to_tsv().c_str(), stdout);
  return kExitOk;
}

int cmd_rerank(const std::string& checkpoint, const std::string& input,
               const std::string& output, const std::string& decoder, bool reverse_input) {
  std::fprintf(stderr,
               "# resolved config (checkpoint format v%u)\n# checkpoint = %s\n# input = %s\n"
               "# output = %s\n# decoder = %s\n# reverse_input = %d\n",
               kCheckpointVersion, checkpoint.c_str(), input.c_str(), output.c_str(),
               decoder.c_str(), reverse_input);
  PointerNetParams params = load_checkpoint(checkpoint);
  std::vector<RawQuery> queries = parse_letor(input);
  ModelOptions options{.reverse_input = reverse_input};

  std::ofstream out(output, std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + output);
  for (const RawQuery& query : queries) {
    RankingInstance inst;
    inst.query_id = query.query_id;
    inst.features = query.features;
    inst.labels.assign(static_cast<size_t>(query.n()), 0);
    if (inst.feature_dim() != params.m_raw) {
      throw DataError("checkpoint expects feature dim " + std::to_string(params.m_raw) +
                      " but query " + query.query_id + " has " +
                      std::to_string(inst.feature_dim()));
    }
    std::vector<int> perm;
    if (decoder == "onestep") {
      perm = decode_onestep(params, inst, options);
    } else if (decoder == "seq") {
      perm = decode_greedy(params, inst, options).perm;
    } else {
      throw DataError("unknown decoder '" + decoder + "'");
    }
    out << query.query_id << ":";
    for (int item : perm) out << " " << (item + 1);  // 1-based input positions
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + output);
  return kExitOk;
}

// --- verify ------------------------------------------------------------------

int cmd_verify(const std::string& suite) {
  std::fprintf(stderr, "# resolved config\n# suite = %s\n", suite.c_str());
  std::vector<CheckResult> results;
  if (suite == "gradients") {
    results = run_gradient_suite();
  } else if (suite == "oracle") {
    results = run_oracle_suite();
  } else if (suite == "estimators") {
    results = run_estimator_suite();
  } else if (suite == "all") {
    for (auto& r : run_gradient_suite()) results.push_back(std::move(r));
    for (auto& r : run_oracle_suite()) results.push_back(std::move(r));
    for (auto& r : run_estimator_suite()) results.push_back(std::move(r));
  } else {
    throw DataError("unknown suite '" + suite + "'");
  }
  for (const CheckResult& r : results) {
    std::printf("%s\t%s\t%s\t%s\n", r.suite.c_str(), r.name.c_str(),
                r.pass ? "pass" : "fail", r.detail.c_str());
  }
  return all_passed(results) ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seq2slate pointer-network slate re-ranker"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate click data via the cascade model");
  std::string sim_input, sim_output = "clicks.txt", sim_scores = "builtin";
  std::string sim_mode = "diverse", sim_relevant = "2,3,4";
  double sim_eta = 0.0, sim_q = 0.5;
  uint64_t sim_seed = seed_fallback();
  sim->add_option("--input", sim_input, "raw LETOR file with relevance grades")->required();
  sim->add_option("--base-scores", sim_scores, "base score file or 'builtin'");
  sim->add_option("--mode", sim_mode, "diverse | similar | none");
  sim->add_option("--eta", sim_eta, "observation decay exponent");
  sim->add_option("--q", sim_q, "similarity quantile in (0, 1]");
  sim->add_option("--relevant-grades", sim_relevant, "comma list of relevant grades");
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--output", sim_output, "click dataset output path");

  // train
  auto* tr = app.add_subcommand("train", "train the pointer network on click data");
  TrainSettings ts;
  std::string tr_config;
  tr->add_option("--data", ts.data, "click dataset (LETOR, binary labels)");
  tr->add_option("--config", tr_config, "key = value config file");
  tr->add_option("--valid-data", ts.valid_data, "validation click dataset");
  tr->add_option("--objective", ts.objective, "xent | hinge | smooth-hinge | reinforce");
  tr->add_option("--policy", ts.policy, "sample | greedy");
  tr->add_option("--weights", ts.weight_scheme, "uniform | dcg | topk:K");
  tr->add_flag("--onestep", ts.onestep, "train the one-step decoder variant");
  tr->add_flag("--smooth-outer", ts.smooth_outer, "smooth the outer hinge max too");
  tr->add_flag("--reverse-input", ts.reverse_input, "feed encoder input worst-first");
  tr->add_option("--shuffle-augment", ts.shuffle_augment,
                 "N shuffled copies per training example");
  tr->add_option("--gamma", ts.gamma, "smooth-hinge temperature");
  tr->add_option("--batch-size", ts.batch_size, "mini-batch size");
  tr->add_option("--steps", ts.max_steps, "training steps");
  tr->add_option("--eval-every", ts.eval_every, "validation/checkpoint interval");
  tr->add_option("--hidden-size", ts.hidden_size, "LSTM hidden units");
  tr->add_option("--model-dim", ts.model_dim, "projected input width (0 = raw)");
  tr->add_option("--lr0", ts.lr0, "initial learning rate");
  tr->add_option("--dropout", ts.dropout, "input dropout probability");
  tr->add_option("--l2", ts.l2_lambda, "L2 penalty coefficient");
  tr->add_option("--seed", ts.seed, "rng seed");
  tr->add_option("--output", ts.output, "checkpoint output path");
  tr->add_option("--log", ts.log_path, "training log TSV path");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a click dataset");
  std::string ev_data, ev_ckpt, ev_ks = "5,10", ev_decoder = "seq";
  bool ev_reverse = false;
  ev->add_option("--data", ev_data)->required();
  ev->add_option("--checkpoint", ev_ckpt)->required();
  ev->add_option("--ks", ev_ks, "NDCG cutoffs, comma separated");
  ev->add_option("--decoder", ev_decoder, "seq | onestep | noop");
  ev->add_flag("--reverse-input", ev_reverse);

  // rerank
  auto* rr = app.add_subcommand("rerank", "emit reranked item positions per query");
  std::string rr_ckpt, rr_input, rr_output = "rerank.txt", rr_decoder = "seq";
  bool rr_reverse = false;
  rr->add_option("--checkpoint", rr_ckpt)->required();
  rr->add_option("--input", rr_input)->required();
  rr->add_option("--output", rr_output);
  rr->add_option("--decoder", rr_decoder, "seq | onestep");
  rr->add_flag("--reverse-input", rr_reverse);

  // verify
  auto* vf = app.add_subcommand("verify", "run the numeric verification suites");
  std::string vf_suite = "all";
  vf->add_option("--suite", vf_suite, "gradients | oracle | estimators | all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(sim_input, sim_scores, sim_mode, sim_eta, sim_q, sim_seed,
                          sim_relevant, sim_output);
    }
    if (tr->parsed()) {
      if (!tr_config.empty()) {
        std::set<std::string> cli_set;
        const std::map<std::string, std::string> flag_to_key = {
            {"--data", "data"},           {"--valid-data", "valid_data"},
            {"--objective", "objective"}, {"--policy", "policy"},
            {"--weights", "weight_scheme"}, {"--onestep", "onestep"},
            {"--smooth-outer", "smooth_outer"}, {"--reverse-input", "reverse_input"},
            {"--shuffle-augment", "shuffle_augment"}, {"--gamma", "gamma"},
            {"--batch-size", "batch_size"}, {"--steps", "max_steps"},
            {"--eval-every", "eval_every"}, {"--hidden-size", "hidden_size"},
            {"--model-dim", "model_dim"},  {"--lr0", "lr0"},
            {"--dropout", "dropout"},      {"--l2", "l2_lambda"},
            {"--seed", "seed"},            {"--output", "output"},
            {"--log", "log"}};
        for (const auto& [flag, key] : flag_to_key) {
          if (tr->count(flag) > 0) cli_set.insert(key);
        }
        ts.apply_kv(parse_kv_file(tr_config), cli_set);
      }
      return cmd_train(ts);
    }
    if (ev->parsed()) return cmd_eval(ev_data, ev_ckpt, ev_ks, ev_decoder, ev_reverse);
    if (rr->parsed()) return cmd_rerank(rr_ckpt, rr_input, rr_output, rr_decoder, rr_reverse);
    if (vf->parsed()) return cmd_verify(vf_suite);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
