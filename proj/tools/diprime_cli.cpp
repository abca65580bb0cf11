// Command-line interface: fit private forests, evaluate stored models, sweep
// configurations over seeds, confront the analytical bounds with simulation
// and dump occupancy diagnostics.
//
// Exit codes: 0 on success, 1 when verification checks fail, 2 on usage or
// configuration errors.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diprime/baselines.hpp"
#include "diprime/bounds.hpp"
#include "diprime/dataset.hpp"
#include "diprime/forest.hpp"

using nlohmann::json;

namespace {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << text;
}

int worker_count() {
  if (const char* env = std::getenv("DIPRIME_WORKERS")) {
    const int n = std::atoi(env);
    if (n < 1) throw std::runtime_error("DIPRIME_WORKERS must be >= 1");
    return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// ---------------------------------------------------------------------------
// Experiment configuration: a JSON object, flag-overridable, hashed into the
// outputs so results are attributable to an exact configuration.

struct RunConfig {
  diprime::Learner learner = diprime::Learner::diprime;
  double epsilon = 1.0;
  double rho = 0.5;
  int d_max = 5;
  int n_trees = 10;
  int k = 5;
  bool partition = true;
  double b = 1.0;
  std::uint64_t seed = 1;

  // Data source: either CSV + schema paths or an inline synthetic spec.
  std::string csv_path;
  std::string schema_path;
  json synth;  // {"kind": "regression"|"classification", ...spec fields}
  std::uint64_t data_seed = 1;
  bool scale_targets = false;
  int bins = 0;
};

diprime::SynthRegressionSpec regression_spec_from_json(const json& j) {
  diprime::SynthRegressionSpec spec;
  spec.n = j.value("n", spec.n);
  spec.n_attributes = j.value("n_attributes", spec.n_attributes);
  const std::string profile = j.value("profile", std::string("uniform"));
  if (profile == "uniform") {
    spec.profile = diprime::SynthRegressionSpec::Profile::uniform;
  } else if (profile == "clustered") {
    spec.profile = diprime::SynthRegressionSpec::Profile::clustered;
  } else if (profile == "spread_controlled") {
    spec.profile = diprime::SynthRegressionSpec::Profile::spread_controlled;
  } else if (profile == "skewed") {
    spec.profile = diprime::SynthRegressionSpec::Profile::skewed;
  } else {
    throw std::runtime_error("unknown synthetic profile: " + profile);
  }
  spec.range_lo = j.value("range_lo", spec.range_lo);
  spec.range_hi = j.value("range_hi", spec.range_hi);
  spec.cluster_sd = j.value("cluster_sd", spec.cluster_sd);
  spec.tails = j.value("tails", spec.tails);
  spec.core_width = j.value("core_width", spec.core_width);
  spec.skew_power = j.value("skew_power", spec.skew_power);
  spec.signal = j.value("signal", spec.signal);
  spec.noise_sd = j.value("noise_sd", spec.noise_sd);
  spec.sharpness = j.value("sharpness", spec.sharpness);
  return spec;
}

diprime::SynthClassificationSpec classification_spec_from_json(const json& j) {
  diprime::SynthClassificationSpec spec;
  spec.n = j.value("n", spec.n);
  spec.n_attributes = j.value("n_attributes", spec.n_attributes);
  spec.n_informative = j.value("n_informative", spec.n_informative);
  spec.class_balance = j.value("class_balance", spec.class_balance);
  spec.separation = j.value("separation", spec.separation);
  spec.cluster_halfwidth = j.value("cluster_halfwidth", spec.cluster_halfwidth);
  spec.label_noise = j.value("label_noise", spec.label_noise);
  spec.range_lo = j.value("range_lo", spec.range_lo);
  spec.range_hi = j.value("range_hi", spec.range_hi);
  spec.spatially_homogeneous =
      j.value("spatially_homogeneous", spec.spatially_homogeneous);
  spec.purity = j.value("purity", spec.purity);
  return spec;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  cfg.learner = diprime::learner_from_name(j.value("learner", std::string("diprime")));
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.rho = j.value("rho", cfg.rho);
  cfg.d_max = j.value("d_max", cfg.d_max);
  cfg.n_trees = j.value("n_trees", cfg.n_trees);
  cfg.k = j.value("k", cfg.k);
  cfg.partition = j.value("partition", cfg.partition);
  cfg.b = j.value("b", cfg.b);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.scale_targets = j.value("scale_target", cfg.scale_targets);
  cfg.bins = j.value("bins", cfg.bins);
  if (j.contains("data")) {
    const json& d = j.at("data");
    cfg.data_seed = d.value("synth_seed", cfg.data_seed);
    if (d.contains("csv") != d.contains("schema")) {
      throw std::runtime_error("config: 'data' needs both 'csv' and 'schema'");
    }
    if (d.contains("csv")) {
      cfg.csv_path = d.at("csv").get<std::string>();
      cfg.schema_path = d.at("schema").get<std::string>();
    } else if (d.contains("synth_regression")) {
      cfg.synth = d.at("synth_regression");
      cfg.synth["kind"] = "regression";
    } else if (d.contains("synth_classification")) {
      cfg.synth = d.at("synth_classification");
      cfg.synth["kind"] = "classification";
    } else {
      throw std::runtime_error(
          "config: 'data' needs 'csv'+'schema' or a synthetic spec");
    }
  } else {
    throw std::runtime_error("config: missing 'data' section");
  }
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["learner"] = diprime::learner_name(cfg.learner);
  j["epsilon"] = cfg.epsilon;
  j["rho"] = cfg.rho;
  j["d_max"] = cfg.d_max;
  j["n_trees"] = cfg.n_trees;
  j["k"] = cfg.k;
  j["partition"] = cfg.partition;
  j["b"] = cfg.b;
  j["scale_target"] = cfg.scale_targets;
  j["bins"] = cfg.bins;
  if (!cfg.csv_path.empty()) {
    j["data"] = {{"csv", cfg.csv_path}, {"schema", cfg.schema_path}};
  } else {
    json d = cfg.synth;
    d["synth_seed"] = cfg.data_seed;
    j["data"] = d;
  }
  return j;
}

// Hash over everything that determines the fitted model except the seed,
// which is reported separately.
std::string config_hash(const RunConfig& cfg) {
  return fnv1a_hex(run_config_to_json(cfg).dump());
}

diprime::Dataset load_run_data(const RunConfig& cfg) {
  diprime::Dataset data;
  if (!cfg.csv_path.empty()) {
    data = diprime::load_csv(cfg.csv_path, cfg.schema_path);
  } else {
    diprime::Rng rng(cfg.data_seed);
    if (cfg.synth.at("kind").get<std::string>() == "regression") {
      data = diprime::synth_regression(regression_spec_from_json(cfg.synth), rng);
    } else {
      data = diprime::synth_classification(
          classification_spec_from_json(cfg.synth), rng);
    }
  }
  if (cfg.scale_targets && data.task == diprime::Task::regression) {
    diprime::scale_target(data);
  }
  if (cfg.bins > 0) data = diprime::equal_width_bins(data, cfg.bins);
  return data;
}

diprime::ForestConfig forest_config_for(const RunConfig& cfg) {
  const diprime::PrivacyBudget budget(cfg.epsilon, cfg.rho, cfg.d_max,
                                      diprime::Variant::random_attr);
  diprime::ForestConfig fc;
  fc.learner = cfg.learner;
  fc.n_trees = cfg.n_trees;
  fc.partition = cfg.partition;
  fc.tree = diprime::TreeConfig(cfg.k, cfg.b, budget);
  return fc;
}

// ---------------------------------------------------------------------------
// Subcommands.

struct TrainArgs {
  std::string config_path;
  std::string out_path = "model.json";
  std::string ledger_path;
  std::optional<double> epsilon, rho, b;
  std::optional<int> d_max, n_trees, k;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> learner;
};

RunConfig resolve_train_config(const TrainArgs& args) {
  RunConfig cfg = run_config_from_json(read_json_file(args.config_path));
  if (args.epsilon) cfg.epsilon = *args.epsilon;
  if (args.rho) cfg.rho = *args.rho;
  if (args.b) cfg.b = *args.b;
  if (args.d_max) cfg.d_max = *args.d_max;
  if (args.n_trees) cfg.n_trees = *args.n_trees;
  if (args.k) cfg.k = *args.k;
  if (args.seed) cfg.seed = *args.seed;
  if (args.learner) cfg.learner = diprime::learner_from_name(*args.learner);
  return cfg;
}

int cmd_train(const TrainArgs& args) {
  const RunConfig cfg = resolve_train_config(args);
  const diprime::Dataset data = load_run_data(cfg);
  const diprime::Forest forest =
      diprime::fit_forest(data, forest_config_for(cfg), cfg.seed);

  json model = diprime::forest_to_json(forest);
  model["config_hash"] = config_hash(cfg);
  write_text_file(args.out_path, model.dump(2) + "\n");

  if (!args.ledger_path.empty()) {
    json entries = json::array();
    for (const auto& e : forest.ledger.entries()) {
      entries.push_back({{"label", e.label},
                         {"epsilon", e.epsilon},
                         {"kind", e.kind == diprime::Composition::sequential
                                      ? "sequential"
                                      : "parallel"}});
    }
    json ledger = {{"entries", entries}, {"total", forest.ledger.total()}};
    write_text_file(args.ledger_path, ledger.dump(2) + "\n");
  }

  json summary = {{"model", args.out_path},
                  {"config_hash", config_hash(cfg)},
                  {"seed", cfg.seed},
                  {"artifact_version", diprime::kArtifactVersion},
                  {"n_train", data.n_rows()},
                  {"ledger_total", forest.ledger.total()}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& csv_path,
             const std::string& schema_path, const std::string& out_path) {
  const diprime::Forest forest = diprime::load_forest(model_path);
  const diprime::Dataset data = diprime::load_csv(csv_path, schema_path);
  const diprime::Metrics m = diprime::evaluate(forest, data);
  json j = {{"metric",
             m.task == diprime::Task::regression ? "mse" : "accuracy"},
            {"value", m.value},
            {"n_test", m.n_test},
            {"seed", m.seed},
            {"learner", diprime::learner_name(forest.learner)},
            {"artifact_version", diprime::kArtifactVersion}};
  const std::string text = j.dump(2) + "\n";
  if (!out_path.empty()) write_text_file(out_path, text);
  std::cout << j.dump() << "\n";
  return 0;
}

// One sweep run: a grid point fitted and evaluated under one seed.
struct SweepRun {
  RunConfig cfg;
  std::uint64_t seed = 0;
  double train_fraction = 0.9;
};

struct SweepResult {
  std::string hash;
  std::uint64_t seed = 0;
  double metric = 0.0;
  std::size_t n_test = 0;
};

SweepResult execute_sweep_run(const SweepRun& run) {
  RunConfig cfg = run.cfg;
  cfg.seed = run.seed;
  // The dataset and its train/test split depend only on the seed, so every
  // grid point faces identical data under a given seed.
  cfg.data_seed = run.seed;
  diprime::Dataset data = load_run_data(cfg);
  diprime::Rng split_rng = diprime::Rng(run.seed).derive(0x5eed);
  const auto [train, test] =
      diprime::train_test_split(data, run.train_fraction, split_rng);
  const diprime::Forest forest =
      diprime::fit_forest(train, forest_config_for(cfg), cfg.seed);
  const diprime::Metrics m = diprime::evaluate(forest, test);
  return SweepResult{config_hash(run.cfg), run.seed, m.value, m.n_test};
}

int cmd_sweep(const std::string& config_path, const std::string& out_path,
              bool resume) {
  const json spec = read_json_file(config_path);
  if (!spec.contains("base")) throw std::runtime_error("sweep: missing 'base'");
  const RunConfig base = run_config_from_json(spec.at("base"));
  const double train_fraction = spec.value("train_fraction", 0.9);

  std::vector<std::uint64_t> seeds;
  if (spec.contains("seeds") && spec.at("seeds").is_array()) {
    seeds = spec.at("seeds").get<std::vector<std::uint64_t>>();
  } else {
    const int n_seeds = spec.value("n_seeds", 5);
    for (int s = 1; s <= n_seeds; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw std::runtime_error("sweep: no seeds requested");

  // Expand the grid in declaration order; absent axes keep the base value.
  std::vector<RunConfig> points{base};
  const json grid = spec.value("grid", json::object());
  auto expand = [&points](const json& values, auto&& assign) {
    std::vector<RunConfig> next;
    for (const RunConfig& p : points) {
      for (const json& v : values) {
        RunConfig q = p;
        assign(q, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  };
  if (grid.contains("learner")) {
    expand(grid.at("learner"), [](RunConfig& c, const json& v) {
      c.learner = diprime::learner_from_name(v.get<std::string>());
    });
  }
  if (grid.contains("epsilon")) {
    expand(grid.at("epsilon"),
           [](RunConfig& c, const json& v) { c.epsilon = v.get<double>(); });
  }
  if (grid.contains("rho")) {
    expand(grid.at("rho"),
           [](RunConfig& c, const json& v) { c.rho = v.get<double>(); });
  }
  if (grid.contains("d_max")) {
    expand(grid.at("d_max"),
           [](RunConfig& c, const json& v) { c.d_max = v.get<int>(); });
  }
  if (grid.contains("n_trees")) {
    expand(grid.at("n_trees"),
           [](RunConfig& c, const json& v) { c.n_trees = v.get<int>(); });
  }
  if (grid.contains("k")) {
    expand(grid.at("k"),
           [](RunConfig& c, const json& v) { c.k = v.get<int>(); });
  }

  // Previously completed (hash, seed) pairs survive a resume untouched.
  std::map<std::pair<std::string, std::uint64_t>, SweepResult> done;
  if (resume) {
    std::ifstream in(out_path);
    std::string line;
    bool header = true;
    while (in && std::getline(in, line)) {
      if (header) {
        header = false;
        continue;
      }
      std::stringstream ss(line);
      std::string kind, learner, eps, rho, dmax, ntrees, k, hash, seed, metric,
          ntest;
      std::getline(ss, kind, ',');
      if (kind != "run") continue;
      std::getline(ss, learner, ',');
      std::getline(ss, eps, ',');
      std::getline(ss, rho, ',');
      std::getline(ss, dmax, ',');
      std::getline(ss, ntrees, ',');
      std::getline(ss, k, ',');
      std::getline(ss, hash, ',');
      std::getline(ss, seed, ',');
      std::getline(ss, metric, ',');
      std::getline(ss, ntest, ',');
      SweepResult r;
      r.hash = hash;
      r.seed = std::stoull(seed);
      r.metric = std::stod(metric);
      r.n_test = std::stoull(ntest);
      done[{r.hash, r.seed}] = r;
    }
  }

  std::vector<SweepRun> pending;
  for (const RunConfig& p : points) {
    const std::string hash = config_hash(p);
    for (std::uint64_t seed : seeds) {
      if (!done.count({hash, seed})) {
        pending.push_back(SweepRun{p, seed, train_fraction});
      }
    }
  }

  std::vector<SweepResult> fresh(pending.size());
  {
    std::atomic<std::size_t> cursor{0};
    const int workers =
        std::min<int>(worker_count(), std::max<std::size_t>(pending.size(), 1));
    std::vector<std::thread> pool;
    std::mutex error_mutex;
    std::string first_error;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t i = cursor.fetch_add(1); i < pending.size();
             i = cursor.fetch_add(1)) {
          try {
            fresh[i] = execute_sweep_run(pending[i]);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error.empty()) first_error = e.what();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw std::runtime_error(first_error);
  }
  for (const SweepResult& r : fresh) done[{r.hash, r.seed}] = r;

  // Deterministic output: grid order, then seed order, then aggregates.
  std::ostringstream out;
  out << "kind,learner,epsilon,rho,d_max,n_trees,k,config_hash,seed,metric,n_test\n";
  char buf[64];
  for (const RunConfig& p : points) {
    const std::string hash = config_hash(p);
    double sum = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed : seeds) {
      const auto it = done.find({hash, seed});
      if (it == done.end()) {
        throw std::runtime_error("sweep run missing for hash " + hash);
      }
      const SweepResult& r = it->second;
      std::snprintf(buf, sizeof(buf), "%.17g", r.metric);
      out << "run," << diprime::learner_name(p.learner) << ',' << p.epsilon
          << ',' << p.rho << ',' << p.d_max << ',' << p.n_trees << ',' << p.k
          << ',' << hash << ',' << seed << ',' << buf << ',' << r.n_test << "\n";
      sum += r.metric;
      sq += r.metric * r.metric;
      ++count;
    }
    const double mean = sum / static_cast<double>(count);
    const double var =
        count > 1 ? std::max(0.0, (sq - sum * mean) / static_cast<double>(count - 1))
                  : 0.0;
    std::snprintf(buf, sizeof(buf), "%.17g", mean);
    out << "aggregate_mean," << diprime::learner_name(p.learner) << ','
        << p.epsilon << ',' << p.rho << ',' << p.d_max << ',' << p.n_trees
        << ',' << p.k << ',' << hash << ",all," << buf << ',' << count << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", std::sqrt(var));
    out << "aggregate_std," << diprime::learner_name(p.learner) << ','
        << p.epsilon << ',' << p.rho << ',' << p.d_max << ',' << p.n_trees
        << ',' << p.k << ',' << hash << ",all," << buf << ',' << count << "\n";
  }
  write_text_file(out_path, out.str());
  std::cout << json{{"runs", done.size()}, {"out", out_path}}.dump() << "\n";
  return 0;
}

diprime::ConfrontScenario scenario_from_json(const json& j) {
  diprime::ConfrontScenario sc;
  sc.label = j.value("label", std::string("custom"));
  sc.n = j.value("n", sc.n);
  sc.t = j.value("t", sc.t);
  sc.range_lo = j.value("range_lo", sc.range_lo);
  sc.range_hi = j.value("range_hi", sc.range_hi);
  sc.core_width = j.value("core_width", sc.core_width);
  sc.epsilon_split = j.value("epsilon_split", sc.epsilon_split);
  sc.epsilon_leaf = j.value("epsilon_leaf", sc.epsilon_leaf);
  sc.B = j.value("B", sc.B);
  sc.purity = j.value("purity", sc.purity);
  sc.trials = j.value("trials", sc.trials);
  sc.seed = j.value("seed", sc.seed);
  if (j.value("mech", std::string("exponential")) == "permute_flip") {
    sc.mech = diprime::SplitMech::permute_flip;
  }
  return sc;
}

int cmd_verify(const std::string& out_path, long trials,
               const std::string& scenarios_path) {
  std::vector<std::pair<std::string, diprime::ConfrontScenario>> suite;
  if (scenarios_path.empty()) {
    suite = diprime::default_verification_suite();
  } else {
    for (const json& j : read_json_file(scenarios_path)) {
      suite.emplace_back(j.at("theorem").get<std::string>(),
                         scenario_from_json(j));
    }
  }
  if (suite.empty()) throw std::runtime_error("verify: empty scenario list");

  std::ostringstream lines;
  bool all_hold = true;
  for (const auto& [theorem, scenario] : suite) {
    const diprime::BoundReport report =
        diprime::monte_carlo_confront(theorem, scenario, trials);
    all_hold = all_hold && report.holds;
    lines << diprime::bound_report_to_json(report).dump() << "\n";
  }
  if (!out_path.empty()) write_text_file(out_path, lines.str());
  std::cout << lines.str();
  return all_hold ? 0 : 1;
}

int cmd_diagnose(const std::string& model_path, const std::string& csv_path,
                 const std::string& schema_path, const std::string& prefix) {
  const diprime::Forest forest = diprime::load_forest(model_path);
  const diprime::Dataset data = diprime::load_csv(csv_path, schema_path);
  const diprime::OccupancyReport report = diprime::diagnostics(forest, data);

  char buf[64];
  std::ostringstream leaves;
  leaves << "leaf,fraction\n";
  for (std::size_t i = 0; i < report.leaf_fractions.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", report.leaf_fractions[i]);
    leaves << i << ',' << buf << "\n";
  }
  write_text_file(prefix + "_leaf_occupancy.csv", leaves.str());

  std::ostringstream nodes;
  nodes << "node,left_fraction\n";
  double balanced = 0.0;
  for (std::size_t i = 0; i < report.left_fractions.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", report.left_fractions[i]);
    nodes << i << ',' << buf << "\n";
    if (report.left_fractions[i] >= 0.35 && report.left_fractions[i] <= 0.65) {
      balanced += 1.0;
    }
  }
  write_text_file(prefix + "_left_fractions.csv", nodes.str());

  json summary = {
      {"leaves", report.leaf_fractions.size()},
      {"internal_nodes", report.left_fractions.size()},
      {"balanced_split_share",
       report.left_fractions.empty()
           ? 0.0
           : balanced / static_cast<double>(report.left_fractions.size())}};
  std::cout << summary.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private median forests"};
  app.require_subcommand(1);

  TrainArgs train_args;
  double opt_epsilon = 0, opt_rho = 0, opt_b = 0;
  int opt_dmax = 0, opt_trees = 0, opt_k = 0;
  std::uint64_t opt_seed = 0;
  std::string opt_learner;

  CLI::App* train = app.add_subcommand("train", "fit a forest");
  train->add_option("--config", train_args.config_path, "experiment config JSON")
      ->required();
  train->add_option("--out", train_args.out_path, "model output path");
  train->add_option("--ledger", train_args.ledger_path, "budget ledger output");
  auto* f_eps = train->add_option("--epsilon", opt_epsilon, "total budget");
  auto* f_rho = train->add_option("--rho", opt_rho, "structure fraction");
  auto* f_b = train->add_option("--b", opt_b, "target bound");
  auto* f_dmax = train->add_option("--d-max", opt_dmax, "maximum depth");
  auto* f_trees = train->add_option("--trees", opt_trees, "number of trees");
  auto* f_k = train->add_option("--k", opt_k, "attributes per node");
  auto* f_seed = train->add_option("--seed", opt_seed, "master seed");
  auto* f_learner = train->add_option("--learner", opt_learner, "learner name");

  std::string eval_model, eval_csv, eval_schema, eval_out;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a stored model");
  eval->add_option("--model", eval_model)->required();
  eval->add_option("--data", eval_csv)->required();
  eval->add_option("--schema", eval_schema)->required();
  eval->add_option("--out", eval_out);

  std::string sweep_config, sweep_out;
  bool sweep_resume = false;
  CLI::App* sweep = app.add_subcommand("sweep", "run a configuration grid");
  sweep->add_option("--config", sweep_config)->required();
  sweep->add_option("--out", sweep_out)->required();
  sweep->add_flag("--resume", sweep_resume, "keep completed runs");

  std::string verify_out, verify_scenarios;
  long verify_trials = 10000;
  CLI::App* verify = app.add_subcommand("verify", "confront bounds with simulation");
  verify->add_option("--out", verify_out, "report JSONL path");
  verify->add_option("--trials", verify_trials, "default trials per check");
  verify->add_option("--scenarios", verify_scenarios, "custom scenario JSON");

  std::string diag_model, diag_csv, diag_schema, diag_prefix = "diagnostics";
  CLI::App* diagnose = app.add_subcommand("diagnose", "occupancy diagnostics");
  diagnose->add_option("--model", diag_model)->required();
  diagnose->add_option("--data", diag_csv)->required();
  diagnose->add_option("--schema", diag_schema)->required();
  diagnose->add_option("--out-prefix", diag_prefix);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      if (!f_eps->empty()) train_args.epsilon = opt_epsilon;
      if (!f_rho->empty()) train_args.rho = opt_rho;
      if (!f_b->empty()) train_args.b = opt_b;
      if (!f_dmax->empty()) train_args.d_max = opt_dmax;
      if (!f_trees->empty()) train_args.n_trees = opt_trees;
      if (!f_k->empty()) train_args.k = opt_k;
      if (!f_seed->empty()) train_args.seed = opt_seed;
      if (!f_learner->empty()) train_args.learner = opt_learner;
      return cmd_train(train_args);
    }
    if (eval->parsed()) return cmd_eval(eval_model, eval_csv, eval_schema, eval_out);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out, sweep_resume);
    if (verify->parsed()) {
      return cmd_verify(verify_out, verify_trials, verify_scenarios);
    }
    if (diagnose->parsed()) {
      return cmd_diagnose(diag_model, diag_csv, diag_schema, diag_prefix);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
