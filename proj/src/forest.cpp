#include "diprime/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace diprime {

using nlohmann::json;

std::string learner_name(Learner learner) {
  switch (learner) {
    case Learner::diprime: return "diprime";
    case Learner::diprime_exp: return "diprime_exp";
    case Learner::diprime_flip: return "diprime_flip";
    case Learner::dp_ert: return "dp_ert";
    case Learner::median: return "median";
    case Learner::greedy: return "greedy";
  }
  throw std::invalid_argument("unknown learner");
}

Learner learner_from_name(const std::string& name) {
  if (name == "diprime") return Learner::diprime;
  if (name == "diprime_exp") return Learner::diprime_exp;
  if (name == "diprime_flip") return Learner::diprime_flip;
  if (name == "dp_ert") return Learner::dp_ert;
  if (name == "median") return Learner::median;
  if (name == "greedy") return Learner::greedy;
  throw std::invalid_argument("unknown learner name: " + name);
}

bool learner_is_private(Learner learner) {
  return learner == Learner::diprime || learner == Learner::diprime_exp ||
         learner == Learner::diprime_flip || learner == Learner::dp_ert;
}

namespace {

detail::TreeAlgo algo_for(Learner learner) {
  switch (learner) {
    case Learner::diprime:
    case Learner::diprime_exp:
    case Learner::diprime_flip: return detail::TreeAlgo::diprime;
    case Learner::dp_ert: return detail::TreeAlgo::dp_ert;
    case Learner::median: return detail::TreeAlgo::exact_median;
    case Learner::greedy: return detail::TreeAlgo::greedy;
  }
  throw std::invalid_argument("unknown learner");
}

Variant variant_for(Learner learner) {
  switch (learner) {
    case Learner::diprime_exp: return Variant::exp_mech;
    case Learner::diprime_flip: return Variant::flip;
    default: return Variant::random_attr;
  }
}

}  // namespace

Forest fit_forest(const Dataset& data, const ForestConfig& config,
                  std::uint64_t seed) {
  if (config.n_trees < 1) {
    throw std::invalid_argument("a forest needs at least one tree");
  }
  ForestConfig resolved = config;
  resolved.tree.budget.variant = variant_for(config.learner);

  Forest forest;
  forest.learner = resolved.learner;
  forest.task = data.task;
  forest.config = resolved;
  forest.seed = seed;
  forest.attributes = data.attributes;
  forest.classes = data.classes;

  const Rng master(seed);
  const std::size_t n = data.n_rows();
  const auto n_trees = static_cast<std::size_t>(resolved.n_trees);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (resolved.partition) {
    Rng partition_rng = master.derive(salt::partition);
    partition_rng.shuffle(order);
  }

  std::size_t offset = 0;
  for (std::size_t t = 0; t < n_trees; ++t) {
    Dataset block;
    const Dataset* fit_data = &data;
    if (resolved.partition && n_trees > 1) {
      // Near-equal block sizes: the first n % n_trees blocks get one extra.
      const std::size_t size = n / n_trees + (t < n % n_trees ? 1 : 0);
      block = subset(data, std::span<const std::size_t>(order).subspan(offset, size));
      offset += size;
      fit_data = &block;
    }
    const Rng tree_rng = master.derive(salt::tree).derive(t);
    const std::string prefix =
        resolved.partition ? "" : "tree" + std::to_string(t) + "/";
    forest.trees.push_back(detail::fit_tree_with_algo(algo_for(resolved.learner),
                                                      *fit_data, resolved.tree,
                                                      tree_rng, forest.ledger,
                                                      prefix));
  }
  return forest;
}

void check_compatible(const Forest& forest, const Dataset& data) {
  if (forest.attributes.size() != data.attributes.size()) {
    throw std::runtime_error("dataset has " +
                             std::to_string(data.attributes.size()) +
                             " attributes, model expects " +
                             std::to_string(forest.attributes.size()));
  }
  for (std::size_t a = 0; a < forest.attributes.size(); ++a) {
    const AttributeSchema& expect = forest.attributes[a];
    const AttributeSchema& got = data.attributes[a];
    if (expect.kind != got.kind || expect.name != got.name) {
      throw std::runtime_error("attribute '" + expect.name +
                               "' does not match the model schema");
    }
    if (expect.kind == AttributeSchema::Kind::categorical &&
        expect.categories != got.categories) {
      throw std::runtime_error("categories of attribute '" + expect.name +
                               "' do not match the model schema");
    }
  }
  if (forest.task != data.task) {
    throw std::runtime_error("dataset task does not match the model");
  }
  if (forest.task == Task::classification && forest.classes != data.classes) {
    throw std::runtime_error("class set does not match the model");
  }
}

double predict_regression(const Forest& forest, const Dataset& data,
                          std::size_t row) {
  if (forest.task != Task::regression) {
    throw std::invalid_argument("forest was not fit for regression");
  }
  double sum = 0.0;
  for (const auto& tree : forest.trees) {
    sum += diprime::predict_regression(*tree, data, row);
  }
  return sum / static_cast<double>(forest.trees.size());
}

int predict_classification(const Forest& forest, const Dataset& data,
                           std::size_t row, Rng& rng) {
  if (forest.task != Task::classification) {
    throw std::invalid_argument("forest was not fit for classification");
  }
  std::vector<std::size_t> votes;
  for (const auto& tree : forest.trees) {
    const int c = diprime::predict_classification(*tree, data, row, rng);
    if (votes.size() <= static_cast<std::size_t>(c)) votes.resize(c + 1, 0);
    ++votes[c];
  }
  const std::size_t best = *std::max_element(votes.begin(), votes.end());
  std::vector<int> argmax;
  for (std::size_t c = 0; c < votes.size(); ++c) {
    if (votes[c] == best) argmax.push_back(static_cast<int>(c));
  }
  return argmax.size() == 1 ? argmax.front() : argmax[rng.index(argmax.size())];
}

Metrics evaluate(const Forest& forest, const Dataset& test) {
  check_compatible(forest, test);
  const std::size_t n = test.n_rows();
  if (n == 0) throw std::invalid_argument("evaluation needs at least one record");
  Metrics m;
  m.task = forest.task;
  m.n_test = n;
  m.seed = forest.seed;
  if (forest.task == Task::regression) {
    double sse = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double err = predict_regression(forest, test, r) - test.targets[r];
      sse += err * err;
    }
    m.value = sse / static_cast<double>(n);
  } else {
    Rng tie_rng = Rng(forest.seed).derive(salt::tie_break);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (predict_classification(forest, test, r, tie_rng) == test.labels[r]) {
        ++correct;
      }
    }
    m.value = static_cast<double>(correct) / static_cast<double>(n);
  }
  return m;
}

namespace {

void occupancy_walk(const TreeNode& node, const Dataset& data,
                    std::vector<std::size_t> rows, std::size_t tree_total,
                    OccupancyReport& report) {
  if (node.is_leaf()) {
    report.leaf_fractions.push_back(static_cast<double>(rows.size()) /
                                    static_cast<double>(tree_total));
    return;
  }
  std::vector<std::size_t> left_rows, right_rows;
  for (std::size_t r : rows) {
    (node.split->routes_left(data, r) ? left_rows : right_rows).push_back(r);
  }
  if (!rows.empty()) {
    report.left_fractions.push_back(static_cast<double>(left_rows.size()) /
                                    static_cast<double>(rows.size()));
  }
  rows.clear();
  rows.shrink_to_fit();
  occupancy_walk(*node.left, data, std::move(left_rows), tree_total, report);
  occupancy_walk(*node.right, data, std::move(right_rows), tree_total, report);
}

}  // namespace

OccupancyReport diagnostics(const Forest& forest, const Dataset& data) {
  check_compatible(forest, data);
  const std::size_t n = data.n_rows();
  if (n == 0) throw std::invalid_argument("diagnostics need at least one record");
  OccupancyReport report;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (const auto& tree : forest.trees) {
    occupancy_walk(*tree, data, all, n, report);
  }
  return report;
}

json forest_to_json(const Forest& forest) {
  json j;
  j["artifact_version"] = kArtifactVersion;
  j["learner"] = learner_name(forest.learner);
  j["task"] = task_name(forest.task);
  j["seed"] = forest.seed;
  j["n_trees"] = forest.config.n_trees;
  j["partition"] = forest.config.partition;
  j["k"] = forest.config.tree.K;
  j["b"] = forest.config.tree.B;
  j["budget"] = {{"epsilon", forest.config.tree.budget.epsilon_total},
                 {"rho", forest.config.tree.budget.rho},
                 {"d_max", forest.config.tree.budget.d_max},
                 {"variant", variant_name(forest.config.tree.budget.variant)}};
  j["ledger_total"] = forest.ledger.total();
  if (forest.task == Task::classification) j["classes"] = forest.classes;
  j["attributes"] = json::array();
  for (const AttributeSchema& a : forest.attributes) {
    json aj;
    aj["name"] = a.name;
    if (a.kind == AttributeSchema::Kind::numeric) {
      aj["kind"] = "numeric";
      aj["range"] = {a.lo, a.hi};
    } else {
      aj["kind"] = "categorical";
      aj["categories"] = a.categories;
    }
    j["attributes"].push_back(std::move(aj));
  }
  j["trees"] = json::array();
  for (const auto& tree : forest.trees) j["trees"].push_back(tree_to_json(*tree));
  return j;
}

Forest forest_from_json(const json& j) {
  const int version = j.at("artifact_version").get<int>();
  if (version != kArtifactVersion) {
    throw std::runtime_error("unsupported artifact version " +
                             std::to_string(version));
  }
  Forest forest;
  forest.learner = learner_from_name(j.at("learner").get<std::string>());
  forest.task = task_from_name(j.at("task").get<std::string>());
  forest.seed = j.at("seed").get<std::uint64_t>();

  const json& b = j.at("budget");
  const PrivacyBudget budget(b.at("epsilon").get<double>(),
                             b.at("rho").get<double>(), b.at("d_max").get<int>(),
                             variant_from_name(b.at("variant").get<std::string>()));
  forest.config.learner = forest.learner;
  forest.config.n_trees = j.at("n_trees").get<int>();
  forest.config.partition = j.at("partition").get<bool>();
  forest.config.tree =
      TreeConfig(j.at("k").get<int>(), j.at("b").get<double>(), budget);

  if (j.contains("classes")) {
    forest.classes = j.at("classes").get<std::vector<std::string>>();
  }
  for (const json& aj : j.at("attributes")) {
    const std::string name = aj.at("name").get<std::string>();
    if (aj.at("kind").get<std::string>() == "numeric") {
      forest.attributes.push_back(AttributeSchema::numeric(
          name, aj.at("range").at(0).get<double>(),
          aj.at("range").at(1).get<double>()));
    } else {
      forest.attributes.push_back(AttributeSchema::categorical(
          name, aj.at("categories").get<std::vector<std::string>>()));
    }
  }
  for (const json& tj : j.at("trees")) {
    forest.trees.push_back(tree_from_json(tj));
  }
  // The itemized charge trace is a fitting-time artifact; the serialized
  // model keeps only the spent total, restored here as a single entry.
  const double spent = j.at("ledger_total").get<double>();
  if (spent > 0.0) forest.ledger.charge_sequential("ledger_total", spent);
  return forest;
}

void save_forest(const Forest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << forest_to_json(forest).dump(2) << '\n';
}

Forest load_forest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  in >> j;
  return forest_from_json(j);
}

}  // namespace diprime
