#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "diprime/dataset.hpp"
#include "diprime/tree.hpp"

namespace diprime {

inline constexpr int kArtifactVersion = 1;

// The three DiPriMe variants plus the reference learners they are compared
// against. dp_ert privatizes only the leaves of random-split trees; median
// and greedy are the non-private references.
enum class Learner { diprime, diprime_exp, diprime_flip, dp_ert, median, greedy };

std::string learner_name(Learner learner);
Learner learner_from_name(const std::string& name);
bool learner_is_private(Learner learner);

struct ForestConfig {
  Learner learner = Learner::diprime;
  int n_trees = 10;
  // Fit each tree on its own block of a random equal partition (parallel
  // composition); otherwise every tree sees all records and the budgets add.
  bool partition = true;
  TreeConfig tree;
};

struct Forest {
  Learner learner = Learner::diprime;
  Task task = Task::regression;
  ForestConfig config;
  std::uint64_t seed = 0;
  std::vector<AttributeSchema> attributes;
  std::vector<std::string> classes;  // classification only
  std::vector<std::unique_ptr<TreeNode>> trees;
  BudgetLedger ledger;
};

// Fit an ensemble. All randomness (partition, per-tree fitting) derives from
// `seed`, so identical inputs reproduce the forest bit for bit.
Forest fit_forest(const Dataset& data, const ForestConfig& config,
                  std::uint64_t seed);

// Throws if `data` does not carry the attributes the forest was fit on.
void check_compatible(const Forest& forest, const Dataset& data);

// Mean of the trees' leaf means.
double predict_regression(const Forest& forest, const Dataset& data,
                          std::size_t row);

// Plurality vote over the trees' leaf majorities; ties break uniformly.
int predict_classification(const Forest& forest, const Dataset& data,
                           std::size_t row, Rng& rng);

struct Metrics {
  Task task = Task::regression;
  double value = 0.0;  // mse for regression, accuracy for classification
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

Metrics evaluate(const Forest& forest, const Dataset& test);

// Occupancy of the fitted structure under `data`: for every leaf, the
// fraction of records routed to it (relative to the records entering its
// tree), and for every internal node that receives records, the fraction
// sent to its left child. Nodes are visited tree by tree in pre-order.
struct OccupancyReport {
  std::vector<double> leaf_fractions;
  std::vector<double> left_fractions;
};

OccupancyReport diagnostics(const Forest& forest, const Dataset& data);

nlohmann::json forest_to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& j);
void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

}  // namespace diprime
