#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "diprime/dataset.hpp"
#include "diprime/mechanisms.hpp"
#include "diprime/splits.hpp"

namespace diprime {

struct TreeConfig {
  int K = 5;       // attributes sampled per internal node
  double B = 1.0;  // regression target bound
  PrivacyBudget budget;

  TreeConfig() = default;
  TreeConfig(int K, double B, PrivacyBudget budget);

  int d_max() const { return budget.d_max; }
  Variant variant() const { return budget.variant; }
};

// Leaf statistics. Regression leaves carry a (privatized, clamped) mean;
// classification leaves carry per-class (privatized, clamped) counts.
struct LeafStat {
  double mean = 0.0;
  std::vector<double> counts;
};

struct SplitRule {
  int attribute = -1;
  bool is_numeric = true;
  double threshold = 0.0;            // numeric: x < threshold routes left
  std::vector<int> left_categories;  // categorical: membership routes left

  bool routes_left(const Dataset& data, std::size_t row) const;
};

struct TreeNode {
  std::optional<SplitRule> split;  // disengaged => leaf
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
  LeafStat stat;
  int depth = 0;

  bool is_leaf() const { return !split.has_value(); }
};

// Privatized mean of `count` targets summing to `sum`, bounded in [-B, B]:
// adds Laplace(0, 2B / (count * epsilon_leaf)) and clamps to [-B, B]. An
// empty leaf returns the prior mean 0 without touching the budget or the
// generator.
LeafStat privatize_leaf_regression(double sum, std::size_t count, double B,
                                   double epsilon_leaf, Rng& rng);

// Per-class counts, each privatized with Laplace(0, 1 / epsilon_leaf) and
// clamped at 0.
LeafStat privatize_leaf_classification(std::span<const std::size_t> counts,
                                       double epsilon_leaf, Rng& rng);

namespace detail {

// Shared recursive fitter. The private learner and the reference baselines
// differ only in how a node picks its split and whether the leaves are
// privatized, so they run through one skeleton:
//   diprime      private median splits, private attribute selection,
//                privatized leaves, budget per PrivacyBudget
//   dp_ert       data-independent uniform splits, full budget on leaves
//   exact_median exact lower-median splits, exact leaves, no budget
//   greedy       exhaustive utility-maximizing splits, exact leaves
enum class TreeAlgo { diprime, dp_ert, exact_median, greedy };

std::unique_ptr<TreeNode> fit_tree_with_algo(TreeAlgo algo, const Dataset& data,
                                             const TreeConfig& config,
                                             const Rng& tree_rng,
                                             BudgetLedger& ledger,
                                             const std::string& ledger_prefix);

}  // namespace detail

// Fit one differentially private tree on the whole dataset. All randomness
// derives from tree_rng; privacy charges are appended to the ledger under
// ledger_prefix.
std::unique_ptr<TreeNode> fit_tree(const Dataset& data, const TreeConfig& config,
                                   const Rng& tree_rng, BudgetLedger& ledger,
                                   const std::string& ledger_prefix = "");

const TreeNode& route_to_leaf(const TreeNode& root, const Dataset& data,
                              std::size_t row);

double predict_regression(const TreeNode& root, const Dataset& data,
                          std::size_t row);

// Majority class of the routed leaf; exact ties are broken uniformly.
int predict_classification(const TreeNode& root, const Dataset& data,
                           std::size_t row, Rng& rng);

nlohmann::json tree_to_json(const TreeNode& root);
std::unique_ptr<TreeNode> tree_from_json(const nlohmann::json& j);

}  // namespace diprime
