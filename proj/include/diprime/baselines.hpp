#pragma once

#include <memory>
#include <string>

#include "diprime/tree.hpp"

namespace diprime {

// Differentially private extremely-randomized tree: thresholds drawn
// uniformly from the attribute ranges (data-independent, so the structure
// costs no budget) and the whole budget epsilon_total spent privatizing the
// leaves. The ledger records exactly epsilon_total.
std::unique_ptr<TreeNode> fit_dp_ert_tree(const Dataset& data,
                                          const TreeConfig& config,
                                          const Rng& tree_rng,
                                          BudgetLedger& ledger,
                                          const std::string& ledger_prefix = "");

// Non-private reference with exact median splits (threshold at sorted[n/2],
// so n even gives an (n/2, n/2) partition and n odd gives
// ((n-1)/2, (n+1)/2)), uniformly selected attributes and exact leaf
// statistics.
std::unique_ptr<TreeNode> fit_median_tree(const Dataset& data,
                                          const TreeConfig& config,
                                          const Rng& tree_rng);

// Non-private greedy reference: every active attribute is scanned and the
// utility-maximizing threshold (midpoints between distinct adjacent values)
// or category partition is taken. Deterministic up to first-maximum
// tie-breaking.
std::unique_ptr<TreeNode> fit_greedy_tree(const Dataset& data,
                                          const TreeConfig& config,
                                          const Rng& tree_rng);

}  // namespace diprime
