#include "diprime/baselines.hpp"

namespace diprime {

std::unique_ptr<TreeNode> fit_dp_ert_tree(const Dataset& data,
                                          const TreeConfig& config,
                                          const Rng& tree_rng,
                                          BudgetLedger& ledger,
                                          const std::string& ledger_prefix) {
  return detail::fit_tree_with_algo(detail::TreeAlgo::dp_ert, data, config,
                                    tree_rng, ledger, ledger_prefix);
}

std::unique_ptr<TreeNode> fit_median_tree(const Dataset& data,
                                          const TreeConfig& config,
                                          const Rng& tree_rng) {
  BudgetLedger unused;
  return detail::fit_tree_with_algo(detail::TreeAlgo::exact_median, data, config,
                                    tree_rng, unused, "");
}

std::unique_ptr<TreeNode> fit_greedy_tree(const Dataset& data,
                                          const TreeConfig& config,
                                          const Rng& tree_rng) {
  BudgetLedger unused;
  return detail::fit_tree_with_algo(detail::TreeAlgo::greedy, data, config,
                                    tree_rng, unused, "");
}

}  // namespace diprime
