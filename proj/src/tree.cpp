#include "diprime/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace diprime {

using nlohmann::json;

TreeConfig::TreeConfig(int K, double B, PrivacyBudget budget)
    : K(K), B(B), budget(budget) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  if (!std::isfinite(B) || B <= 0.0) {
    throw std::invalid_argument("target bound B must be positive");
  }
}

bool SplitRule::routes_left(const Dataset& data, std::size_t row) const {
  if (is_numeric) return data.numeric_value(row, attribute) < threshold;
  return std::binary_search(left_categories.begin(), left_categories.end(),
                            data.category(row, attribute));
}

LeafStat privatize_leaf_regression(double sum, std::size_t count, double B,
                                   double epsilon_leaf, Rng& rng) {
  if (!std::isfinite(B) || B <= 0.0) {
    throw std::invalid_argument("target bound B must be positive");
  }
  if (!(epsilon_leaf > 0.0)) {
    throw std::invalid_argument("epsilon_leaf must be positive");
  }
  LeafStat stat;
  if (count == 0) return stat;  // empty leaf: prior mean 0, nothing to privatize
  const double scale = 2.0 * B / (static_cast<double>(count) * epsilon_leaf);
  stat.mean = std::clamp(sum / static_cast<double>(count) +
                             sample_laplace(scale, rng),
                         -B, B);
  return stat;
}

LeafStat privatize_leaf_classification(std::span<const std::size_t> counts,
                                       double epsilon_leaf, Rng& rng) {
  if (!(epsilon_leaf > 0.0)) {
    throw std::invalid_argument("epsilon_leaf must be positive");
  }
  if (counts.empty()) {
    throw std::invalid_argument("classification leaves need at least one class");
  }
  const double scale = 1.0 / epsilon_leaf;
  LeafStat stat;
  stat.counts.reserve(counts.size());
  for (std::size_t c : counts) {
    stat.counts.push_back(
        std::max(0.0, static_cast<double>(c) + sample_laplace(scale, rng)));
  }
  return stat;
}

namespace {

using detail::TreeAlgo;

// Current per-attribute range at a node: a numeric sub-interval or the set
// of category ids still reachable.
struct AttrRange {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<int> cats;
};

struct Candidate {
  SplitRule rule;
  double utility = 0.0;  // filled only when the algorithm uses it
};

class TreeFitter {
 public:
  TreeFitter(TreeAlgo algo, const Dataset& data, const TreeConfig& cfg,
             const Rng& tree_rng)
      : algo_(algo), data_(data), cfg_(cfg), base_(tree_rng) {
    if (data.task == Task::classification && data.n_classes() < 2) {
      throw std::invalid_argument("classification data needs at least two classes");
    }
    switch (algo_) {
      case TreeAlgo::diprime:
        eps_split_ = cfg.budget.epsilon_split();
        eps_attr_ = cfg.budget.epsilon_attr();
        eps_leaf_ = cfg.budget.epsilon_leaf();
        private_leaves_ = true;
        break;
      case TreeAlgo::dp_ert:
        eps_leaf_ = cfg.budget.epsilon_total;
        private_leaves_ = true;
        break;
      case TreeAlgo::exact_median:
      case TreeAlgo::greedy:
        break;
    }
  }

  std::unique_ptr<TreeNode> fit(BudgetLedger& ledger, const std::string& prefix) {
    std::vector<std::size_t> rows(data_.n_rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;

    std::vector<AttrRange> ranges(data_.n_attributes());
    std::vector<int> active;
    for (int a = 0; a < data_.n_attributes(); ++a) {
      const AttributeSchema& schema = data_.attributes[a];
      if (schema.kind == AttributeSchema::Kind::numeric) {
        ranges[a].lo = schema.lo;
        ranges[a].hi = schema.hi;
      } else {
        ranges[a].cats.resize(schema.categories.size());
        for (std::size_t c = 0; c < schema.categories.size(); ++c) {
          ranges[a].cats[c] = static_cast<int>(c);
        }
      }
      active.push_back(a);
    }

    auto root = fit_node(std::move(rows), ranges, active, 0, 1);

    // The per-level budget is reserved up front, so a tree whose growth
    // stops early (attribute exhaustion) still pays for every level.
    if (algo_ == TreeAlgo::diprime) {
      for (int level = 0; level < cfg_.d_max(); ++level) {
        const std::string tag = prefix + "level" + std::to_string(level);
        ledger.charge_parallel(tag + "/split", eps_split_);
        if (eps_attr_ > 0.0) ledger.charge_parallel(tag + "/attr", eps_attr_);
      }
    }
    if (private_leaves_) ledger.charge_parallel(prefix + "leaf", eps_leaf_);
    return root;
  }

 private:
  Rng node_rng(std::uint64_t path, std::uint64_t purpose) const {
    return base_.derive(path).derive(purpose);
  }

  std::unique_ptr<TreeNode> fit_node(std::vector<std::size_t> rows,
                                     const std::vector<AttrRange>& ranges,
                                     const std::vector<int>& active, int depth,
                                     std::uint64_t path) {
    if (depth >= cfg_.d_max() || active.empty()) {
      return make_leaf(rows, depth, path);
    }

    // Candidate attributes: a K-subset for the randomized algorithms, every
    // active attribute for the exhaustive greedy reference.
    std::vector<int> cand_attrs;
    if (algo_ == TreeAlgo::greedy) {
      cand_attrs = active;
    } else {
      Rng sample_rng = node_rng(path, salt::attr_sample);
      const std::size_t k =
          std::min(static_cast<std::size_t>(cfg_.K), active.size());
      for (std::size_t i : sample_rng.sample_without_replacement(active.size(), k)) {
        cand_attrs.push_back(active[i]);
      }
    }

    std::vector<Candidate> candidates;
    candidates.reserve(cand_attrs.size());
    for (int a : cand_attrs) {
      candidates.push_back(make_candidate(a, rows, ranges[a], path));
    }

    const std::size_t chosen = choose_candidate(candidates, rows, path);
    const SplitRule rule = candidates[chosen].rule;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      (rule.routes_left(data_, r) ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    std::vector<AttrRange> left_ranges = ranges;
    std::vector<AttrRange> right_ranges = ranges;
    const int a = rule.attribute;
    if (rule.is_numeric) {
      left_ranges[a].hi = rule.threshold;
      right_ranges[a].lo = rule.threshold;
    } else {
      left_ranges[a].cats = rule.left_categories;
      std::vector<int> rest;
      for (int c : ranges[a].cats) {
        if (!std::binary_search(rule.left_categories.begin(),
                                rule.left_categories.end(), c)) {
          rest.push_back(c);
        }
      }
      right_ranges[a].cats = std::move(rest);
    }

    auto surviving_active = [&](const std::vector<AttrRange>& child_ranges) {
      std::vector<int> out;
      for (int attr : active) {
        const AttrRange& r = child_ranges[attr];
        const bool splittable =
            data_.attributes[attr].kind == AttributeSchema::Kind::numeric
                ? r.lo < r.hi
                : r.cats.size() >= 2;
        if (splittable) out.push_back(attr);
      }
      return out;
    };

    auto node = std::make_unique<TreeNode>();
    node->depth = depth;
    node->split = rule;
    node->left = fit_node(std::move(left_rows), left_ranges,
                          surviving_active(left_ranges), depth + 1, 2 * path);
    node->right = fit_node(std::move(right_rows), right_ranges,
                           surviving_active(right_ranges), depth + 1, 2 * path + 1);
    return node;
  }

  Candidate make_candidate(int a, const std::vector<std::size_t>& rows,
                           const AttrRange& range, std::uint64_t path) {
    Rng split_rng =
        node_rng(path, salt::split_draw).derive(static_cast<std::uint64_t>(a));
    const bool numeric =
        data_.attributes[a].kind == AttributeSchema::Kind::numeric;
    Candidate cand;
    if (numeric) {
      std::vector<double> values;
      values.reserve(rows.size());
      for (std::size_t r : rows) values.push_back(data_.numeric_value(r, a));
      switch (algo_) {
        case TreeAlgo::diprime: {
          const NumericSplit s = private_median_split(
              a, values, range.lo, range.hi, eps_split_,
              split_mech_for(cfg_.variant()), split_rng);
          cand.rule = SplitRule{a, true, s.threshold, {}};
          break;
        }
        case TreeAlgo::dp_ert: {
          // Data-independent: uniform over the node's current range.
          const double r =
              range.lo + (range.hi - range.lo) * split_rng.uniform_open();
          cand.rule = SplitRule{a, true, r, {}};
          break;
        }
        case TreeAlgo::exact_median: {
          double r;
          if (values.empty()) {
            r = 0.5 * (range.lo + range.hi);
          } else {
            // Threshold at sorted[n/2] with "x < threshold routes left"
            // yields the (floor(n/2), ceil(n/2)) median partition.
            std::nth_element(values.begin(), values.begin() + values.size() / 2,
                             values.end());
            r = values[values.size() / 2];
          }
          cand.rule = SplitRule{a, true, r, {}};
          break;
        }
        case TreeAlgo::greedy: {
          cand = greedy_numeric(a, rows, range);
          break;
        }
      }
    } else {
      std::vector<long> counts(range.cats.size(), 0);
      for (std::size_t r : rows) {
        const int c = data_.category(r, a);
        const auto it =
            std::lower_bound(range.cats.begin(), range.cats.end(), c);
        if (it == range.cats.end() || *it != c) {
          throw std::logic_error("record category escaped its node range");
        }
        ++counts[it - range.cats.begin()];
      }
      switch (algo_) {
        case TreeAlgo::diprime: {
          CategoricalSplit s = private_categorical_split(
              a, range.cats, counts, eps_split_, split_mech_for(cfg_.variant()),
              split_rng);
          cand.rule = SplitRule{a, false, 0.0, std::move(s.left_categories)};
          break;
        }
        case TreeAlgo::dp_ert: {
          auto all = enumerate_categorical_splits(
              a, range.cats, std::vector<long>(range.cats.size(), 0));
          cand.rule = SplitRule{
              a, false, 0.0,
              std::move(all[split_rng.index(all.size())].first.left_categories)};
          break;
        }
        case TreeAlgo::exact_median: {
          auto all = enumerate_categorical_splits(a, range.cats, counts);
          std::size_t best = 0;
          for (std::size_t i = 1; i < all.size(); ++i) {
            if (all[i].second > all[best].second) best = i;
          }
          cand.rule =
              SplitRule{a, false, 0.0, std::move(all[best].first.left_categories)};
          break;
        }
        case TreeAlgo::greedy: {
          cand = greedy_categorical(a, rows, range, counts);
          break;
        }
      }
    }
    std::sort(cand.rule.left_categories.begin(), cand.rule.left_categories.end());
    return cand;
  }

  // Utility of a realized candidate split on this node's records.
  double candidate_utility(const SplitRule& rule,
                           const std::vector<std::size_t>& rows) const {
    if (rows.empty()) return 0.0;
    if (data_.task == Task::regression) {
      std::vector<double> left, right;
      for (std::size_t r : rows) {
        (rule.routes_left(data_, r) ? left : right).push_back(data_.targets[r]);
      }
      return split_utility_score(left, right, cfg_.B).score;
    }
    std::vector<int> left, right;
    for (std::size_t r : rows) {
      (rule.routes_left(data_, r) ? left : right).push_back(data_.labels[r]);
    }
    return split_utility_score(left, right, data_.n_classes()).score;
  }

  std::size_t choose_candidate(std::vector<Candidate>& candidates,
                               const std::vector<std::size_t>& rows,
                               std::uint64_t path) {
    if (algo_ == TreeAlgo::greedy) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].utility > candidates[best].utility) best = i;
      }
      return best;
    }
    Rng select_rng = node_rng(path, salt::attr_select);
    if (algo_ == TreeAlgo::diprime && cfg_.variant() != Variant::random_attr) {
      std::vector<double> scores(candidates.size(), 0.0);
      double sensitivity = 1.0;  // empty node: all scores 0, any positive scale
      if (!rows.empty()) {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          scores[i] = candidate_utility(candidates[i].rule, rows);
        }
        sensitivity = data_.task == Task::regression
                          ? 4.0 * cfg_.B * cfg_.B / static_cast<double>(rows.size())
                          : 2.0 / static_cast<double>(rows.size());
      }
      return select_attribute(scores, sensitivity, eps_attr_, cfg_.variant(),
                              select_rng);
    }
    // Uniform: DiPriMe random_attr (zero attribute budget), DP-ERT and the
    // exact-median reference.
    return select_rng.index(candidates.size());
  }

  Candidate greedy_numeric(int a, const std::vector<std::size_t>& rows,
                           const AttrRange& range) {
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(rows.size());
    for (std::size_t r : rows) order.emplace_back(data_.numeric_value(r, a), r);
    std::sort(order.begin(), order.end());

    Candidate cand;
    cand.rule = SplitRule{a, true, 0.5 * (range.lo + range.hi), {}};
    cand.utility = -std::numeric_limits<double>::infinity();
    const std::size_t n = order.size();
    if (n < 2) {
      cand.utility = rows.empty() ? 0.0 : candidate_utility(cand.rule, rows);
      return cand;
    }

    if (data_.task == Task::regression) {
      double total_sum = 0.0, total_sq = 0.0;
      for (const auto& vr : order) {
        const double y = data_.targets[vr.second];
        total_sum += y;
        total_sq += y * y;
      }
      double left_sum = 0.0, left_sq = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        const double y = data_.targets[order[i - 1].second];
        left_sum += y;
        left_sq += y * y;
        if (order[i - 1].first == order[i].first) continue;
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse_left = left_sq - left_sum * left_sum / i;
        const double sse_right =
            right_sq - right_sum * right_sum / static_cast<double>(n - i);
        const double score = -(sse_left + sse_right) / static_cast<double>(n);
        if (score > cand.utility) {
          cand.utility = score;
          cand.rule.threshold = 0.5 * (order[i - 1].first + order[i].first);
        }
      }
    } else {
      const int n_classes = data_.n_classes();
      std::vector<long> total(n_classes, 0), left(n_classes, 0);
      for (const auto& vr : order) ++total[data_.labels[vr.second]];
      for (std::size_t i = 1; i < n; ++i) {
        ++left[data_.labels[order[i - 1].second]];
        if (order[i - 1].first == order[i].first) continue;
        long max_left = 0, max_right = 0;
        for (int c = 0; c < n_classes; ++c) {
          max_left = std::max(max_left, left[c]);
          max_right = std::max(max_right, total[c] - left[c]);
        }
        const double score =
            -static_cast<double>(static_cast<long>(n) - max_left - max_right) /
            static_cast<double>(n);
        if (score > cand.utility) {
          cand.utility = score;
          cand.rule.threshold = 0.5 * (order[i - 1].first + order[i].first);
        }
      }
    }
    if (!std::isfinite(cand.utility)) {
      // All values identical: no separating threshold exists.
      cand.rule.threshold = 0.5 * (range.lo + range.hi);
      cand.utility = candidate_utility(cand.rule, rows);
    }
    return cand;
  }

  Candidate greedy_categorical(int a, const std::vector<std::size_t>& rows,
                               const AttrRange& range,
                               const std::vector<long>& counts) {
    auto all = enumerate_categorical_splits(a, range.cats, counts);
    Candidate cand;
    cand.utility = -std::numeric_limits<double>::infinity();
    for (auto& entry : all) {
      SplitRule rule{a, false, 0.0, entry.first.left_categories};
      const double u = rows.empty() ? 0.0 : candidate_utility(rule, rows);
      if (u > cand.utility) {
        cand.utility = u;
        cand.rule = std::move(rule);
      }
    }
    return cand;
  }

  std::unique_ptr<TreeNode> make_leaf(const std::vector<std::size_t>& rows,
                                      int depth, std::uint64_t path) {
    auto node = std::make_unique<TreeNode>();
    node->depth = depth;
    Rng leaf_rng = node_rng(path, salt::leaf_noise);
    if (data_.task == Task::regression) {
      double sum = 0.0;
      for (std::size_t r : rows) sum += data_.targets[r];
      if (private_leaves_) {
        node->stat = privatize_leaf_regression(sum, rows.size(), cfg_.B,
                                               eps_leaf_, leaf_rng);
      } else {
        node->stat.mean = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
      }
    } else {
      std::vector<std::size_t> counts(data_.n_classes(), 0);
      for (std::size_t r : rows) ++counts[data_.labels[r]];
      if (private_leaves_) {
        node->stat = privatize_leaf_classification(counts, eps_leaf_, leaf_rng);
      } else {
        node->stat.counts.assign(counts.begin(), counts.end());
      }
    }
    return node;
  }

  TreeAlgo algo_;
  const Dataset& data_;
  const TreeConfig& cfg_;
  Rng base_;
  double eps_split_ = 0.0;
  double eps_attr_ = 0.0;
  double eps_leaf_ = 0.0;
  bool private_leaves_ = false;
};

}  // namespace

namespace detail {

std::unique_ptr<TreeNode> fit_tree_with_algo(TreeAlgo algo, const Dataset& data,
                                             const TreeConfig& config,
                                             const Rng& tree_rng,
                                             BudgetLedger& ledger,
                                             const std::string& ledger_prefix) {
  TreeFitter fitter(algo, data, config, tree_rng);
  return fitter.fit(ledger, ledger_prefix);
}

}  // namespace detail

std::unique_ptr<TreeNode> fit_tree(const Dataset& data, const TreeConfig& config,
                                   const Rng& tree_rng, BudgetLedger& ledger,
                                   const std::string& ledger_prefix) {
  return detail::fit_tree_with_algo(detail::TreeAlgo::diprime, data, config,
                                    tree_rng, ledger, ledger_prefix);
}

const TreeNode& route_to_leaf(const TreeNode& root, const Dataset& data,
                              std::size_t row) {
  const TreeNode* node = &root;
  while (!node->is_leaf()) {
    node = node->split->routes_left(data, row) ? node->left.get()
                                               : node->right.get();
  }
  return *node;
}

double predict_regression(const TreeNode& root, const Dataset& data,
                          std::size_t row) {
  return route_to_leaf(root, data, row).stat.mean;
}

int predict_classification(const TreeNode& root, const Dataset& data,
                           std::size_t row, Rng& rng) {
  const LeafStat& stat = route_to_leaf(root, data, row).stat;
  if (stat.counts.empty()) {
    throw std::invalid_argument("leaf carries no class counts");
  }
  const double best = *std::max_element(stat.counts.begin(), stat.counts.end());
  std::vector<int> argmax;
  for (std::size_t c = 0; c < stat.counts.size(); ++c) {
    if (stat.counts[c] == best) argmax.push_back(static_cast<int>(c));
  }
  return argmax.size() == 1 ? argmax.front() : argmax[rng.index(argmax.size())];
}

json tree_to_json(const TreeNode& node) {
  json j;
  j["depth"] = node.depth;
  if (node.is_leaf()) {
    j["kind"] = "leaf";
    if (node.stat.counts.empty()) {
      j["mean"] = node.stat.mean;
    } else {
      j["counts"] = node.stat.counts;
    }
  } else {
    j["kind"] = "internal";
    j["attribute"] = node.split->attribute;
    if (node.split->is_numeric) {
      j["threshold"] = node.split->threshold;
    } else {
      j["left_categories"] = node.split->left_categories;
    }
    j["left"] = tree_to_json(*node.left);
    j["right"] = tree_to_json(*node.right);
  }
  return j;
}

std::unique_ptr<TreeNode> tree_from_json(const json& j) {
  auto node = std::make_unique<TreeNode>();
  node->depth = j.at("depth").get<int>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "leaf") {
    if (j.contains("counts")) {
      node->stat.counts = j.at("counts").get<std::vector<double>>();
    } else {
      node->stat.mean = j.at("mean").get<double>();
    }
  } else if (kind == "internal") {
    SplitRule rule;
    rule.attribute = j.at("attribute").get<int>();
    if (j.contains("threshold")) {
      rule.is_numeric = true;
      rule.threshold = j.at("threshold").get<double>();
    } else {
      rule.is_numeric = false;
      rule.left_categories = j.at("left_categories").get<std::vector<int>>();
    }
    node->split = std::move(rule);
    node->left = tree_from_json(j.at("left"));
    node->right = tree_from_json(j.at("right"));
  } else {
    throw std::runtime_error("unknown tree node kind: " + kind);
  }
  return node;
}

}  // namespace diprime
