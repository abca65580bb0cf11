#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "diprime/rng.hpp"

namespace diprime {

// Global sensitivity of the score being privatized: the largest change the
// addition or removal of a single record can cause. Must be finite and
// non-negative.
struct Sensitivity {
  double value = 0.0;

  Sensitivity() = default;
  explicit Sensitivity(double v);
};

// One candidate outcome for a selection mechanism. `base_weight` is the base
// measure assigned to the outcome (interval length for a continuous range,
// 1 for plain discrete choices); it must be non-negative.
struct ScoredOutcome {
  std::size_t outcome_id = 0;
  double score = 0.0;
  double base_weight = 1.0;
};

// Laplace(0, scale) via inverse CDF. u must lie in (0, 1); u = 0.5 maps to 0
// exactly. scale = 0 is allowed and returns 0 (the noiseless limit).
double laplace_inverse_cdf(double u, double scale);

// One Laplace(0, scale) draw, consuming a single uniform from rng.
double sample_laplace(double scale, Rng& rng);

// Selection probabilities of the exponential mechanism,
//   P(i) ∝ base_weight_i * exp(epsilon * score_i / (2 * sensitivity)),
// returned in candidate order. epsilon = 0 degenerates to the normalized
// base measure.
std::vector<double> exp_mechanism_pmf(std::span<const ScoredOutcome> candidates,
                                      Sensitivity sensitivity, double epsilon);

// Draw one candidate from the exponential mechanism; returns its outcome_id.
std::size_t exp_mechanism(std::span<const ScoredOutcome> candidates,
                          Sensitivity sensitivity, double epsilon, Rng& rng);

// Permute-and-flip: walk the candidates in uniformly random order and accept
// candidate i with probability exp(epsilon * (score_i - max_score) /
// (2 * sensitivity)). Always terminates because maximal candidates are
// accepted surely, and its expected score never falls below the exponential
// mechanism's. Defined over a uniform base measure: all base_weights must be
// equal (callers drop zero-measure candidates beforehand).
std::size_t permute_flip(std::span<const ScoredOutcome> candidates,
                         Sensitivity sensitivity, double epsilon, Rng& rng);

// How charges compose in the budget ledger. Sequential charges add;
// parallel charges within one group (same label) act on disjoint slices of
// the data, so the group costs only its maximum.
enum class Composition { sequential, parallel };

struct LedgerEntry {
  std::string label;
  double epsilon = 0.0;
  Composition kind = Composition::sequential;
};

// Append-only record of privacy spending. total() is the privacy cost of
// everything recorded: the sum of sequential entries plus, for each parallel
// group, the maximum epsilon charged under that group's label.
class BudgetLedger {
 public:
  void charge_sequential(const std::string& label, double epsilon);
  void charge_parallel(const std::string& group_label, double epsilon);

  // Fold another ledger into this one; labels get `prefix` prepended so that
  // charges against distinct data slices stay in distinct parallel groups.
  void merge(const BudgetLedger& other, const std::string& prefix = "");

  double total() const;
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  void charge(const std::string& label, double epsilon, Composition kind);
  std::vector<LedgerEntry> entries_;
};

// Tree fitting variant: how the split threshold and the attribute are
// selected at each internal node.
enum class Variant { random_attr, exp_mech, flip };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Per-tree privacy budget and its fixed decomposition over the fitting
// stages. With total budget epsilon and leaf fraction (1 - rho):
//   epsilon_leaf  = (1 - rho) * epsilon
//   random_attr:   epsilon_split = rho * epsilon / d_max, epsilon_attr = 0
//   exp_mech/flip: epsilon_split = epsilon_attr = rho * epsilon / (2 * d_max)
// so that epsilon_leaf + d_max * (epsilon_split + epsilon_attr) = epsilon.
struct PrivacyBudget {
  double epsilon_total = 1.0;
  double rho = 0.5;
  int d_max = 5;
  Variant variant = Variant::random_attr;

  PrivacyBudget() = default;
  PrivacyBudget(double epsilon_total, double rho, int d_max, Variant variant);

  double epsilon_leaf() const;
  double epsilon_split() const;
  double epsilon_attr() const;
};

}  // namespace diprime
