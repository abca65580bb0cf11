#include "diprime/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace diprime {

namespace {

void check_epsilon(double epsilon) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw std::invalid_argument("epsilon must be finite and non-negative");
  }
}

void check_candidates(std::span<const ScoredOutcome> candidates,
                      Sensitivity sensitivity, double epsilon) {
  if (candidates.empty()) {
    throw std::invalid_argument("selection requires at least one candidate");
  }
  check_epsilon(epsilon);
  if (epsilon > 0.0 && sensitivity.value <= 0.0) {
    throw std::invalid_argument(
        "selection with epsilon > 0 requires positive sensitivity");
  }
  double total_weight = 0.0;
  for (const auto& c : candidates) {
    if (!std::isfinite(c.score)) {
      throw std::invalid_argument("candidate scores must be finite");
    }
    if (!std::isfinite(c.base_weight) || c.base_weight < 0.0) {
      throw std::invalid_argument("base weights must be finite and non-negative");
    }
    total_weight += c.base_weight;
  }
  if (total_weight <= 0.0) {
    throw std::invalid_argument("at least one candidate needs positive base weight");
  }
}

}  // namespace

Sensitivity::Sensitivity(double v) : value(v) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument("sensitivity must be finite and non-negative");
  }
}

double laplace_inverse_cdf(double u, double scale) {
  if (!std::isfinite(scale) || scale < 0.0) {
    throw std::invalid_argument("laplace scale must be finite and non-negative");
  }
  if (!(u > 0.0 && u < 1.0)) {
    throw std::invalid_argument("laplace_inverse_cdf requires u in (0, 1)");
  }
  if (scale == 0.0) return 0.0;
  return u < 0.5 ? scale * std::log(2.0 * u) : -scale * std::log(2.0 * (1.0 - u));
}

double sample_laplace(double scale, Rng& rng) {
  return laplace_inverse_cdf(rng.uniform_open(), scale);
}

std::vector<double> exp_mechanism_pmf(std::span<const ScoredOutcome> candidates,
                                      Sensitivity sensitivity, double epsilon) {
  check_candidates(candidates, sensitivity, epsilon);
  std::vector<double> weights(candidates.size(), 0.0);
  if (epsilon == 0.0) {
    // Scores are ignored; the mechanism reduces to the base measure.
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      weights[i] = candidates[i].base_weight;
    }
  } else {
    // Shift scores by the best achievable one so the exponentials stay in
    // (0, 1] regardless of scale.
    double max_score = -HUGE_VAL;
    for (const auto& c : candidates) {
      if (c.base_weight > 0.0) max_score = std::max(max_score, c.score);
    }
    const double rate = epsilon / (2.0 * sensitivity.value);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (candidates[i].base_weight > 0.0) {
        weights[i] = candidates[i].base_weight *
                     std::exp(rate * (candidates[i].score - max_score));
      }
    }
  }
  double z = 0.0;
  for (double w : weights) z += w;
  for (double& w : weights) w /= z;
  return weights;
}

std::size_t exp_mechanism(std::span<const ScoredOutcome> candidates,
                          Sensitivity sensitivity, double epsilon, Rng& rng) {
  const std::vector<double> pmf = exp_mechanism_pmf(candidates, sensitivity, epsilon);
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t picked = candidates.size() - 1;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    cum += pmf[i];
    if (u < cum) {
      picked = i;
      break;
    }
  }
  // Guard against rounding at the top of the CDF: never return a
  // zero-probability candidate.
  while (pmf[picked] == 0.0) --picked;
  return candidates[picked].outcome_id;
}

std::size_t permute_flip(std::span<const ScoredOutcome> candidates,
                         Sensitivity sensitivity, double epsilon, Rng& rng) {
  check_candidates(candidates, sensitivity, epsilon);
  for (const auto& c : candidates) {
    if (c.base_weight != candidates.front().base_weight) {
      throw std::invalid_argument(
          "permute_flip is defined over a uniform base measure; "
          "candidate weights must be equal");
    }
  }
  double max_score = -HUGE_VAL;
  for (const auto& c : candidates) max_score = std::max(max_score, c.score);

  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  const double rate = epsilon > 0.0 ? epsilon / (2.0 * sensitivity.value) : 0.0;
  for (std::size_t i : order) {
    const double p = std::exp(rate * (candidates[i].score - max_score));
    if (p >= 1.0 || rng.uniform() < p) return candidates[i].outcome_id;
  }
  // Unreachable: a maximal-score candidate is always accepted.
  return candidates[order.back()].outcome_id;
}

void BudgetLedger::charge(const std::string& label, double epsilon,
                          Composition kind) {
  if (label.empty()) throw std::invalid_argument("ledger labels must be non-empty");
  check_epsilon(epsilon);
  entries_.push_back(LedgerEntry{label, epsilon, kind});
}

void BudgetLedger::charge_sequential(const std::string& label, double epsilon) {
  charge(label, epsilon, Composition::sequential);
}

void BudgetLedger::charge_parallel(const std::string& group_label, double epsilon) {
  charge(group_label, epsilon, Composition::parallel);
}

void BudgetLedger::merge(const BudgetLedger& other, const std::string& prefix) {
  for (const auto& e : other.entries_) {
    charge(prefix + e.label, e.epsilon, e.kind);
  }
}

double BudgetLedger::total() const {
  double sequential_sum = 0.0;
  std::map<std::string, double> parallel_max;
  for (const auto& e : entries_) {
    if (e.kind == Composition::sequential) {
      sequential_sum += e.epsilon;
    } else {
      auto [it, inserted] = parallel_max.try_emplace(e.label, e.epsilon);
      if (!inserted) it->second = std::max(it->second, e.epsilon);
    }
  }
  double total = sequential_sum;
  for (const auto& [label, eps] : parallel_max) total += eps;
  return total;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::random_attr: return "random_attr";
    case Variant::exp_mech: return "exp";
    case Variant::flip: return "flip";
  }
  throw std::invalid_argument("unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "random_attr") return Variant::random_attr;
  if (name == "exp") return Variant::exp_mech;
  if (name == "flip") return Variant::flip;
  throw std::invalid_argument("unknown variant name: " + name);
}

PrivacyBudget::PrivacyBudget(double epsilon_total, double rho, int d_max,
                             Variant variant)
    : epsilon_total(epsilon_total), rho(rho), d_max(d_max), variant(variant) {
  if (!std::isfinite(epsilon_total) || epsilon_total <= 0.0) {
    throw std::invalid_argument("epsilon_total must be positive");
  }
  if (!(rho > 0.0 && rho < 1.0)) {
    throw std::invalid_argument("rho must lie strictly between 0 and 1");
  }
  if (d_max < 1 || d_max > 48) {
    throw std::invalid_argument("d_max must lie in [1, 48]");
  }
}

double PrivacyBudget::epsilon_leaf() const { return (1.0 - rho) * epsilon_total; }

double PrivacyBudget::epsilon_split() const {
  if (variant == Variant::random_attr) return rho * epsilon_total / d_max;
  return rho * epsilon_total / (2.0 * d_max);
}

double PrivacyBudget::epsilon_attr() const {
  if (variant == Variant::random_attr) return 0.0;
  return rho * epsilon_total / (2.0 * d_max);
}

}  // namespace diprime
