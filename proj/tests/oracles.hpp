// Independent reference implementations the tests check the library against.
// Everything here is deliberately brute-force: exhaustive enumeration and
// closed forms only, no shared code paths with the library internals.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "diprime/mechanisms.hpp"

namespace oracle {

// Exact outcome distribution of permute-and-flip by enumerating all k!
// permutation orders (k <= 8). Probabilities are indexed by candidate
// position, not outcome_id.
inline std::vector<double> permute_flip_exact_pmf(
    const std::vector<diprime::ScoredOutcome>& candidates, double sensitivity,
    double epsilon) {
  const std::size_t k = candidates.size();
  if (k == 0 || k > 8) throw std::invalid_argument("oracle: need 1..8 candidates");
  double q_max = candidates[0].score;
  for (const auto& c : candidates) q_max = std::max(q_max, c.score);
  const double rate = epsilon == 0.0 ? 0.0 : epsilon / (2.0 * sensitivity);
  std::vector<double> accept(k);
  for (std::size_t i = 0; i < k; ++i) {
    accept[i] = std::min(1.0, std::exp(rate * (candidates[i].score - q_max)));
  }

  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> pmf(k, 0.0);
  double n_perms = 0.0;
  do {
    double reach = 1.0;
    for (std::size_t idx : perm) {
      pmf[idx] += reach * accept[idx];
      reach *= 1.0 - accept[idx];
      if (reach == 0.0) break;
    }
    n_perms += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (double& p : pmf) p /= n_perms;
  return pmf;
}

inline double expected_score(const std::vector<double>& pmf,
                             const std::vector<diprime::ScoredOutcome>& candidates) {
  double e = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) e += pmf[i] * candidates[i].score;
  return e;
}

inline double tv_distance(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("oracle: pmf size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return 0.5 * d;
}

// Empirical distribution over outcomes 0..k-1 from `draws` calls of `sample`.
inline std::vector<double> empirical_pmf(std::size_t k, long draws,
                                         const std::function<std::size_t()>& sample) {
  std::vector<double> freq(k, 0.0);
  for (long i = 0; i < draws; ++i) {
    const std::size_t outcome = sample();
    if (outcome >= k) throw std::runtime_error("oracle: outcome out of range");
    freq[outcome] += 1.0;
  }
  for (double& f : freq) f /= static_cast<double>(draws);
  return freq;
}

}  // namespace oracle
