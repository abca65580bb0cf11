#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "diprime/dataset.hpp"
#include "diprime/splits.hpp"

namespace diprime {

// Sensitivity of the mean of N targets bounded in [-B, B] under add/remove
// of one record: 2B / N.
double sens_mean(double B, std::size_t n);

// Sensitivity of the mean squared error (variance) of N targets bounded in
// [-B, B]: 4 B^2 / N.
double sens_mse(double B, std::size_t n);

// Regression guarantee for one private depth-1 split with leaf budget
// epsilon_leaf: with probability at least 1 - zeta_t (the chance that a
// child receives at most t records),
//   E[SSE_private] - SSE_exact <= 4 B^2 N - 8 B^2 t + 16 B^2 / (epsilon_leaf^2 t).
double thm1_sse_bound(double B, std::size_t n, std::size_t t, double epsilon_leaf);

// Classification counterpart: with minimum leaf purity theta_m >= 1/2,
//   Acc_exact - E[Acc_private]
//     <= {epsilon_leaf t (2 theta_m - 1) / 4 + 1/2}
//        * exp(-epsilon_leaf t (2 theta_m - 1)).
double thm2_acc_bound(double epsilon_leaf, std::size_t t, double theta_m);

// Balance guarantee of the private median split: if the N - 2t centermost
// values span d inside a range of length R, the probability that both
// children receive at least t records is at least
//   d / (R e^{-epsilon_split} + d (1 - e^{-epsilon_split})).
double thm3_balance_prob(double R, double d, double epsilon_split);

// Probability that Laplace(1/epsilon_leaf) count noise flips a majority of
// gap |n1 - n0|:
//   {epsilon_leaf |n1 - n0| / 4 + 1/2} * exp(-epsilon_leaf |n1 - n0|).
// Exact for the difference of two independent Laplace draws; equal counts
// give 1/2.
double flip_probability(std::size_t n0, std::size_t n1, double epsilon_leaf);

// One theorem-versus-simulation confrontation. The meaning of the fields
// depends on the check:
//   thm3: bound = theoretical lower bound, estimate = empirical balance
//         probability, holds when estimate >= bound - slack.
//   cor4: bound = collapse probability of the uniform split, estimate =
//         collapse probability of the private median split, holds when
//         estimate <= bound + slack.
//   thm1/thm2: bound = empirical fraction of trials with a child at or
//         below t records (the theorem's failure allowance), estimate =
//         fraction of trials whose realized gap exceeds the theorem bound,
//         holds when estimate <= bound + slack.
//   flip: bound = 3 (sigmas), estimate = worst z-score across the triples,
//         holds when estimate <= bound.
struct BoundReport {
  std::string theorem;
  std::string scenario;
  nlohmann::json inputs;
  double bound = 0.0;
  double estimate = 0.0;
  double slack = 0.0;
  bool holds = false;
  long trials = 0;
};

nlohmann::json bound_report_to_json(const BoundReport& report);

// Pinned synthetic setting for a confrontation.
struct ConfrontScenario {
  std::string label;
  std::size_t n = 100;
  std::size_t t = 10;
  double range_lo = 0.0;
  double range_hi = 1.0;
  double core_width = 0.1;      // span of the centermost n - 2t values
  double epsilon_split = 1.0;
  double epsilon_leaf = 1.0;
  double B = 1.0;
  double purity = 0.9;          // thm2: label homogeneity
  long trials = 0;              // 0: use the caller's default
  std::uint64_t seed = 1;
  // Split mechanism for thm3/cor4. The balance bound is stated for the
  // exponential mechanism over interval lengths; running it under
  // permute-and-flip (uniform over intervals) is expected to break it on
  // spread-controlled data, which makes for a useful negative control.
  SplitMech mech = SplitMech::exponential;
};

// Run `theorem` in {"thm1","thm2","thm3","cor4","flip"} against simulation.
BoundReport monte_carlo_confront(const std::string& theorem,
                                 const ConfrontScenario& scenario,
                                 long default_trials);

// The checks run by default: three thm3 settings, two cor4 settings, one
// thm1, one thm2 and the flip-probability grid.
std::vector<std::pair<std::string, ConfrontScenario>> default_verification_suite();

}  // namespace diprime
