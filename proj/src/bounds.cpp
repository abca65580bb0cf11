#include "diprime/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diprime/mechanisms.hpp"

namespace diprime {

using nlohmann::json;

namespace {

void check_b(double B) {
  if (!std::isfinite(B) || B <= 0.0) {
    throw std::invalid_argument("target bound B must be positive");
  }
}

void check_eps(double eps) {
  if (!std::isfinite(eps) || eps < 0.0) {
    throw std::invalid_argument("epsilon must be finite and non-negative");
  }
}

}  // namespace

double sens_mean(double B, std::size_t n) {
  check_b(B);
  if (n == 0) throw std::invalid_argument("sensitivity needs n >= 1");
  return 2.0 * B / static_cast<double>(n);
}

double sens_mse(double B, std::size_t n) {
  check_b(B);
  if (n == 0) throw std::invalid_argument("sensitivity needs n >= 1");
  return 4.0 * B * B / static_cast<double>(n);
}

double thm1_sse_bound(double B, std::size_t n, std::size_t t,
                      double epsilon_leaf) {
  check_b(B);
  if (t == 0 || 2 * t >= n) throw std::invalid_argument("need 0 < t < n/2");
  if (!(epsilon_leaf > 0.0) || !std::isfinite(epsilon_leaf)) {
    throw std::invalid_argument("epsilon_leaf must be positive");
  }
  const double b2 = B * B;
  return 4.0 * b2 * static_cast<double>(n) - 8.0 * b2 * static_cast<double>(t) +
         16.0 * b2 / (epsilon_leaf * epsilon_leaf * static_cast<double>(t));
}

double thm2_acc_bound(double epsilon_leaf, std::size_t t, double theta_m) {
  check_eps(epsilon_leaf);
  if (t == 0) throw std::invalid_argument("need t >= 1");
  if (!(theta_m >= 0.5 && theta_m <= 1.0)) {
    throw std::invalid_argument("purity theta_m must lie in [0.5, 1]");
  }
  const double x = epsilon_leaf * static_cast<double>(t) * (2.0 * theta_m - 1.0);
  return (x / 4.0 + 0.5) * std::exp(-x);
}

double thm3_balance_prob(double R, double d, double epsilon_split) {
  check_eps(epsilon_split);
  if (!(d > 0.0 && d <= R)) throw std::invalid_argument("need 0 < d <= R");
  const double e = std::exp(-epsilon_split);
  return d / (R * e + d * (1.0 - e));
}

double flip_probability(std::size_t n0, std::size_t n1, double epsilon_leaf) {
  check_eps(epsilon_leaf);
  const double gap = n0 > n1 ? static_cast<double>(n0 - n1)
                             : static_cast<double>(n1 - n0);
  const double x = epsilon_leaf * gap;
  return (x / 4.0 + 0.5) * std::exp(-x);
}

json bound_report_to_json(const BoundReport& report) {
  json j;
  j["theorem"] = report.theorem;
  j["scenario"] = report.scenario;
  j["inputs"] = report.inputs;
  j["bound"] = report.bound;
  j["estimate"] = report.estimate;
  j["slack"] = report.slack;
  j["holds"] = report.holds;
  j["trials"] = report.trials;
  return j;
}

namespace {

double binomial_sigma(double p, long trials) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(trials));
}

// Number of sorted values strictly below the threshold.
std::size_t left_count(const std::vector<double>& sorted_values, double r) {
  return static_cast<std::size_t>(
      std::lower_bound(sorted_values.begin(), sorted_values.end(), r) -
      sorted_values.begin());
}

json scenario_inputs(const ConfrontScenario& sc) {
  json j;
  j["n"] = sc.n;
  j["t"] = sc.t;
  j["range"] = {sc.range_lo, sc.range_hi};
  j["seed"] = sc.seed;
  return j;
}

BoundReport confront_thm3(const ConfrontScenario& sc, long trials) {
  Rng data_rng(sc.seed);
  const std::vector<double> values = spread_controlled_values(
      sc.n, sc.t, sc.core_width, sc.range_lo, sc.range_hi, data_rng);
  const double d = values[sc.n - sc.t - 1] - values[sc.t];
  const double R = sc.range_hi - sc.range_lo;

  BoundReport report;
  report.theorem = "thm3";
  report.scenario = sc.label;
  report.trials = trials;
  report.bound = thm3_balance_prob(R, d, sc.epsilon_split);
  report.inputs = scenario_inputs(sc);
  report.inputs["core_span"] = d;
  report.inputs["epsilon_split"] = sc.epsilon_split;

  Rng mech_rng = Rng(sc.seed).derive(0xb0b1);
  long balanced = 0;
  for (long i = 0; i < trials; ++i) {
    const NumericSplit split =
        private_median_split(0, values, sc.range_lo, sc.range_hi,
                             sc.epsilon_split, sc.mech, mech_rng);
    const std::size_t left = left_count(values, split.threshold);
    if (std::min(left, sc.n - left) >= sc.t) ++balanced;
  }
  report.estimate = static_cast<double>(balanced) / static_cast<double>(trials);
  report.slack = 3.0 * binomial_sigma(report.bound, trials);
  report.holds = report.estimate >= report.bound - report.slack;
  return report;
}

BoundReport confront_cor4(const ConfrontScenario& sc, long trials) {
  Rng data_rng(sc.seed);
  const std::vector<double> values = spread_controlled_values(
      sc.n, sc.t, sc.core_width, sc.range_lo, sc.range_hi, data_rng);

  BoundReport report;
  report.theorem = "cor4";
  report.scenario = sc.label;
  report.trials = trials;
  report.inputs = scenario_inputs(sc);
  report.inputs["core_width"] = sc.core_width;
  report.inputs["epsilon_split"] = sc.epsilon_split;

  Rng mech_rng = Rng(sc.seed).derive(0xc0c1);
  Rng rand_rng = Rng(sc.seed).derive(0xc0c2);
  long collapse_median = 0;
  long collapse_random = 0;
  for (long i = 0; i < trials; ++i) {
    const NumericSplit split =
        private_median_split(0, values, sc.range_lo, sc.range_hi,
                             sc.epsilon_split, sc.mech, mech_rng);
    std::size_t left = left_count(values, split.threshold);
    if (std::min(left, sc.n - left) <= sc.t) ++collapse_median;

    const double r = sc.range_lo +
                     (sc.range_hi - sc.range_lo) * rand_rng.uniform_open();
    left = left_count(values, r);
    if (std::min(left, sc.n - left) <= sc.t) ++collapse_random;
  }
  report.estimate =
      static_cast<double>(collapse_median) / static_cast<double>(trials);
  report.bound =
      static_cast<double>(collapse_random) / static_cast<double>(trials);
  report.slack = 3.0 * std::sqrt(binomial_sigma(report.estimate, trials) *
                                     binomial_sigma(report.estimate, trials) +
                                 binomial_sigma(report.bound, trials) *
                                     binomial_sigma(report.bound, trials));
  report.holds = report.estimate <= report.bound + report.slack;
  return report;
}

BoundReport confront_thm1(const ConfrontScenario& sc, long trials) {
  Rng data_rng(sc.seed);
  const std::size_t n = sc.n;
  std::vector<double> values(n);
  for (double& v : values) {
    v = sc.range_lo + (sc.range_hi - sc.range_lo) * data_rng.uniform_open();
  }
  std::sort(values.begin(), values.end());
  // Targets tied to position so that splits genuinely matter, with bounded
  // noise keeping |y| <= B.
  const double mid = 0.5 * (sc.range_lo + sc.range_hi);
  const double half_range = 0.5 * (sc.range_hi - sc.range_lo);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (values[i] - mid) / half_range;
    targets[i] = std::clamp(
        sc.B * (0.8 * z + 0.2 * (2.0 * data_rng.uniform() - 1.0)), -sc.B, sc.B);
  }

  // Prefix sums allow O(1) pooled squared error at any cut position.
  std::vector<double> sum(n + 1, 0.0), sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[i + 1] = sum[i] + targets[i];
    sq[i + 1] = sq[i] + targets[i] * targets[i];
  }
  auto sse_prefix = [&](std::size_t lo, std::size_t hi) {  // rows [lo, hi)
    if (hi == lo) return 0.0;
    const double s = sum[hi] - sum[lo];
    const double q = sq[hi] - sq[lo];
    return q - s * s / static_cast<double>(hi - lo);
  };
  const std::size_t k_med = n / 2;
  const double sse_exact = sse_prefix(0, k_med) + sse_prefix(k_med, n);
  const double bound_value =
      thm1_sse_bound(sc.B, n, sc.t, sc.epsilon_leaf);

  BoundReport report;
  report.theorem = "thm1";
  report.scenario = sc.label;
  report.trials = trials;
  report.inputs = scenario_inputs(sc);
  report.inputs["epsilon_split"] = sc.epsilon_split;
  report.inputs["epsilon_leaf"] = sc.epsilon_leaf;
  report.inputs["B"] = sc.B;
  report.inputs["theorem_bound"] = bound_value;

  Rng mech_rng = Rng(sc.seed).derive(0xa1a1);
  long violations = 0;
  long small_child = 0;
  const double noise_unit = 8.0 * sc.B * sc.B /
                            (sc.epsilon_leaf * sc.epsilon_leaf);
  for (long i = 0; i < trials; ++i) {
    const NumericSplit split =
        private_median_split(0, values, sc.range_lo, sc.range_hi,
                             sc.epsilon_split, SplitMech::exponential, mech_rng);
    const std::size_t k = left_count(values, split.threshold);
    if (std::min(k, n - k) <= sc.t) ++small_child;
    // Conditional expectation of the privatized squared error: exact side
    // errors plus E[Laplace^2] inflation per non-empty side (clamping can
    // only reduce it, so this over-counts and never hides a violation).
    double expected = sse_prefix(0, k) + sse_prefix(k, n);
    if (k > 0) expected += noise_unit / static_cast<double>(k);
    if (k < n) expected += noise_unit / static_cast<double>(n - k);
    if (expected - sse_exact > bound_value) ++violations;
  }
  report.estimate = static_cast<double>(violations) / static_cast<double>(trials);
  report.bound = static_cast<double>(small_child) / static_cast<double>(trials);
  report.slack = 3.0 * binomial_sigma(report.bound, trials);
  report.holds = report.estimate <= report.bound + report.slack;
  return report;
}

BoundReport confront_thm2(const ConfrontScenario& sc, long trials) {
  Rng data_rng(sc.seed);
  const std::size_t n = sc.n;
  std::vector<double> values(n);
  for (double& v : values) {
    v = sc.range_lo + (sc.range_hi - sc.range_lo) * data_rng.uniform_open();
  }
  std::sort(values.begin(), values.end());
  // Labels i.i.d. with the majority class holding `purity` mass everywhere,
  // so any threshold split keeps the same majority on both sides.
  std::vector<int> labels(n);
  for (int& l : labels) l = data_rng.uniform() < sc.purity ? 1 : 0;
  std::vector<std::size_t> ones(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ones[i + 1] = ones[i] + static_cast<std::size_t>(labels[i]);
  }

  auto side_counts = [&](std::size_t lo, std::size_t hi) {
    const std::size_t n1 = ones[hi] - ones[lo];
    return std::pair<std::size_t, std::size_t>{hi - lo - n1, n1};
  };
  auto exact_correct = [&](std::size_t lo, std::size_t hi) {
    const auto [n0, n1] = side_counts(lo, hi);
    return std::max(n0, n1);
  };
  const std::size_t k_med = n / 2;
  const double acc_exact =
      static_cast<double>(exact_correct(0, k_med) + exact_correct(k_med, n)) /
      static_cast<double>(n);

  BoundReport report;
  report.theorem = "thm2";
  report.scenario = sc.label;
  report.trials = trials;
  report.inputs = scenario_inputs(sc);
  report.inputs["epsilon_split"] = sc.epsilon_split;
  report.inputs["epsilon_leaf"] = sc.epsilon_leaf;
  report.inputs["purity"] = sc.purity;

  Rng mech_rng = Rng(sc.seed).derive(0xa2a2);
  long violations = 0;
  long small_child = 0;
  for (long i = 0; i < trials; ++i) {
    const NumericSplit split =
        private_median_split(0, values, sc.range_lo, sc.range_hi,
                             sc.epsilon_split, SplitMech::exponential, mech_rng);
    const std::size_t k = left_count(values, split.threshold);
    if (std::min(k, n - k) <= sc.t) ++small_child;

    double expected_correct = 0.0;
    double theta_m = 1.0;
    for (const auto& [lo, hi] :
         {std::pair<std::size_t, std::size_t>{0, k}, {k, n}}) {
      if (hi == lo) continue;
      const auto [n0, n1] = side_counts(lo, hi);
      const double p_flip = flip_probability(n0, n1, sc.epsilon_leaf);
      const double n_maj = static_cast<double>(std::max(n0, n1));
      const double n_min = static_cast<double>(std::min(n0, n1));
      expected_correct += n_maj * (1.0 - p_flip) + n_min * p_flip;
      theta_m = std::min(theta_m, n_maj / static_cast<double>(hi - lo));
    }
    const double expected_acc = expected_correct / static_cast<double>(n);
    const double bound_value = thm2_acc_bound(sc.epsilon_leaf, sc.t, theta_m);
    if (acc_exact - expected_acc > bound_value) ++violations;
  }
  report.estimate = static_cast<double>(violations) / static_cast<double>(trials);
  report.bound = static_cast<double>(small_child) / static_cast<double>(trials);
  report.slack = 3.0 * binomial_sigma(report.bound, trials);
  report.holds = report.estimate <= report.bound + report.slack;
  return report;
}

BoundReport confront_flip(const ConfrontScenario& sc, long trials) {
  BoundReport report;
  report.theorem = "flip";
  report.scenario = sc.label;
  report.trials = trials;
  report.bound = 3.0;  // acceptance band in sigmas
  report.inputs = json::array();

  Rng rng(sc.seed);
  double worst_z = 0.0;
  for (int triple = 0; triple < 20; ++triple) {
    const std::size_t n0 = rng.index(41);
    const std::size_t n1 = rng.index(41);
    const double eps = 0.25 + 1.75 * rng.uniform();
    const double p_theory = flip_probability(n0, n1, eps);

    // The closed form describes Laplace count noise flipping the majority:
    // the minority's noisy count overtaking the majority's.
    long flips = 0;
    const double scale = 1.0 / eps;
    for (long i = 0; i < trials; ++i) {
      const double noisy0 = static_cast<double>(n0) + sample_laplace(scale, rng);
      const double noisy1 = static_cast<double>(n1) + sample_laplace(scale, rng);
      const bool flipped = n1 >= n0 ? noisy0 > noisy1 : noisy1 > noisy0;
      if (flipped) ++flips;
    }
    const double p_hat = static_cast<double>(flips) / static_cast<double>(trials);
    const double z = std::fabs(p_hat - p_theory) / binomial_sigma(p_theory, trials);
    worst_z = std::max(worst_z, z);

    json entry;
    entry["n0"] = n0;
    entry["n1"] = n1;
    entry["epsilon"] = eps;
    entry["theory"] = p_theory;
    entry["estimate"] = p_hat;
    entry["z"] = z;
    report.inputs.push_back(std::move(entry));
  }
  report.estimate = worst_z;
  report.slack = 0.0;
  report.holds = worst_z <= report.bound;
  return report;
}

}  // namespace

BoundReport monte_carlo_confront(const std::string& theorem,
                                 const ConfrontScenario& scenario,
                                 long default_trials) {
  const long trials = scenario.trials > 0 ? scenario.trials : default_trials;
  if (trials <= 0) throw std::invalid_argument("trials must be positive");
  if (theorem == "thm1") return confront_thm1(scenario, trials);
  if (theorem == "thm2") return confront_thm2(scenario, trials);
  if (theorem == "thm3") return confront_thm3(scenario, trials);
  if (theorem == "cor4") return confront_cor4(scenario, trials);
  if (theorem == "flip") return confront_flip(scenario, trials);
  throw std::invalid_argument("unknown theorem id: " + theorem);
}

std::vector<std::pair<std::string, ConfrontScenario>> default_verification_suite() {
  std::vector<std::pair<std::string, ConfrontScenario>> suite;

  ConfrontScenario thm3a;
  thm3a.label = "thm3-tight-core";
  thm3a.n = 100;
  thm3a.t = 10;
  thm3a.core_width = 0.1;
  thm3a.epsilon_split = 1.0;
  thm3a.seed = 11;
  suite.emplace_back("thm3", thm3a);

  ConfrontScenario thm3b;
  thm3b.label = "thm3-wide-core";
  thm3b.n = 200;
  thm3b.t = 25;
  thm3b.core_width = 0.3;
  thm3b.epsilon_split = 0.5;
  thm3b.seed = 12;
  suite.emplace_back("thm3", thm3b);

  ConfrontScenario thm3c;
  thm3c.label = "thm3-zero-budget";
  thm3c.n = 100;
  thm3c.t = 10;
  thm3c.core_width = 0.2;
  thm3c.epsilon_split = 0.0;
  thm3c.seed = 13;
  suite.emplace_back("thm3", thm3c);

  ConfrontScenario cor4a;
  cor4a.label = "cor4-tight-cluster";
  cor4a.n = 100;
  cor4a.t = 20;
  cor4a.core_width = 0.05;
  cor4a.epsilon_split = 1.0;
  cor4a.seed = 14;
  suite.emplace_back("cor4", cor4a);

  ConfrontScenario cor4b;
  cor4b.label = "cor4-moderate-cluster";
  cor4b.n = 150;
  cor4b.t = 30;
  cor4b.core_width = 0.2;
  cor4b.epsilon_split = 0.5;
  cor4b.seed = 15;
  suite.emplace_back("cor4", cor4b);

  ConfrontScenario thm1s;
  thm1s.label = "thm1-linear";
  thm1s.n = 100;
  thm1s.t = 25;
  thm1s.epsilon_split = 1.0;
  thm1s.epsilon_leaf = 1.0;
  thm1s.trials = 1000;
  thm1s.seed = 16;
  suite.emplace_back("thm1", thm1s);

  ConfrontScenario thm2s;
  thm2s.label = "thm2-homogeneous";
  thm2s.n = 100;
  thm2s.t = 10;
  thm2s.purity = 0.9;
  thm2s.epsilon_split = 1.0;
  thm2s.epsilon_leaf = 1.0;
  thm2s.trials = 1000;
  thm2s.seed = 17;
  suite.emplace_back("thm2", thm2s);

  ConfrontScenario flips;
  flips.label = "flip-grid";
  flips.trials = 100000;
  flips.seed = 18;
  suite.emplace_back("flip", flips);

  return suite;
}

}  // namespace diprime
