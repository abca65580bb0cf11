#include "diprime/splits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace diprime {

AttributeSchema AttributeSchema::numeric(std::string name, double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw std::invalid_argument("numeric attribute '" + name +
                                "' needs a finite range with lo < hi");
  }
  AttributeSchema s;
  s.kind = Kind::numeric;
  s.name = std::move(name);
  s.lo = lo;
  s.hi = hi;
  return s;
}

AttributeSchema AttributeSchema::categorical(std::string name,
                                             std::vector<std::string> categories) {
  if (categories.size() < 2) {
    throw std::invalid_argument("categorical attribute '" + name +
                                "' needs at least two categories");
  }
  if (categories.size() > static_cast<std::size_t>(kMaxCategories)) {
    throw std::invalid_argument(
        "categorical attribute '" + name + "' has " +
        std::to_string(categories.size()) + " categories; at most " +
        std::to_string(kMaxCategories) +
        " are supported - pre-group rare levels before ingestion");
  }
  AttributeSchema s;
  s.kind = Kind::categorical;
  s.name = std::move(name);
  s.categories = std::move(categories);
  return s;
}

SplitMech split_mech_for(Variant variant) {
  return variant == Variant::flip ? SplitMech::permute_flip
                                  : SplitMech::exponential;
}

std::vector<IntervalScore> score_numeric_intervals(std::span<const double> values,
                                                   double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw std::invalid_argument("interval scoring needs a finite range with lo < hi");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty() && (sorted.front() < lo || sorted.back() > hi)) {
    throw std::invalid_argument("values must lie within the attribute range");
  }
  const long n = static_cast<long>(sorted.size());
  std::vector<IntervalScore> intervals;
  intervals.reserve(sorted.size() + 1);
  for (long i = 0; i <= n; ++i) {
    IntervalScore iv;
    iv.lo = i == 0 ? lo : sorted[i - 1];
    iv.hi = i == n ? hi : sorted[i];
    iv.score = -std::labs(2 * i - n);
    intervals.push_back(iv);
  }
  return intervals;
}

namespace {

// Threshold uniform inside (lo, hi): strict interiority keeps the routing
// count equal to the interval's score assumption even when the draw would
// round onto an endpoint.
double draw_threshold(double lo, double hi, Rng& rng) {
  double r = lo + (hi - lo) * rng.uniform_open();
  if (r <= lo) r = std::nextafter(lo, hi);
  if (r >= hi) r = std::nextafter(hi, lo);
  return r;
}

std::size_t select_outcome(std::span<const ScoredOutcome> candidates,
                           double epsilon, SplitMech mech, Rng& rng) {
  const Sensitivity sens(1.0);
  return mech == SplitMech::exponential
             ? exp_mechanism(candidates, sens, epsilon, rng)
             : permute_flip(candidates, sens, epsilon, rng);
}

}  // namespace

NumericSplit private_median_split(int attribute, std::span<const double> values,
                                  double lo, double hi, double epsilon_split,
                                  SplitMech mech, Rng& rng) {
  const std::vector<IntervalScore> intervals =
      score_numeric_intervals(values, lo, hi);
  std::vector<ScoredOutcome> candidates;
  candidates.reserve(intervals.size());
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (mech == SplitMech::exponential) {
      candidates.push_back({i, static_cast<double>(intervals[i].score),
                            intervals[i].width()});
    } else if (intervals[i].width() > 0.0) {
      // Zero-width intervals (duplicate values) carry no mass under the
      // uniform base and are dropped before permuting.
      candidates.push_back({i, static_cast<double>(intervals[i].score), 1.0});
    }
  }
  const std::size_t picked = select_outcome(candidates, epsilon_split, mech, rng);
  const IntervalScore& iv = intervals[picked];
  return NumericSplit{attribute, draw_threshold(iv.lo, iv.hi, rng)};
}

std::vector<std::pair<CategoricalSplit, long>> enumerate_categorical_splits(
    int attribute, std::span<const int> categories, std::span<const long> counts) {
  const std::size_t k = categories.size();
  if (k < 2) {
    throw std::invalid_argument("a categorical split needs at least two categories");
  }
  if (k > static_cast<std::size_t>(kMaxCategories)) {
    throw std::invalid_argument(
        "cannot enumerate splits over " + std::to_string(k) +
        " categories; pre-group rare levels before ingestion");
  }
  if (counts.size() != k) {
    throw std::invalid_argument("counts must align with categories");
  }
  long total = 0;
  for (long c : counts) {
    if (c < 0) throw std::invalid_argument("category counts must be non-negative");
    total += c;
  }

  std::vector<std::pair<CategoricalSplit, long>> out;
  const unsigned long n_masks = (1UL << (k - 1)) - 1UL;
  out.reserve(n_masks);
  // Masks range over subsets of categories[1..k-1]; categories[0] stays on
  // the right, so each unordered partition appears exactly once.
  for (unsigned long mask = 1; mask <= n_masks; ++mask) {
    CategoricalSplit split;
    split.attribute = attribute;
    long n_left = 0;
    for (std::size_t j = 1; j < k; ++j) {
      if (mask & (1UL << (j - 1))) {
        split.left_categories.push_back(categories[j]);
        n_left += counts[j];
      }
    }
    out.emplace_back(std::move(split), -std::labs(2 * n_left - total));
  }
  return out;
}

CategoricalSplit private_categorical_split(int attribute,
                                           std::span<const int> categories,
                                           std::span<const long> counts,
                                           double epsilon_split, SplitMech mech,
                                           Rng& rng) {
  auto scored = enumerate_categorical_splits(attribute, categories, counts);
  std::vector<ScoredOutcome> candidates;
  candidates.reserve(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    candidates.push_back({i, static_cast<double>(scored[i].second), 1.0});
  }
  const std::size_t picked = select_outcome(candidates, epsilon_split, mech, rng);
  return std::move(scored[picked].first);
}

SplitScore split_utility_score(std::span<const double> left_targets,
                               std::span<const double> right_targets, double B) {
  if (!std::isfinite(B) || B <= 0.0) {
    throw std::invalid_argument("target bound B must be positive");
  }
  const std::size_t n = left_targets.size() + right_targets.size();
  if (n == 0) {
    throw std::invalid_argument("split utility needs at least one record");
  }
  auto sse = [](std::span<const double> ys) {
    if (ys.empty()) return 0.0;
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    double out = 0.0;
    for (double y : ys) out += (y - mean) * (y - mean);
    return out;
  };
  SplitScore s;
  s.score = -(sse(left_targets) + sse(right_targets)) / static_cast<double>(n);
  s.sensitivity = 4.0 * B * B / static_cast<double>(n);
  return s;
}

SplitScore split_utility_score(std::span<const int> left_labels,
                               std::span<const int> right_labels, int n_classes) {
  if (n_classes < 2) {
    throw std::invalid_argument("classification needs at least two classes");
  }
  const std::size_t n = left_labels.size() + right_labels.size();
  if (n == 0) {
    throw std::invalid_argument("split utility needs at least one record");
  }
  auto misclassified = [n_classes](std::span<const int> labels) {
    if (labels.empty()) return 0L;
    std::vector<long> counts(n_classes, 0);
    for (int label : labels) {
      if (label < 0 || label >= n_classes) {
        throw std::invalid_argument("label out of range");
      }
      ++counts[label];
    }
    return static_cast<long>(labels.size()) -
           *std::max_element(counts.begin(), counts.end());
  };
  SplitScore s;
  s.score = -static_cast<double>(misclassified(left_labels) +
                                 misclassified(right_labels)) /
            static_cast<double>(n);
  s.sensitivity = 2.0 / static_cast<double>(n);
  return s;
}

std::size_t select_attribute(std::span<const double> scores, double sensitivity,
                             double epsilon_attr, Variant variant, Rng& rng) {
  if (scores.empty()) {
    throw std::invalid_argument("attribute selection needs candidates");
  }
  if (variant == Variant::random_attr) {
    if (epsilon_attr != 0.0) {
      throw std::invalid_argument(
          "random attribute selection spends no budget; epsilon_attr must be 0");
    }
    return rng.index(scores.size());
  }
  std::vector<ScoredOutcome> candidates;
  candidates.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    candidates.push_back({i, scores[i], 1.0});
  }
  const Sensitivity sens(sensitivity);
  return variant == Variant::exp_mech
             ? exp_mechanism(candidates, sens, epsilon_attr, rng)
             : permute_flip(candidates, sens, epsilon_attr, rng);
}

}  // namespace diprime
