#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diprime/mechanisms.hpp"
#include "diprime/rng.hpp"

namespace diprime {

// Categorical attributes are split by exhaustive enumeration of binary
// partitions, which is exponential in the number of categories; wider
// attributes must be pre-grouped at ingestion.
inline constexpr int kMaxCategories = 12;

struct AttributeSchema {
  enum class Kind { numeric, categorical };

  Kind kind = Kind::numeric;
  std::string name;
  double lo = 0.0;                      // numeric: half-open range [lo, hi)
  double hi = 1.0;
  std::vector<std::string> categories;  // categorical: level names

  static AttributeSchema numeric(std::string name, double lo, double hi);
  static AttributeSchema categorical(std::string name,
                                     std::vector<std::string> categories);
};

struct NumericSplit {
  int attribute = -1;
  double threshold = 0.0;  // x < threshold routes left
};

struct CategoricalSplit {
  int attribute = -1;
  std::vector<int> left_categories;  // sorted category ids; membership routes left
};

// One inter-point interval of a node's numeric range together with the
// balance score shared by every threshold inside it. With N in-range values,
// a threshold in the i-th interval (i = 0..N) puts i values left, so
// score = -|i - (N - i)|.
struct IntervalScore {
  double lo = 0.0;
  double hi = 0.0;
  long score = 0;

  double width() const { return hi - lo; }
};

// Mechanism used to draw a split. The exponential mechanism weights
// intervals by Lebesgue measure; permute-and-flip uses a uniform base over
// the (positive-width) intervals.
enum class SplitMech { exponential, permute_flip };

SplitMech split_mech_for(Variant variant);

// Score all N+1 inter-point intervals of [lo, hi) induced by `values`
// (unsorted is fine; all values must lie in [lo, hi]).
std::vector<IntervalScore> score_numeric_intervals(std::span<const double> values,
                                                   double lo, double hi);

// Draw a private split threshold: select an interval through `mech` with the
// balance score (sensitivity 1 under add/remove of one record), then place
// the threshold uniformly inside the selected interval. The returned
// threshold lies strictly inside (lo, hi).
NumericSplit private_median_split(int attribute, std::span<const double> values,
                                  double lo, double hi, double epsilon_split,
                                  SplitMech mech, Rng& rng);

// All 2^(k-1) - 1 unordered binary partitions of k categories, paired with
// the balance score -|n_left - n_right|. `categories` are the ids present in
// the node's range (2 <= k <= kMaxCategories) and `counts` the per-category
// record counts aligned with them. The first listed category always lands on
// the right side, which canonicalizes the unordered pairs.
std::vector<std::pair<CategoricalSplit, long>> enumerate_categorical_splits(
    int attribute, std::span<const int> categories, std::span<const long> counts);

CategoricalSplit private_categorical_split(int attribute,
                                           std::span<const int> categories,
                                           std::span<const long> counts,
                                           double epsilon_split, SplitMech mech,
                                           Rng& rng);

struct SplitScore {
  double score = 0.0;
  double sensitivity = 0.0;
};

// Regression utility of a realized split: the negated pooled squared error
//   -(SSE_left + SSE_right) / N,
// with sensitivity 4 B^2 / N for targets bounded in [-B, B].
SplitScore split_utility_score(std::span<const double> left_targets,
                               std::span<const double> right_targets, double B);

// Classification utility: the negated pooled misclassification rate of the
// per-side majority votes, with sensitivity 2 / N.
SplitScore split_utility_score(std::span<const int> left_labels,
                               std::span<const int> right_labels, int n_classes);

// Choose among candidate attributes by their utility scores. random_attr
// ignores the scores (epsilon_attr must be 0); exp_mech and flip privatize
// the argmax with the given budget. Returns an index into `scores`.
std::size_t select_attribute(std::span<const double> scores, double sensitivity,
                             double epsilon_attr, Variant variant, Rng& rng);

}  // namespace diprime
