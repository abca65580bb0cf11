#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diprime/rng.hpp"
#include "diprime/splits.hpp"

namespace diprime {

enum class Task { regression, classification };

std::string task_name(Task t);
Task task_from_name(const std::string& name);

// Column-major dataset. Numeric attributes fill `numeric_cols`, categorical
// ones fill `categorical_cols` (with values as indices into the schema's
// category list); the unused store stays empty for each attribute.
struct Dataset {
  Task task = Task::regression;
  std::vector<AttributeSchema> attributes;
  std::vector<std::vector<double>> numeric_cols;
  std::vector<std::vector<int>> categorical_cols;

  std::vector<double> targets;      // regression targets in [-B, B]
  std::vector<int> labels;          // classification labels in [0, n_classes)
  std::vector<std::string> classes; // classification class names
  double B = 1.0;                   // regression target bound

  // Set when numeric ranges were inferred from the data instead of being
  // declared: inferred ranges leak information about the records and must
  // not be treated as public knowledge.
  bool ranges_inferred = false;

  std::size_t n_rows() const {
    return task == Task::regression ? targets.size() : labels.size();
  }
  int n_attributes() const { return static_cast<int>(attributes.size()); }
  int n_classes() const { return static_cast<int>(classes.size()); }

  double numeric_value(std::size_t row, int attr) const {
    return numeric_cols[attr][row];
  }
  int category(std::size_t row, int attr) const {
    return categorical_cols[attr][row];
  }
};

// Read a CSV with header against a JSON schema description:
//   {
//     "task": "regression" | "classification",
//     "target": "<column>",
//     "b": 1.0,                     // regression bound, default 1
//     "classes": ["a", "b"],        // optional; otherwise inferred
//     "attributes": [
//       {"name": "x", "kind": "numeric", "range": [0.0, 1.0]},
//       {"name": "z", "kind": "numeric", "range": "infer"},
//       {"name": "c", "kind": "categorical", "categories": ["u", "v"]}
//     ]
//   }
// Declared ranges are trusted as public knowledge. "infer" pads the observed
// min/max by 1% of the span and marks the dataset as privacy-unsafe.
// Malformed rows, out-of-range values, unknown categories and missing cells
// are rejected with the offending row and column named. Regression targets
// are clipped into [-B, B].
Dataset load_csv(const std::string& csv_path, const std::string& schema_path);
Dataset load_csv_text(const std::string& csv_text, const std::string& schema_json);

void write_csv(const Dataset& data, const std::string& csv_path);
void write_schema(const Dataset& data, const std::string& schema_path);

// Affine map fitted by scale_target; inverse() recovers original units.
struct TargetScaler {
  double offset = 0.0;
  double scale = 1.0;
  double forward(double y) const { return (y - offset) / scale; }
  double inverse(double y) const { return y * scale + offset; }
};

// Rescale regression targets onto [0, 1] (constant targets map to 0.5) and
// set B = 1; returns the fitted map.
TargetScaler scale_target(Dataset& data);

// Copy the selected rows into a new dataset.
Dataset subset(const Dataset& data, std::span<const std::size_t> rows);

// Random split into disjoint, exhaustive (train, test) parts;
// |train| = round(N * train_fraction).
std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double train_fraction, Rng& rng);

// Replace every numeric attribute by an equal-width discretization of its
// declared range into n_bins categories ("bin0", "bin1", ...). Values at the
// range maximum fall in the last bin.
Dataset equal_width_bins(const Dataset& data, int n_bins);

// ---------------------------------------------------------------------------
// Synthetic data.

// Feature values whose central n - 2*tails order statistics span exactly
// core_width around the range center, with `tails` values strictly outside
// on each side. Returned sorted.
std::vector<double> spread_controlled_values(std::size_t n, std::size_t tails,
                                             double core_width, double lo,
                                             double hi, Rng& rng);

struct SynthRegressionSpec {
  enum class Profile {
    uniform,            // features uniform over the range
    clustered,          // features concentrated near the range center
    spread_controlled,  // see spread_controlled_values
    skewed              // u^skew_power: dense near lo, sparse near hi
  };

  std::size_t n = 1000;
  int n_attributes = 5;
  Profile profile = Profile::uniform;
  double range_lo = 0.0;
  double range_hi = 1.0;
  double cluster_sd = 0.1;     // clustered: scale of the central mass
  std::size_t tails = 0;       // spread_controlled
  double core_width = 0.1;     // spread_controlled
  double skew_power = 3.0;     // skewed

  // Targets: y = 0.5 + signal * (mean_j s(x_j) - 0.5) + N(0, noise_sd),
  // clipped to [0, 1], where s is a logistic ramp through the range center.
  // signal = 0 yields targets carrying no attribute information.
  double signal = 1.0;
  double noise_sd = 0.05;
  double sharpness = 0.05;     // ramp width as a fraction of the range
};

Dataset synth_regression(const SynthRegressionSpec& spec, Rng& rng);

struct SynthClassificationSpec {
  std::size_t n = 1000;
  int n_attributes = 4;
  int n_informative = 2;   // leading attributes carry the class signal
  double class_balance = 0.5;

  // Informative attributes place each class in a uniform blob of half-width
  // cluster_halfwidth centered at 0.5 -/+ separation/2; the classes are
  // exactly separable along each informative attribute when
  // separation > 2 * cluster_halfwidth. Non-informative attributes are
  // uniform over the range.
  double separation = 0.4;
  double cluster_halfwidth = 0.08;
  double label_noise = 0.0;
  double range_lo = 0.0;
  double range_hi = 1.0;

  // Spatially homogeneous alternative: features uniform, labels drawn
  // i.i.d. with the majority class holding `purity` mass, independent of
  // the features.
  bool spatially_homogeneous = false;
  double purity = 0.9;
};

Dataset synth_classification(const SynthClassificationSpec& spec, Rng& rng);

}  // namespace diprime
