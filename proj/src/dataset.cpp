#include "diprime/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace diprime {

using nlohmann::json;

std::string task_name(Task t) {
  return t == Task::regression ? "regression" : "classification";
}

Task task_from_name(const std::string& name) {
  if (name == "regression") return Task::regression;
  if (name == "classification") return Task::classification;
  throw std::invalid_argument("unknown task: " + name);
}

namespace {

double sample_normal(Rng& rng) {
  const double u1 = rng.uniform_open();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, std::size_t row,
                    const std::string& column) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw std::runtime_error("row " + std::to_string(row) + ", column '" +
                             column + "': cannot parse '" + cell +
                             "' as a finite number");
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw std::runtime_error(std::string("schema: missing string field '") +
                             key + "'");
  }
  return j.at(key).get<std::string>();
}

struct ParsedSchema {
  Task task;
  std::string target;
  double b = 1.0;
  std::vector<std::string> declared_classes;
  struct Attr {
    std::string name;
    bool numeric = true;
    bool infer_range = false;
    double lo = 0.0, hi = 1.0;
    std::vector<std::string> categories;
  };
  std::vector<Attr> attrs;
};

ParsedSchema parse_schema(const std::string& schema_json) {
  const json j = json::parse(schema_json);
  ParsedSchema s;
  s.task = task_from_name(require_string(j, "task"));
  s.target = require_string(j, "target");
  if (j.contains("b")) {
    s.b = j.at("b").get<double>();
    if (!std::isfinite(s.b) || s.b <= 0.0) {
      throw std::runtime_error("schema: 'b' must be a positive number");
    }
  }
  if (j.contains("classes")) {
    s.declared_classes = j.at("classes").get<std::vector<std::string>>();
  }
  if (!j.contains("attributes") || !j.at("attributes").is_array() ||
      j.at("attributes").empty()) {
    throw std::runtime_error("schema: 'attributes' must be a non-empty array");
  }
  for (const json& a : j.at("attributes")) {
    ParsedSchema::Attr attr;
    attr.name = require_string(a, "name");
    const std::string kind = require_string(a, "kind");
    if (kind == "numeric") {
      if (!a.contains("range")) {
        throw std::runtime_error("schema: numeric attribute '" + attr.name +
                                 "' needs a 'range'");
      }
      const json& r = a.at("range");
      if (r.is_string() && r.get<std::string>() == "infer") {
        attr.infer_range = true;
      } else if (r.is_array() && r.size() == 2) {
        attr.lo = r.at(0).get<double>();
        attr.hi = r.at(1).get<double>();
      } else {
        throw std::runtime_error("schema: attribute '" + attr.name +
                                 "': 'range' must be [lo, hi] or \"infer\"");
      }
    } else if (kind == "categorical") {
      attr.numeric = false;
      if (!a.contains("categories")) {
        throw std::runtime_error("schema: categorical attribute '" + attr.name +
                                 "' needs 'categories'");
      }
      attr.categories = a.at("categories").get<std::vector<std::string>>();
    } else {
      throw std::runtime_error("schema: attribute '" + attr.name +
                               "': unknown kind '" + kind + "'");
    }
    s.attrs.push_back(std::move(attr));
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Dataset load_csv_text(const std::string& csv_text, const std::string& schema_json) {
  const ParsedSchema schema = parse_schema(schema_json);

  std::vector<std::string> lines;
  {
    std::stringstream ss(csv_text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
  }
  if (lines.empty()) throw std::runtime_error("csv: no header row");

  const std::vector<std::string> header = split_line(lines.front());
  auto column_of = [&header](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw std::runtime_error("csv: required column '" + name +
                               "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t target_col = column_of(schema.target);
  std::vector<std::size_t> attr_cols;
  for (const auto& attr : schema.attrs) attr_cols.push_back(column_of(attr.name));

  const std::size_t n_rows = lines.size() - 1;
  std::vector<std::vector<std::string>> cells(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    cells[r] = split_line(lines[r + 1]);
    if (cells[r].size() != header.size()) {
      throw std::runtime_error("row " + std::to_string(r + 1) + ": expected " +
                               std::to_string(header.size()) + " cells, found " +
                               std::to_string(cells[r].size()));
    }
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (cells[r][c].empty()) {
        throw std::runtime_error("row " + std::to_string(r + 1) + ", column '" +
                                 header[c] + "': missing value");
      }
    }
  }

  Dataset data;
  data.task = schema.task;
  data.B = schema.b;

  for (std::size_t a = 0; a < schema.attrs.size(); ++a) {
    const auto& attr = schema.attrs[a];
    if (attr.numeric) {
      std::vector<double> col(n_rows);
      for (std::size_t r = 0; r < n_rows; ++r) {
        col[r] = parse_double(cells[r][attr_cols[a]], r + 1, attr.name);
      }
      double lo = attr.lo;
      double hi = attr.hi;
      if (attr.infer_range) {
        // Inferred bounds depend on the records; flag the dataset so that
        // downstream consumers know the range is not public knowledge.
        data.ranges_inferred = true;
        const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
        const double span = *mx - *mn;
        const double pad =
            span > 0.0 ? 0.01 * span : 0.01 * std::max(1.0, std::fabs(*mn));
        lo = *mn - pad;
        hi = *mx + pad;
      }
      data.attributes.push_back(AttributeSchema::numeric(attr.name, lo, hi));
      for (std::size_t r = 0; r < n_rows; ++r) {
        if (col[r] < lo || col[r] > hi) {
          throw std::runtime_error(
              "row " + std::to_string(r + 1) + ", column '" + attr.name +
              "': value " + format_double(col[r]) + " outside declared range [" +
              format_double(lo) + ", " + format_double(hi) + "]");
        }
      }
      data.numeric_cols.push_back(std::move(col));
      data.categorical_cols.emplace_back();
    } else {
      data.attributes.push_back(
          AttributeSchema::categorical(attr.name, attr.categories));
      std::map<std::string, int> index;
      for (std::size_t i = 0; i < attr.categories.size(); ++i) {
        index[attr.categories[i]] = static_cast<int>(i);
      }
      std::vector<int> col(n_rows);
      for (std::size_t r = 0; r < n_rows; ++r) {
        const std::string& cell = cells[r][attr_cols[a]];
        const auto it = index.find(cell);
        if (it == index.end()) {
          throw std::runtime_error("row " + std::to_string(r + 1) +
                                   ", column '" + attr.name +
                                   "': unknown category '" + cell + "'");
        }
        col[r] = it->second;
      }
      data.categorical_cols.push_back(std::move(col));
      data.numeric_cols.emplace_back();
    }
  }

  if (schema.task == Task::regression) {
    data.targets.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double y = parse_double(cells[r][target_col], r + 1, schema.target);
      data.targets[r] = std::clamp(y, -data.B, data.B);
    }
  } else {
    std::vector<std::string> names = schema.declared_classes;
    if (names.empty()) {
      std::set<std::string> seen;
      for (std::size_t r = 0; r < n_rows; ++r) seen.insert(cells[r][target_col]);
      names.assign(seen.begin(), seen.end());
    }
    if (names.size() < 2) {
      throw std::runtime_error("classification needs at least two classes");
    }
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < names.size(); ++i) {
      index[names[i]] = static_cast<int>(i);
    }
    data.classes = names;
    data.labels.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const auto it = index.find(cells[r][target_col]);
      if (it == index.end()) {
        throw std::runtime_error("row " + std::to_string(r + 1) + ", column '" +
                                 schema.target + "': unknown class '" +
                                 cells[r][target_col] + "'");
      }
      data.labels[r] = it->second;
    }
  }
  return data;
}

Dataset load_csv(const std::string& csv_path, const std::string& schema_path) {
  return load_csv_text(read_file(csv_path), read_file(schema_path));
}

namespace {

void check_csv_token(const std::string& token) {
  if (token.empty() || token.find(',') != std::string::npos ||
      token.find('\n') != std::string::npos) {
    throw std::invalid_argument("cannot write '" + token + "' as a CSV cell");
  }
}

}  // namespace

void write_csv(const Dataset& data, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + csv_path);
  for (const auto& attr : data.attributes) {
    check_csv_token(attr.name);
    out << attr.name << ',';
  }
  out << "target\n";
  const std::size_t n = data.n_rows();
  for (std::size_t r = 0; r < n; ++r) {
    for (int a = 0; a < data.n_attributes(); ++a) {
      if (data.attributes[a].kind == AttributeSchema::Kind::numeric) {
        out << format_double(data.numeric_value(r, a)) << ',';
      } else {
        const std::string& name =
            data.attributes[a].categories[data.category(r, a)];
        check_csv_token(name);
        out << name << ',';
      }
    }
    if (data.task == Task::regression) {
      out << format_double(data.targets[r]) << '\n';
    } else {
      out << data.classes[data.labels[r]] << '\n';
    }
  }
}

void write_schema(const Dataset& data, const std::string& schema_path) {
  json j;
  j["task"] = task_name(data.task);
  j["target"] = "target";
  if (data.task == Task::regression) {
    j["b"] = data.B;
  } else {
    j["classes"] = data.classes;
  }
  j["attributes"] = json::array();
  for (const auto& attr : data.attributes) {
    json a;
    a["name"] = attr.name;
    if (attr.kind == AttributeSchema::Kind::numeric) {
      a["kind"] = "numeric";
      a["range"] = {attr.lo, attr.hi};
    } else {
      a["kind"] = "categorical";
      a["categories"] = attr.categories;
    }
    j["attributes"].push_back(std::move(a));
  }
  std::ofstream out(schema_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + schema_path);
  out << j.dump(2) << '\n';
}

TargetScaler scale_target(Dataset& data) {
  if (data.task != Task::regression) {
    throw std::invalid_argument("scale_target applies to regression targets");
  }
  if (data.targets.empty()) {
    throw std::invalid_argument("scale_target needs at least one record");
  }
  const auto [mn, mx] = std::minmax_element(data.targets.begin(),
                                            data.targets.end());
  TargetScaler scaler;
  if (*mx > *mn) {
    scaler.offset = *mn;
    scaler.scale = *mx - *mn;
  } else {
    // Constant targets: map onto 0.5 with a unit scale so the inverse is
    // still well defined.
    scaler.offset = *mn - 0.5;
    scaler.scale = 1.0;
  }
  for (double& y : data.targets) y = scaler.forward(y);
  data.B = 1.0;
  return scaler;
}

Dataset subset(const Dataset& data, std::span<const std::size_t> rows) {
  Dataset out;
  out.task = data.task;
  out.attributes = data.attributes;
  out.classes = data.classes;
  out.B = data.B;
  out.ranges_inferred = data.ranges_inferred;
  out.numeric_cols.resize(data.numeric_cols.size());
  out.categorical_cols.resize(data.categorical_cols.size());
  for (int a = 0; a < data.n_attributes(); ++a) {
    if (data.attributes[a].kind == AttributeSchema::Kind::numeric) {
      out.numeric_cols[a].reserve(rows.size());
      for (std::size_t r : rows) out.numeric_cols[a].push_back(data.numeric_value(r, a));
    } else {
      out.categorical_cols[a].reserve(rows.size());
      for (std::size_t r : rows) out.categorical_cols[a].push_back(data.category(r, a));
    }
  }
  if (data.task == Task::regression) {
    out.targets.reserve(rows.size());
    for (std::size_t r : rows) out.targets.push_back(data.targets[r]);
  } else {
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(data.labels[r]);
  }
  return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = data.n_rows();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * train_fraction));
  std::span<const std::size_t> all(order);
  return {subset(data, all.subspan(0, n_train)), subset(data, all.subspan(n_train))};
}

Dataset equal_width_bins(const Dataset& data, int n_bins) {
  if (n_bins < 2 || n_bins > kMaxCategories) {
    throw std::invalid_argument("n_bins must lie in [2, " +
                                std::to_string(kMaxCategories) + "]");
  }
  Dataset out = data;
  std::vector<std::string> names(n_bins);
  for (int b = 0; b < n_bins; ++b) names[b] = "bin" + std::to_string(b);
  for (int a = 0; a < data.n_attributes(); ++a) {
    const AttributeSchema& attr = data.attributes[a];
    if (attr.kind != AttributeSchema::Kind::numeric) continue;
    const double width = (attr.hi - attr.lo) / n_bins;
    std::vector<int> col(data.n_rows());
    for (std::size_t r = 0; r < data.n_rows(); ++r) {
      const int bin = static_cast<int>((data.numeric_value(r, a) - attr.lo) / width);
      col[r] = std::clamp(bin, 0, n_bins - 1);
    }
    out.attributes[a] = AttributeSchema::categorical(attr.name, names);
    out.categorical_cols[a] = std::move(col);
    out.numeric_cols[a].clear();
  }
  return out;
}

std::vector<double> spread_controlled_values(std::size_t n, std::size_t tails,
                                             double core_width, double lo,
                                             double hi, Rng& rng) {
  if (!(lo < hi)) throw std::invalid_argument("lo must be smaller than hi");
  if (n < 2 * tails + 2) {
    throw std::invalid_argument("need n >= 2 * tails + 2 for a controlled core");
  }
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * core_width;
  if (!(core_width > 0.0) || center - half < lo || center + half > hi ||
      (tails > 0 && (center - half <= lo || center + half >= hi))) {
    throw std::invalid_argument("core_width does not fit inside the range");
  }
  std::vector<double> values;
  values.reserve(n);
  // The core spans exactly core_width: its extremes are pinned.
  values.push_back(center - half);
  values.push_back(center + half);
  for (std::size_t i = 0; i < n - 2 * tails - 2; ++i) {
    values.push_back(center - half + core_width * rng.uniform_open());
  }
  for (std::size_t i = 0; i < tails; ++i) {
    values.push_back(lo + (center - half - lo) * rng.uniform());
    values.push_back(center + half + (hi - center - half) * rng.uniform_open());
  }
  std::sort(values.begin(), values.end());
  return values;
}

Dataset synth_regression(const SynthRegressionSpec& spec, Rng& rng) {
  if (spec.n == 0 || spec.n_attributes < 1) {
    throw std::invalid_argument("synthetic data needs n >= 1 and attributes >= 1");
  }
  if (!(spec.range_lo < spec.range_hi)) {
    throw std::invalid_argument("range_lo must be smaller than range_hi");
  }
  Dataset data;
  data.task = Task::regression;
  data.B = 1.0;
  const double lo = spec.range_lo;
  const double hi = spec.range_hi;
  const double center = 0.5 * (lo + hi);

  for (int a = 0; a < spec.n_attributes; ++a) {
    Rng attr_rng = rng.derive(1000 + static_cast<std::uint64_t>(a));
    std::vector<double> col(spec.n);
    switch (spec.profile) {
      case SynthRegressionSpec::Profile::uniform:
        for (double& v : col) v = lo + (hi - lo) * attr_rng.uniform();
        break;
      case SynthRegressionSpec::Profile::clustered:
        for (double& v : col) {
          v = std::clamp(center + spec.cluster_sd * sample_normal(attr_rng), lo, hi);
        }
        break;
      case SynthRegressionSpec::Profile::spread_controlled: {
        col = spread_controlled_values(spec.n, spec.tails, spec.core_width, lo,
                                       hi, attr_rng);
        attr_rng.shuffle(col);
        break;
      }
      case SynthRegressionSpec::Profile::skewed:
        for (double& v : col) {
          v = lo + (hi - lo) * std::pow(attr_rng.uniform(), spec.skew_power);
        }
        break;
    }
    data.attributes.push_back(
        AttributeSchema::numeric("x" + std::to_string(a), lo, hi));
    data.numeric_cols.push_back(std::move(col));
    data.categorical_cols.emplace_back();
  }

  Rng target_rng = rng.derive(2000);
  const double ramp = spec.sharpness * (hi - lo);
  data.targets.resize(spec.n);
  for (std::size_t r = 0; r < spec.n; ++r) {
    double signal_part = 0.0;
    for (int a = 0; a < spec.n_attributes; ++a) {
      signal_part += 1.0 / (1.0 + std::exp(-(data.numeric_value(r, a) - center) / ramp));
    }
    signal_part /= spec.n_attributes;
    const double y = 0.5 + spec.signal * (signal_part - 0.5) +
                     spec.noise_sd * sample_normal(target_rng);
    data.targets[r] = std::clamp(y, 0.0, 1.0);
  }
  return data;
}

Dataset synth_classification(const SynthClassificationSpec& spec, Rng& rng) {
  if (spec.n == 0 || spec.n_attributes < 1) {
    throw std::invalid_argument("synthetic data needs n >= 1 and attributes >= 1");
  }
  if (spec.n_informative < 0 || spec.n_informative > spec.n_attributes) {
    throw std::invalid_argument("n_informative must lie in [0, n_attributes]");
  }
  if (!(spec.range_lo < spec.range_hi)) {
    throw std::invalid_argument("range_lo must be smaller than range_hi");
  }
  Dataset data;
  data.task = Task::classification;
  data.classes = {"class0", "class1"};

  Rng label_rng = rng.derive(3000);
  std::vector<int> labels(spec.n);
  if (spec.spatially_homogeneous) {
    for (int& l : labels) l = label_rng.uniform() < spec.purity ? 1 : 0;
  } else {
    const auto n1 = static_cast<std::size_t>(
        std::llround(static_cast<double>(spec.n) * spec.class_balance));
    for (std::size_t i = 0; i < spec.n; ++i) labels[i] = i < n1 ? 1 : 0;
    label_rng.shuffle(labels);
  }

  const double lo = spec.range_lo;
  const double hi = spec.range_hi;
  const double mid = 0.5 * (lo + hi);
  if (!spec.spatially_homogeneous &&
      (mid - 0.5 * spec.separation - spec.cluster_halfwidth < lo ||
       mid + 0.5 * spec.separation + spec.cluster_halfwidth > hi)) {
    throw std::invalid_argument("class blobs do not fit inside the range");
  }

  for (int a = 0; a < spec.n_attributes; ++a) {
    Rng attr_rng = rng.derive(4000 + static_cast<std::uint64_t>(a));
    std::vector<double> col(spec.n);
    const bool informative = !spec.spatially_homogeneous && a < spec.n_informative;
    for (std::size_t r = 0; r < spec.n; ++r) {
      if (informative) {
        const double c = labels[r] == 1 ? mid + 0.5 * spec.separation
                                        : mid - 0.5 * spec.separation;
        col[r] = c + spec.cluster_halfwidth * (2.0 * attr_rng.uniform() - 1.0);
      } else {
        col[r] = lo + (hi - lo) * attr_rng.uniform();
      }
    }
    data.attributes.push_back(
        AttributeSchema::numeric("x" + std::to_string(a), lo, hi));
    data.numeric_cols.push_back(std::move(col));
    data.categorical_cols.emplace_back();
  }
  // Noise flips the reported label after the features were placed, so it
  // creates genuine feature-label disagreement instead of moving the blob.
  if (!spec.spatially_homogeneous && spec.label_noise > 0.0) {
    for (int& l : labels) {
      if (label_rng.uniform() < spec.label_noise) l = 1 - l;
    }
  }
  data.labels = std::move(labels);
  return data;
}

}  // namespace diprime
