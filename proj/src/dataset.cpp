#include "nlx/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "nlx/error.hpp"
#include "nlx/rng.hpp"

namespace nlx {

namespace {

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

// Type-7 sample quantile of sorted data.
double quantile7(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::size_t pick_weighted(Rng& rng, std::initializer_list<double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  std::size_t i = 0;
  for (double w : weights) {
    if (u < w) return i;
    u -= w;
    ++i;
  }
  return weights.size() - 1;
}

}  // namespace

LabeledBatch Dataset::rows(const std::vector<std::size_t>& indices) const {
  LabeledBatch out;
  out.schema = batch.schema;
  out.label_kind = batch.label_kind;
  out.label_of_interest = batch.label_of_interest;
  for (std::size_t i : indices) {
    out.examples.push_back(batch.examples.at(i));
    out.labels.push_back(batch.labels.at(i));
  }
  return out;
}

void assign_splits(Dataset& d, std::uint64_t seed) {
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::derive(seed, Stream::Split);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::floor(0.70 * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::floor(0.15 * static_cast<double>(n)));
  d.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  d.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  d.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
}

Dataset dataset_from_table(const CsvTable& table, const CsvLoadOptions& options) {
  if (table.rows.empty()) throw Error(ErrorCode::EmptyDataset, "CSV has a header but no rows");
  const std::size_t n_cols = table.header.size();
  std::size_t label_col = n_cols - 1;
  if (options.label_column) {
    const auto it = std::find(table.header.begin(), table.header.end(), *options.label_column);
    if (it == table.header.end()) {
      throw Error(ErrorCode::Config, "label column '" + *options.label_column + "' not in header");
    }
    label_col = static_cast<std::size_t>(it - table.header.begin());
  }
  if (n_cols < 2) throw MalformedCsvError(1, "need at least one feature column and a label column");
  {
    std::set<std::string> names(table.header.begin(), table.header.end());
    if (names.size() != n_cols) throw MalformedCsvError(1, "duplicate column names");
  }

  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (c != label_col) feature_cols.push_back(c);
  }

  std::vector<FeatureSpec> specs;
  if (options.schema) {
    for (const auto& spec : options.schema->features()) {
      const auto it = std::find(table.header.begin(), table.header.end(), spec.name);
      if (it == table.header.end() || static_cast<std::size_t>(it - table.header.begin()) == label_col) {
        throw MalformedCsvError(1, "schema feature '" + spec.name + "' missing from header");
      }
    }
    // Columns follow the given schema's order.
    feature_cols.clear();
    for (const auto& spec : options.schema->features()) {
      feature_cols.push_back(static_cast<std::size_t>(
          std::find(table.header.begin(), table.header.end(), spec.name) - table.header.begin()));
    }
    specs = options.schema->features();
  } else {
    for (std::size_t c : feature_cols) {
      bool numeric = false;
      bool all_parse = true;
      for (const auto& row : table.rows) {
        if (is_missing(row[c])) continue;
        if (parse_number(row[c])) {
          numeric = true;
        } else {
          all_parse = false;
          break;
        }
      }
      FeatureSpec spec;
      spec.name = table.header[c];
      if (numeric && all_parse) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& row : table.rows) {
          if (is_missing(row[c])) continue;
          const double x = *parse_number(row[c]);
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
        if (!(lo < hi)) hi = lo + 1.0;
        spec.kind = NumericRange{lo, hi};
      } else {
        std::set<std::string> values;
        for (const auto& row : table.rows) values.insert(row[c].empty() ? "?" : row[c]);
        spec.kind = CategoricalDomain{std::vector<std::string>(values.begin(), values.end())};
      }
      specs.push_back(std::move(spec));
    }
  }

  Dataset d;
  d.schema = FeatureSchema(specs);
  d.label_column = table.header[label_col];
  d.batch.schema = d.schema;
  d.batch.label_kind = LabelKind::Gold;

  std::vector<std::optional<double>> medians(specs.size());
  for (std::size_t f = 0; f < specs.size(); ++f) {
    if (!specs[f].is_numeric()) continue;
    std::vector<double> xs;
    for (const auto& row : table.rows) {
      if (auto x = parse_number(row[feature_cols[f]])) xs.push_back(*x);
    }
    if (!xs.empty()) medians[f] = median_of(std::move(xs));
  }

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Example ex;
    for (std::size_t f = 0; f < specs.size(); ++f) {
      const std::string& cell = row[feature_cols[f]];
      if (specs[f].is_numeric()) {
        if (auto x = parse_number(cell)) {
          ex.values.push_back(Value::number(*x));
        } else if (is_missing(cell) && medians[f]) {
          ex.values.push_back(Value::number(*medians[f]));
        } else {
          throw MalformedCsvError(table.row_lines[r], "column '" + specs[f].name + "': '" + cell +
                                                          "' is not a number");
        }
      } else {
        ex.values.push_back(Value::text(cell.empty() ? "?" : cell));
      }
    }
    if (row[label_col].empty()) throw MalformedCsvError(table.row_lines[r], "empty label");
    d.batch.examples.push_back(std::move(ex));
    d.batch.labels.push_back(row[label_col]);
  }
  if (options.label_of_interest) {
    d.batch.label_of_interest = *options.label_of_interest;
  } else {
    // A binarized file may open with a "not L" row; L is still the label of interest.
    std::string first = d.batch.labels.front();
    if (first.rfind("not ", 0) == 0) first.erase(0, 4);
    d.batch.label_of_interest = first;
  }
  assign_splits(d, options.seed);
  return d;
}

Dataset load_csv(const std::string& path, const CsvLoadOptions& options) {
  return dataset_from_table(read_csv_file(path), options);
}

Dataset project_dataset(const Dataset& d, const std::vector<std::string>& keep) {
  Dataset out = d;
  out.schema = d.schema.project(keep);
  std::vector<std::size_t> cols;
  for (const auto& f : out.schema.features()) cols.push_back(*d.schema.index_of(f.name));
  out.batch.schema = out.schema;
  for (auto& ex : out.batch.examples) {
    Example projected;
    for (std::size_t c : cols) projected.values.push_back(ex.values[c]);
    ex = std::move(projected);
  }
  return out;
}

std::vector<std::pair<std::string, double>> mutual_information(const Dataset& d) {
  std::vector<std::size_t> rows = d.train;
  if (rows.empty()) {
    rows.resize(d.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  const auto n = static_cast<double>(rows.size());
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t f = 0; f < d.schema.size(); ++f) {
    std::vector<std::string> bins(rows.size());
    if (d.schema[f].is_numeric()) {
      std::vector<double> xs;
      for (std::size_t r : rows) xs.push_back(d.batch.examples[r].values[f].as_number());
      std::vector<double> sorted = xs;
      std::sort(sorted.begin(), sorted.end());
      const double q1 = quantile7(sorted, 0.25), q2 = quantile7(sorted, 0.5), q3 = quantile7(sorted, 0.75);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        bins[i] = std::to_string((xs[i] > q1) + (xs[i] > q2) + (xs[i] > q3));
      }
    } else {
      for (std::size_t i = 0; i < rows.size(); ++i) bins[i] = d.batch.examples[rows[i]].values[f].as_text();
    }
    std::map<std::pair<std::string, std::string>, double> joint;
    std::map<std::string, double> px, py;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string& y = d.batch.labels[rows[i]];
      joint[{bins[i], y}] += 1.0;
      px[bins[i]] += 1.0;
      py[y] += 1.0;
    }
    double mi = 0.0;
    for (const auto& [key, c] : joint) {
      mi += c / n * std::log(c * n / (px[key.first] * py[key.second]));
    }
    out.emplace_back(d.schema[f].name, std::max(0.0, mi));
  }
  return out;
}

std::vector<std::string> mutual_info_topk(const Dataset& d, std::size_t k) {
  if (k > d.schema.size()) {
    throw Error(ErrorCode::InvalidArgument, "k = " + std::to_string(k) + " exceeds the " +
                                                std::to_string(d.schema.size()) + " features");
  }
  auto scores = mutual_information(d);
  std::stable_sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.second - b.second) > 1e-12) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(scores[i].first);
  return out;
}

Dataset synthetic_adult(std::size_t rows, std::uint64_t seed) {
  if (rows == 0) throw Error(ErrorCode::EmptyDataset, "synthetic dataset needs at least one row");
  const std::vector<std::string> workclass = {"Private", "Self-emp", "Gov", "Unemployed"};
  const std::vector<std::string> education = {"Dropout", "HS-grad", "Some-college", "Bachelors", "Masters", "Doctorate"};
  const std::array<double, 6> education_years = {7, 9, 10, 13, 14, 16};
  const std::vector<std::string> marital = {"Married", "Never-married", "Divorced", "Widowed"};
  const std::vector<std::string> occupation = {"Exec-managerial", "Prof-specialty", "Craft-repair",
                                               "Sales", "Adm-clerical", "Other-service"};
  const std::vector<std::string> relationship = {"Husband", "Wife", "Own-child", "Not-in-family", "Unmarried"};
  const std::vector<std::string> race = {"White", "Black", "Asian-Pac-Islander", "Other"};
  const std::vector<std::string> region = {"North-America", "Latin-America", "Asia", "Europe"};

  std::vector<FeatureSpec> specs = {
      {"age", NumericRange{17, 90}},
      {"workclass", CategoricalDomain{workclass}},
      {"education", CategoricalDomain{education}},
      {"education_num", NumericRange{1, 16}},
      {"marital_status", CategoricalDomain{marital}},
      {"occupation", CategoricalDomain{occupation}},
      {"relationship", CategoricalDomain{relationship}},
      {"race", CategoricalDomain{race}},
      {"sex", CategoricalDomain{{"Male", "Female"}}},
      {"capital_gain", NumericRange{0, 20000}},
      {"capital_loss", NumericRange{0, 2500}},
      {"hours_per_week", NumericRange{1, 99}},
      {"native_region", CategoricalDomain{region}},
  };

  Dataset d;
  d.schema = FeatureSchema(specs);
  d.label_column = "income";
  d.batch.schema = d.schema;
  d.batch.label_kind = LabelKind::Gold;
  d.batch.label_of_interest = ">50K";

  Rng rng = Rng::derive(seed, Stream::Dataset);
  for (std::size_t r = 0; r < rows; ++r) {
    const double age = std::clamp(std::round(17.0 + std::abs(rng.normal()) * 16.0 + rng.uniform() * 18.0), 17.0, 90.0);
    const std::size_t wc = pick_weighted(rng, {0.70, 0.12, 0.13, 0.05});
    const std::size_t ed = pick_weighted(rng, {0.13, 0.32, 0.23, 0.20, 0.09, 0.03});
    const bool male = rng.bernoulli(0.67);
    std::size_t ms;
    if (age < 25) {
      ms = pick_weighted(rng, {0.12, 0.82, 0.05, 0.01});
    } else {
      ms = pick_weighted(rng, {0.55, 0.22, 0.16, age > 60 ? 0.15 : 0.04});
    }
    std::size_t occ;
    if (ed >= 3) {
      occ = pick_weighted(rng, {0.30, 0.35, 0.05, 0.15, 0.10, 0.05});
    } else {
      occ = pick_weighted(rng, {0.08, 0.05, 0.27, 0.20, 0.20, 0.20});
    }
    std::size_t rel;
    if (ms == 0) {
      rel = male ? 0 : 1;
    } else if (age < 25) {
      rel = pick_weighted(rng, {0, 0, 0.55, 0.35, 0.10});
    } else {
      rel = pick_weighted(rng, {0, 0, 0.08, 0.62, 0.30});
    }
    const std::size_t rc = pick_weighted(rng, {0.85, 0.09, 0.03, 0.03});
    const double hours = std::clamp(std::round(40.0 + rng.normal() * 11.0 + (male ? 3.0 : -3.0)), 1.0, 99.0);
    const std::size_t nr = pick_weighted(rng, {0.90, 0.05, 0.03, 0.02});

    double score = -8.6 + 0.42 * education_years[ed] + 0.045 * std::min(age, 60.0) + 1.9 * (ms == 0) +
                   0.035 * (hours - 40.0) + 0.9 * (occ <= 1) + 0.3 * male - 0.8 * (wc == 3) +
                   0.8 * rng.normal();
    double gain = 0.0;
    if (rng.bernoulli(score > 0 ? 0.20 : 0.04)) gain = static_cast<double>(rng.between(1000, 20000));
    double loss = 0.0;
    if (rng.bernoulli(0.05)) loss = static_cast<double>(rng.between(500, 2500));
    if (gain > 7000) score += 2.5;

    Example ex;
    ex.values = {Value::number(age),
                 Value::text(workclass[wc]),
                 Value::text(education[ed]),
                 Value::number(education_years[ed]),
                 Value::text(marital[ms]),
                 Value::text(occupation[occ]),
                 Value::text(relationship[rel]),
                 Value::text(race[rc]),
                 Value::text(male ? "Male" : "Female"),
                 Value::number(gain),
                 Value::number(loss),
                 Value::number(hours),
                 Value::text(region[nr])};
    d.batch.examples.push_back(std::move(ex));
    d.batch.labels.emplace_back(score > 0 ? ">50K" : "<=50K");
  }
  assign_splits(d, seed);
  return d;
}

}  // namespace nlx
