#pragma once

// Tabular datasets: CSV ingestion with schema inference, seeded splits,
// mutual-information feature ranking and a synthetic census-style table.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlx/csv.hpp"
#include "nlx/executor.hpp"

namespace nlx {

struct Dataset {
  FeatureSchema schema;
  LabeledBatch batch;  // GOLD, raw (possibly multi-class) labels
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::string label_column;

  std::size_t size() const noexcept { return batch.size(); }
  // Rows of one split as a batch of the same kind and label of interest.
  LabeledBatch rows(const std::vector<std::size_t>& indices) const;
};

struct CsvLoadOptions {
  // Defaults to the last column.
  std::optional<std::string> label_column;
  // Defaults to the first row's label, minus any "not " prefix.
  std::optional<std::string> label_of_interest;
  std::uint64_t seed = 0;
  // Skips inference and enforces this schema (header order may differ).
  std::optional<FeatureSchema> schema;
};

// A column is numeric iff every non-missing cell ("" or "?") parses as a
// number; missing numeric cells take the column median. Splits are 70/15/15
// by seeded shuffle. Throws MalformedCsvError, EmptyDataset or Io.
Dataset load_csv(const std::string& path, const CsvLoadOptions& options = {});
Dataset dataset_from_table(const CsvTable& table, const CsvLoadOptions& options = {});

// Seeded 70/15/15 partition of [0, n).
void assign_splits(Dataset& d, std::uint64_t seed);

// Keeps the named features (schema order); splits are unchanged.
Dataset project_dataset(const Dataset& d, const std::vector<std::string>& keep);

// I(feature; label) in nats on the train split (all rows when it is empty).
// Numeric features are cut at their type-7 quartiles.
std::vector<std::pair<std::string, double>> mutual_information(const Dataset& d);
// Top k by mutual information, ties by name. Throws InvalidArgument if k > features.
std::vector<std::string> mutual_info_topk(const Dataset& d, std::size_t k);

// Deterministic census-like table: 13 features, label ">50K" / "<=50K".
Dataset synthetic_adult(std::size_t rows, std::uint64_t seed);
inline constexpr const char* kBuiltinAdult = "builtin:adult";

}  // namespace nlx
