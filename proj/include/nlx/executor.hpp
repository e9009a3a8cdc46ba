#pragma once

// Operational semantics for explanations and the four evaluation metrics.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "nlx/explang.hpp"
#include "nlx/value.hpp"

namespace nlx {

struct CategoricalDomain {
  std::vector<std::string> values;
  friend bool operator==(const CategoricalDomain&, const CategoricalDomain&) = default;
};

struct NumericRange {
  double min = 0.0;
  double max = 1.0;
  friend bool operator==(const NumericRange&, const NumericRange&) = default;
};

struct FeatureSpec {
  std::string name;
  std::variant<CategoricalDomain, NumericRange> kind;

  bool is_numeric() const noexcept { return std::holds_alternative<NumericRange>(kind); }
  const NumericRange& range() const { return std::get<NumericRange>(kind); }
  const CategoricalDomain& domain() const { return std::get<CategoricalDomain>(kind); }

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  // Throws InvalidArgument on duplicate names, empty domains or min >= max.
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  std::size_t size() const noexcept { return features_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<FeatureSpec>& features() const noexcept { return features_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::vector<std::string> names() const;

  // Keeps the listed features in schema order.
  FeatureSchema project(const std::vector<std::string>& keep) const;

  friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) {
    return a.features_ == b.features_;
  }

 private:
  std::vector<FeatureSpec> features_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One row; values are aligned with schema order.
struct Example {
  std::vector<Value> values;
  friend bool operator==(const Example&, const Example&) = default;
};

// Builds an example from name/value pairs; keys must match the schema exactly.
Example make_example(const FeatureSchema& schema, const std::map<std::string, Value>& values);
std::map<std::string, Value> example_to_map(const FeatureSchema& schema, const Example& ex);
// Throws InvalidArgument when a value is outside its feature's domain or range.
void validate_example(const FeatureSchema& schema, const Example& ex);

enum class LabelKind { Predicted, Gold };

struct LabeledBatch {
  FeatureSchema schema;
  std::vector<Example> examples;
  std::vector<std::string> labels;
  LabelKind label_kind = LabelKind::Predicted;
  std::string label_of_interest;

  std::size_t size() const noexcept { return examples.size(); }
};

// "not " + label.
std::string negate_label(std::string_view label);
bool is_binary_label(std::string_view label, std::string_view label_of_interest);

struct Verdict {
  bool applies = false;
  std::string predicted_label;
};

struct EvalReport {
  double faithfulness = 0.0;
  std::optional<double> simulatability;
  double coverage = 0.0;
  double precision = 0.0;
};

// Throws UnknownFeature / TypeMismatch.
bool condition_holds(const Condition& cond, const FeatureSchema& schema, const Example& ex);
bool clause_holds(const ClauseTree& clause, const FeatureSchema& schema, const Example& ex);

// Whether an explanation predicts the label of interest given its clause truth.
// Quantifiers act as a direction switch at confidence 0.5.
bool predicts_interest(const Explanation& expl, bool applies) noexcept;

// Throws LabelMismatch when the explanation's label is not `label_of_interest`.
Verdict apply_explanation(const Explanation& expl, const FeatureSchema& schema,
                          const Example& ex, std::string_view label_of_interest);

// Batch must be PREDICTED (faithfulness) or GOLD (simulatability) and non-empty.
double faithfulness(const Explanation& expl, const LabeledBatch& batch);
double simulatability(const Explanation& expl, const LabeledBatch& batch);

struct CoveragePrecision {
  double coverage = 0.0;
  double precision = 0.0;  // 0 when coverage is 0
};

CoveragePrecision coverage_precision(const Explanation& expl, const LabeledBatch& batch);

// Faithfulness/coverage/precision on `predicted`, simulatability on `gold` if given.
EvalReport evaluate(const Explanation& expl, const LabeledBatch& predicted,
                    const LabeledBatch* gold = nullptr);

// Match counts backing the metrics, for callers that merge shards.
struct MatchCounts {
  std::size_t total = 0;
  std::size_t applied = 0;
  std::size_t applied_matches = 0;
  std::size_t other_matches = 0;

  std::size_t matches() const noexcept { return applied_matches + other_matches; }
};

MatchCounts count_matches(const Explanation& expl, const LabeledBatch& batch);

}  // namespace nlx
