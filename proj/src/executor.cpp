#include "nlx/executor.hpp"

#include <algorithm>
#include <set>

#include "nlx/error.hpp"

namespace nlx {

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const FeatureSpec& f = features_[i];
    if (f.name.empty()) throw Error(ErrorCode::InvalidArgument, "feature name is empty");
    if (!index_.emplace(f.name, i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate feature name '" + f.name + "'");
    }
    if (f.is_numeric()) {
      if (!(f.range().min < f.range().max)) {
        throw Error(ErrorCode::InvalidArgument, "feature '" + f.name + "' needs min < max");
      }
    } else if (f.domain().values.empty()) {
      throw Error(ErrorCode::InvalidArgument, "feature '" + f.name + "' has an empty domain");
    }
  }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.name);
  return out;
}

FeatureSchema FeatureSchema::project(const std::vector<std::string>& keep) const {
  std::set<std::string> wanted(keep.begin(), keep.end());
  std::vector<FeatureSpec> kept;
  for (const auto& f : features_) {
    if (wanted.erase(f.name)) kept.push_back(f);
  }
  if (!wanted.empty()) {
    throw Error(ErrorCode::UnknownFeature, "unknown feature '" + *wanted.begin() + "'");
  }
  return FeatureSchema(std::move(kept));
}

Example make_example(const FeatureSchema& schema, const std::map<std::string, Value>& values) {
  if (values.size() != schema.size()) {
    throw Error(ErrorCode::InvalidArgument, "example has " + std::to_string(values.size()) +
                                                " values for " + std::to_string(schema.size()) +
                                                " features");
  }
  Example ex;
  ex.values.resize(schema.size());
  for (const auto& [name, value] : values) {
    const auto idx = schema.index_of(name);
    if (!idx) throw Error(ErrorCode::UnknownFeature, "unknown feature '" + name + "'");
    ex.values[*idx] = value;
  }
  return ex;
}

std::map<std::string, Value> example_to_map(const FeatureSchema& schema, const Example& ex) {
  std::map<std::string, Value> out;
  for (std::size_t i = 0; i < schema.size(); ++i) out.emplace(schema[i].name, ex.values.at(i));
  return out;
}

void validate_example(const FeatureSchema& schema, const Example& ex) {
  if (ex.values.size() != schema.size()) {
    throw Error(ErrorCode::InvalidArgument, "example width does not match schema");
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const FeatureSpec& f = schema[i];
    const Value& v = ex.values[i];
    if (f.is_numeric()) {
      if (!v.is_number() || v.as_number() < f.range().min || v.as_number() > f.range().max) {
        throw Error(ErrorCode::InvalidArgument,
                    "value " + v.to_string() + " outside range of '" + f.name + "'");
      }
    } else {
      const auto& dom = f.domain().values;
      if (v.is_number() || std::find(dom.begin(), dom.end(), v.as_text()) == dom.end()) {
        throw Error(ErrorCode::InvalidArgument,
                    "value '" + v.to_string() + "' outside domain of '" + f.name + "'");
      }
    }
  }
}

std::string negate_label(std::string_view label) { return "not " + std::string(label); }

bool is_binary_label(std::string_view label, std::string_view label_of_interest) {
  return label == label_of_interest ||
         (label.size() == label_of_interest.size() + 4 && label.substr(0, 4) == "not " &&
          label.substr(4) == label_of_interest);
}

// ---------------------------------------------------------------------------

bool condition_holds(const Condition& cond, const FeatureSchema& schema, const Example& ex) {
  const auto idx = schema.index_of(cond.feature);
  if (!idx) throw Error(ErrorCode::UnknownFeature, "unknown feature '" + cond.feature + "'");
  const FeatureSpec& spec = schema[*idx];
  const Value& x = ex.values.at(*idx);

  if (spec.is_numeric()) {
    double threshold = 0.0;
    if (cond.value.is_number()) {
      threshold = cond.value.as_number();
    } else if (auto parsed = parse_number(cond.value.as_text())) {
      threshold = *parsed;
    } else {
      throw Error(ErrorCode::TypeMismatch, "numeric feature '" + cond.feature +
                                               "' compared against text '" +
                                               cond.value.as_text() + "'");
    }
    return compare_numbers(cond.comparator, x.as_number(), threshold);
  }

  if (requires_numeric(cond.comparator)) {
    throw Error(ErrorCode::TypeMismatch, "comparator '" +
                                             std::string(comparator_phrase(cond.comparator)) +
                                             "' applied to categorical feature '" +
                                             cond.feature + "'");
  }
  const std::string& category = x.as_text();
  bool equal = category == cond.value.to_string();
  if (!equal && cond.value.is_number()) {
    // Categories such as "4.0" still match the literal 4.
    const auto parsed = parse_number(category);
    equal = parsed && *parsed == cond.value.as_number();
  }
  return cond.comparator == Comparator::Eq ? equal : !equal;
}

bool clause_holds(const ClauseTree& clause, const FeatureSchema& schema, const Example& ex) {
  if (clause.is_leaf()) return condition_holds(clause.condition(), schema, ex);
  const bool lhs = clause_holds(clause.left(), schema, ex);
  const bool rhs = clause_holds(clause.right(), schema, ex);
  return clause.op() == BoolOp::And ? (lhs && rhs) : (lhs || rhs);
}

bool predicts_interest(const Explanation& expl, bool applies) noexcept {
  const double confidence = expl.quantifier ? expl.quantifier->confidence() : 1.0;
  const bool stated_is_interest = !expl.label_negated;
  const bool toward_stated = confidence >= 0.5;
  const bool when_applies = toward_stated ? stated_is_interest : !stated_is_interest;
  return applies ? when_applies : !when_applies;
}

namespace {

void check_label(const Explanation& expl, std::string_view label_of_interest) {
  if (expl.label != label_of_interest) {
    throw Error(ErrorCode::LabelMismatch, "explanation label '" + expl.label +
                                              "' does not match label of interest '" +
                                              std::string(label_of_interest) + "'");
  }
}

void check_batch(const LabeledBatch& batch, std::optional<LabelKind> kind) {
  if (batch.examples.empty()) throw Error(ErrorCode::EmptyBatch, "batch is empty");
  if (batch.examples.size() != batch.labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "batch has mismatched example and label counts");
  }
  if (kind && batch.label_kind != *kind) {
    throw Error(ErrorCode::WrongLabelKind,
                *kind == LabelKind::Predicted
                    ? "faithfulness needs classifier predictions, got gold labels"
                    : "simulatability needs gold labels, got classifier predictions");
  }
}

}  // namespace

Verdict apply_explanation(const Explanation& expl, const FeatureSchema& schema,
                          const Example& ex, std::string_view label_of_interest) {
  check_label(expl, label_of_interest);
  Verdict v;
  v.applies = clause_holds(expl.clause, schema, ex);
  v.predicted_label = predicts_interest(expl, v.applies) ? std::string(label_of_interest)
                                                         : negate_label(label_of_interest);
  return v;
}

MatchCounts count_matches(const Explanation& expl, const LabeledBatch& batch) {
  check_batch(batch, std::nullopt);
  check_label(expl, batch.label_of_interest);
  MatchCounts counts;
  counts.total = batch.size();
  const bool interest_if_applies = predicts_interest(expl, true);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const bool applies = clause_holds(expl.clause, batch.schema, batch.examples[i]);
    const bool predicted_interest = applies ? interest_if_applies : !interest_if_applies;
    const bool actual_interest = batch.labels[i] == batch.label_of_interest;
    const bool match = predicted_interest == actual_interest;
    if (applies) {
      ++counts.applied;
      counts.applied_matches += match;
    } else {
      counts.other_matches += match;
    }
  }
  return counts;
}

double faithfulness(const Explanation& expl, const LabeledBatch& batch) {
  check_batch(batch, LabelKind::Predicted);
  const MatchCounts c = count_matches(expl, batch);
  return static_cast<double>(c.matches()) / static_cast<double>(c.total);
}

double simulatability(const Explanation& expl, const LabeledBatch& batch) {
  check_batch(batch, LabelKind::Gold);
  const MatchCounts c = count_matches(expl, batch);
  return static_cast<double>(c.matches()) / static_cast<double>(c.total);
}

CoveragePrecision coverage_precision(const Explanation& expl, const LabeledBatch& batch) {
  const MatchCounts c = count_matches(expl, batch);
  CoveragePrecision out;
  out.coverage = static_cast<double>(c.applied) / static_cast<double>(c.total);
  out.precision = c.applied == 0 ? 0.0
                                 : static_cast<double>(c.applied_matches) /
                                       static_cast<double>(c.applied);
  return out;
}

EvalReport evaluate(const Explanation& expl, const LabeledBatch& predicted,
                    const LabeledBatch* gold) {
  EvalReport report;
  report.faithfulness = faithfulness(expl, predicted);
  const CoveragePrecision cp = coverage_precision(expl, predicted);
  report.coverage = cp.coverage;
  report.precision = cp.precision;
  if (gold) report.simulatability = simulatability(expl, *gold);
  return report;
}

}  // namespace nlx
