#include "nlx/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "nlx/error.hpp"
#include "nlx/rng.hpp"

namespace nlx {

std::size_t Budget::used() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return used_;
}

std::size_t Budget::remaining() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return limit_ - used_;
}

void Budget::charge(std::size_t n) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (n > limit_ - used_) {
    throw Error(ErrorCode::BudgetExhausted, "budget of " + std::to_string(limit_) +
                                                " calls exhausted (" + std::to_string(used_) +
                                                " used, " + std::to_string(n) + " requested)");
  }
  used_ += n;
}

ClassifierHandle::ClassifierHandle(std::shared_ptr<const Classifier> classifier,
                                   std::shared_ptr<Budget> budget)
    : classifier_(std::move(classifier)), budget_(std::move(budget)) {
  if (!classifier_ || !budget_) throw Error(ErrorCode::InvalidArgument, "null classifier or budget");
}

std::string ClassifierHandle::predict(const Example& ex) {
  budget_->charge(1);
  ++metered_calls_;
  return classifier_->predict(ex);
}

std::vector<std::string> ClassifierHandle::predict_exempt(const std::vector<Example>& examples) const {
  std::vector<std::string> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(classifier_->predict(ex));
  return out;
}

std::shared_ptr<const Classifier> explanation_classifier(FeatureSchema schema, Explanation e) {
  auto shared_schema = std::make_shared<const FeatureSchema>(schema);
  return std::make_shared<FunctionClassifier>(
      std::move(schema), [s = std::move(shared_schema), e = std::move(e)](const Example& ex) {
        return predicts_interest(e, clause_holds(e.clause, *s, ex)) ? e.label : negate_label(e.label);
      });
}

// ---------------------------------------------------------------------------
// LIME

namespace {

struct Column {
  std::string key;
  std::size_t feature = 0;
  std::optional<std::string> category;  // one-hot level, or numeric when empty
};

std::vector<Example> perturb(const FeatureSchema& schema, const std::vector<Example>& anchors,
                             std::size_t per_example, Rng& rng) {
  std::vector<Example> out;
  for (const auto& anchor : anchors) {
    for (std::size_t k = 0; k < per_example; ++k) {
      Example p = anchor;
      for (std::size_t f = 0; f < schema.size(); ++f) {
        const FeatureSpec& spec = schema[f];
        if (spec.is_numeric()) {
          const double span = spec.range().max - spec.range().min;
          const double x = anchor.values[f].as_number() + rng.normal() * 0.1 * span;
          p.values[f] = Value::number(std::clamp(x, spec.range().min, spec.range().max));
        } else {
          const auto& dom = spec.domain().values;
          p.values[f] = Value::text(dom[rng.below(dom.size())]);
        }
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

double column_value(const Column& col, const Example& ex,
                    const std::map<std::string, std::pair<double, double>>& scaling) {
  const Value& v = ex.values.at(col.feature);
  if (col.category) return v.to_string() == *col.category ? 1.0 : 0.0;
  const auto& [mean, scale] = scaling.at(col.key);
  return (v.as_number() - mean) / scale;
}

}  // namespace

AttributionExplanation lime_budgeted(const std::vector<Example>& anchors, ClassifierHandle& classifier, const std::string& reference_class,
                                     const LimeOptions& options) {
  if (anchors.empty()) throw Error(ErrorCode::InvalidArgument, "LIME needs at least one anchor example");
  if (options.perturbations_per_example == 0) {
    throw Error(ErrorCode::InvalidArgument, "perturbations_per_example must be positive");
  }
  const std::size_t needed = anchors.size() * options.perturbations_per_example;
  if (needed > classifier.budget().remaining()) {
    throw Error(ErrorCode::BudgetExhausted, "LIME needs " + std::to_string(needed) + " calls, " +
                                                std::to_string(classifier.budget().remaining()) +
                                                " remain");
  }
  const FeatureSchema& schema = classifier.schema();

  Rng rng = Rng::derive(options.seed, Stream::Perturb);
  const std::vector<Example> rows = perturb(schema, anchors, options.perturbations_per_example, rng);
  std::vector<std::string> labels;
  for (const auto& r : rows) labels.push_back(classifier.predict(r));

  AttributionExplanation out;
  out.reference_class = reference_class;

  // Design matrix: standardized numerics and one-hot categoricals. The first
  // level of each categorical is the dummy-coding baseline for the exact fit.
  std::vector<Column> columns;
  std::vector<bool> baseline_level;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const FeatureSpec& spec = schema[f];
    if (spec.is_numeric()) {
      double mean = 0.0;
      for (const auto& r : rows) mean += r.values[f].as_number();
      mean /= static_cast<double>(rows.size());
      double var = 0.0;
      for (const auto& r : rows) var += std::pow(r.values[f].as_number() - mean, 2);
      const double sd = std::sqrt(var / static_cast<double>(rows.size()));
      out.standardization[spec.name] = {mean, sd > 0.0 ? sd : 1.0};
      columns.push_back(Column{spec.name, f, std::nullopt});
      baseline_level.push_back(false);
    } else {
      const auto& dom = spec.domain().values;
      for (std::size_t v = 0; v < dom.size(); ++v) {
        columns.push_back(Column{spec.name + "=" + dom[v], f, dom[v]});
        baseline_level.push_back(v == 0);
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(columns.size());
  Eigen::MatrixXd z(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = labels[static_cast<std::size_t>(i)] == reference_class ? 1.0 : -1.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      z(i, j) = column_value(columns[static_cast<std::size_t>(j)], rows[static_cast<std::size_t>(i)],
                             out.standardization);
    }
  }

  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!baseline_level[static_cast<std::size_t>(j)]) kept.push_back(j);
  }
  Eigen::MatrixXd design(n, static_cast<Eigen::Index>(kept.size()) + 1);
  design.col(0).setOnes();
  for (std::size_t k = 0; k < kept.size(); ++k) design.col(static_cast<Eigen::Index>(k) + 1) = z.col(kept[k]);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() == design.cols()) {
    const Eigen::VectorXd beta = qr.solve(y);
    out.intercept = beta(0);
    for (Eigen::Index j = 0; j < p; ++j) out.weights[columns[static_cast<std::size_t>(j)].key] = 0.0;
    for (std::size_t k = 0; k < kept.size(); ++k) {
      out.weights[columns[static_cast<std::size_t>(kept[k])].key] = beta(static_cast<Eigen::Index>(k) + 1);
    }
  } else {
    // Singular system: per-column correlation with the target.
    out.fallback = true;
    const double y_mean = y.mean();
    const Eigen::VectorXd yc = y.array() - y_mean;
    out.intercept = y_mean;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double m = z.col(j).mean();
      const Eigen::VectorXd zc = z.col(j).array() - m;
      const double denom = std::sqrt(zc.squaredNorm() * yc.squaredNorm());
      const double w = denom > 0.0 ? zc.dot(yc) / denom : 0.0;
      out.weights[columns[static_cast<std::size_t>(j)].key] = w;
      out.intercept -= w * m;
    }
  }
  return out;
}

double attribution_vote(const AttributionExplanation& a, const FeatureSchema& schema, const Example& ex) {
  double vote = a.intercept;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const FeatureSpec& spec = schema[f];
    if (spec.is_numeric()) {
      const auto w = a.weights.find(spec.name);
      const auto s = a.standardization.find(spec.name);
      if (w == a.weights.end() || s == a.standardization.end()) continue;
      vote += w->second * (ex.values.at(f).as_number() - s->second.first) / s->second.second;
    } else {
      const auto w = a.weights.find(spec.name + "=" + ex.values.at(f).to_string());
      if (w != a.weights.end()) vote += w->second;
    }
  }
  return vote;
}

std::string attribution_predict(const AttributionExplanation& a, const FeatureSchema& schema,
                                const Example& ex) {
  return attribution_vote(a, schema, ex) > 0.0 ? a.reference_class : negate_label(a.reference_class);
}

double attribution_agreement(const AttributionExplanation& a, const LabeledBatch& batch) {
  if (batch.examples.empty()) throw Error(ErrorCode::EmptyBatch, "batch is empty");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const bool vote_ref = attribution_vote(a, batch.schema, batch.examples[i]) > 0.0;
    const bool predicts_interest = vote_ref == (a.reference_class == batch.label_of_interest);
    hits += predicts_interest == (batch.labels[i] == batch.label_of_interest);
  }
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

std::map<std::string, double> attribution_importance(const AttributionExplanation& a,
                                                     const FeatureSchema& schema) {
  std::map<std::string, double> out;
  for (const auto& f : schema.features()) {
    double best = 0.0;
    for (const auto& [key, w] : a.weights) {
      if (key == f.name || key.rfind(f.name + "=", 0) == 0) best = std::max(best, std::abs(w));
    }
    out[f.name] = best;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Anchors

namespace {

double scaled_distance(const FeatureSchema& schema, const Example& a, const Example& b) {
  double d = 0.0;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (schema[f].is_numeric()) {
      const double span = schema[f].range().max - schema[f].range().min;
      d += std::abs(a.values[f].as_number() - b.values[f].as_number()) / span;
    } else {
      d += a.values[f].to_string() == b.values[f].to_string() ? 0.0 : 1.0;
    }
  }
  return d;
}

ClauseTree conjunction(const std::vector<Condition>& conds) {
  ClauseTree t = conds.front();
  for (std::size_t i = 1; i < conds.size(); ++i) t = ClauseTree::join(BoolOp::And, t, conds[i]);
  return t;
}

}  // namespace

std::vector<Example> nearest_pool(const FeatureSchema& schema, const Example& anchor,
                                  const std::vector<Example>& candidates, std::size_t k) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> dist(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) dist[i] = scaled_distance(schema, anchor, candidates[i]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  std::vector<Example> out;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out.push_back(candidates[order[i]]);
  return out;
}

AnchorResult anchors_budgeted(const Example& anchor, const std::string& anchor_label,
                              const std::vector<Example>& pool, ClassifierHandle& classifier,
                              double precision_target, const std::string& label_of_interest) {
  if (pool.size() > classifier.budget().remaining()) {
    throw Error(ErrorCode::BudgetExhausted, "Anchors pool of " + std::to_string(pool.size()) +
                                                " exceeds the remaining budget of " +
                                                std::to_string(classifier.budget().remaining()));
  }
  if (!is_binary_label(anchor_label, label_of_interest)) {
    throw Error(ErrorCode::LabelMismatch, "anchor label '" + anchor_label + "' is not binarized against '" +
                                              label_of_interest + "'");
  }
  const FeatureSchema& schema = classifier.schema();

  // The anchor itself, with its given label, joins the labeled pool.
  std::vector<Example> rows{anchor};
  std::vector<bool> agrees{true};
  for (const auto& ex : pool) {
    const std::string y = classifier.predict(ex);
    const bool y_interest = y == label_of_interest;
    rows.push_back(ex);
    agrees.push_back(y_interest == (anchor_label == label_of_interest));
  }

  std::vector<Condition> options;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const Value& v = anchor.values.at(f);
    if (schema[f].is_numeric()) {
      options.push_back(Condition{schema[f].name, Comparator::Geq, v});
      options.push_back(Condition{schema[f].name, Comparator::Leq, v});
    } else {
      options.push_back(Condition{schema[f].name, Comparator::Eq, v});
    }
  }

  auto measure = [&](const std::vector<Condition>& rule) {
    std::size_t covered = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      bool holds = true;
      for (const auto& c : rule) holds = holds && condition_holds(c, schema, rows[i]);
      if (!holds) continue;
      ++covered;
      correct += agrees[i];
    }
    return std::pair{covered == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(covered),
                     static_cast<double>(covered) / static_cast<double>(rows.size())};
  };

  std::vector<Condition> rule;
  auto [precision, coverage] = measure(rule);
  while (precision < precision_target && rule.size() < kMaxAnchorConditions) {
    std::optional<std::size_t> pick;
    double pick_precision = -1.0;
    double pick_coverage = -1.0;
    for (std::size_t o = 0; o < options.size(); ++o) {
      const bool used = std::any_of(rule.begin(), rule.end(),
                                    [&](const Condition& c) { return c.feature == options[o].feature; });
      if (used) continue;
      auto trial = rule;
      trial.push_back(options[o]);
      const auto [p, c] = measure(trial);
      if (p > pick_precision || (p == pick_precision && c > pick_coverage)) {
        pick = o;
        pick_precision = p;
        pick_coverage = c;
      }
    }
    if (!pick) break;
    rule.push_back(options[*pick]);
    precision = pick_precision;
    coverage = pick_coverage;
  }

  AnchorResult result;
  result.precision = precision;
  result.coverage = coverage;
  result.target_reached = precision >= precision_target;
  const bool negated = anchor_label != label_of_interest;
  if (rule.empty()) {
    // Always-true rule over the first feature.
    const Value& v = anchor.values.at(0);
    ClauseTree t = ClauseTree::join(BoolOp::Or, Condition{schema[0].name, Comparator::Eq, v},
                                    Condition{schema[0].name, Comparator::Neq, v});
    result.explanation = Explanation{t, std::nullopt, label_of_interest, negated, std::nullopt, false};
  } else {
    result.explanation = Explanation{conjunction(rule), std::nullopt, label_of_interest, negated, std::nullopt, false};
  }
  return result;
}

}  // namespace nlx
