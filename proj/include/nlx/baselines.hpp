#pragma once

// Budget-metered simplified LIME and Anchors.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "nlx/classifier.hpp"
#include "nlx/executor.hpp"
#include "nlx/explang.hpp"

namespace nlx {

// Thread-safe call counter with a hard limit.
class Budget {
 public:
  explicit Budget(std::size_t limit) : limit_(limit) {}

  std::size_t limit() const noexcept { return limit_; }
  std::size_t used() const;
  std::size_t remaining() const;

  // Throws BudgetExhausted, leaving `used` unchanged, when n units are not left.
  void charge(std::size_t n = 1);

 private:
  mutable std::mutex mutex_;
  std::size_t limit_;
  std::size_t used_ = 0;
};

// Metered access to a classifier. Every predict() costs one budget unit.
class ClassifierHandle {
 public:
  ClassifierHandle(std::shared_ptr<const Classifier> classifier, std::shared_ptr<Budget> budget);

  std::string predict(const Example& ex);
  // Predictions on the explainer's given inputs; not metered.
  std::vector<std::string> predict_exempt(const std::vector<Example>& examples) const;

  const FeatureSchema& schema() const { return classifier_->schema(); }
  Budget& budget() noexcept { return *budget_; }
  const Budget& budget() const noexcept { return *budget_; }
  std::size_t metered_calls() const noexcept { return metered_calls_; }

 private:
  std::shared_ptr<const Classifier> classifier_;
  std::shared_ptr<Budget> budget_;
  std::size_t metered_calls_ = 0;
};

struct AttributionExplanation {
  // Numeric features are keyed by name and weigh standardized values;
  // categorical features are one-hot, keyed "name=value".
  std::map<std::string, double> weights;
  double intercept = 0.0;
  std::string reference_class;
  // Per numeric feature: mean and scale used for standardization.
  std::map<std::string, std::pair<double, double>> standardization;
  bool fallback = false;  // the least-squares fit was singular
};

struct LimeOptions {
  std::size_t perturbations_per_example = 1;
  std::uint64_t seed = 0;
};

// Fits a linear surrogate (targets +1 for reference_class, -1 otherwise) on
// the classifier's answers for perturbations of the anchors. The anchors only
// centre the sampling; one call per perturbation.
// Throws InvalidArgument (no anchors or zero perturbations) or BudgetExhausted,
// both before spending any call.
AttributionExplanation lime_budgeted(const std::vector<Example>& anchors, ClassifierHandle& classifier,
                                     const std::string& reference_class, const LimeOptions& options);

double attribution_vote(const AttributionExplanation& a, const FeatureSchema& schema, const Example& ex);
// Simulation rule: reference_class iff the vote is positive.
std::string attribution_predict(const AttributionExplanation& a, const FeatureSchema& schema,
                                const Example& ex);
// Fraction of batch labels reproduced by the simulation rule, after mapping
// both sides onto {L, not L} for the batch's label of interest.
double attribution_agreement(const AttributionExplanation& a, const LabeledBatch& batch);
// Largest absolute weight per schema feature.
std::map<std::string, double> attribution_importance(const AttributionExplanation& a,
                                                     const FeatureSchema& schema);

struct AnchorResult {
  Explanation explanation;
  double precision = 0.0;  // on the anchor plus labeled pool
  double coverage = 0.0;
  bool target_reached = false;
};

inline constexpr std::size_t kMaxAnchorConditions = 3;

// Greedy rule growth from the anchor's own feature values. The anchor's label
// is given; the pool is labeled through the classifier. Throws BudgetExhausted
// before spending when the pool does not fit in the remaining budget.
AnchorResult anchors_budgeted(const Example& anchor, const std::string& anchor_label,
                              const std::vector<Example>& pool, ClassifierHandle& classifier,
                              double precision_target, const std::string& label_of_interest);

// The k candidates closest to `anchor` (mismatch count for categoricals,
// range-scaled distance for numerics); ties keep candidate order.
std::vector<Example> nearest_pool(const FeatureSchema& schema, const Example& anchor,
                                  const std::vector<Example>& candidates, std::size_t k);

}  // namespace nlx
