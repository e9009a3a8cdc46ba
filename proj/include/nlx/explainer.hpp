#pragma once

// Search for the most faithful explanation of a batch of input-prediction
// pairs. The search reads only the given predictions.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nlx/executor.hpp"
#include "nlx/explang.hpp"

namespace nlx {

enum class Strategy { Top1, Beam, PerFeature };

std::string_view strategy_name(Strategy s) noexcept;
// Accepts "top1"/"greedy", "beam", "perfeat"/"per_feature"/"pf". Throws Config.
Strategy strategy_from_name(std::string_view name);

struct SearchConfig {
  Strategy strategy = Strategy::PerFeature;
  std::size_t beam_width = 20;
  // Beam levels: 1 keeps single conditions, 2 adds one AND/OR extension.
  int max_conjunction_depth = 1;
  bool quantifier_fitting = true;

  // Throws Config.
  void validate() const;
};

struct Candidate {
  Explanation explanation;
  std::string rendered;
  std::size_t matches = 0;
  std::size_t applied = 0;
  std::size_t total = 0;

  double faithfulness() const noexcept {
    return total ? static_cast<double>(matches) / static_cast<double>(total) : 0.0;
  }
  double coverage() const noexcept {
    return total ? static_cast<double>(applied) / static_cast<double>(total) : 0.0;
  }
};

// Deterministic order: more matches, then more coverage, then fewer
// conditions, then lexicographically smaller rendering.
bool ranks_before(const Candidate& a, const Candidate& b) noexcept;

struct CandidateSet {
  std::vector<Candidate> candidates;  // sorted by ranks_before, unique renderings

  bool empty() const noexcept { return candidates.empty(); }
  std::size_t size() const noexcept { return candidates.size(); }
  const Candidate& best() const;
};

// Categorical: EQ/NEQ against schema domain plus observed values.
// Numeric: the six ordered comparators at each midpoint between consecutive
// distinct observed values (none when a feature shows a single value).
std::vector<Condition> enumerate_conditions(const FeatureSchema& schema, const LabeledBatch& batch);

// Nearest-confidence quantifier; the first table entry (higher confidence)
// wins ties.
Quantifier nearest_quantifier(double p);

// `label` is L or "not L" for the batch's label of interest L. The quantifier
// is omitted when the clause always carries the label. Throws ZeroCoverage.
Explanation fit_quantifier(const ClauseTree& clause, std::string_view label, const LabeledBatch& batch);

// Both throw DegenerateBatch for single-class input and InvalidArgument for
// non-binarized labels.
CandidateSet per_feature_search(const LabeledBatch& batch, const SearchConfig& config);
CandidateSet beam_conjunction_search(const LabeledBatch& batch, const SearchConfig& config);
// Most faithful condition on the feature with the highest information gain.
CandidateSet top1_search(const LabeledBatch& batch, const SearchConfig& config);

struct ExplainResult {
  Explanation best;
  EvalReport report;  // on the input batch
  CandidateSet candidates;
};

ExplainResult explain(const LabeledBatch& batch, const SearchConfig& config);

// Scores an explanation on a batch with the explainer's counting.
Candidate score_candidate(const Explanation& e, const LabeledBatch& batch);

struct EnsembleResult {
  Explanation best;
  // Per-subset winners rescored on all N pairs, in subset order. Subsets with
  // a single predicted class are skipped.
  std::vector<Candidate> winners;
  std::vector<std::vector<std::size_t>> subsets;
};

// Partitions the batch into n_subsets disjoint random subsets of subset_size,
// explains each and keeps the winner that matches most of the full batch.
// Throws InsufficientExamples, or DegenerateBatch when every subset is
// single-class.
EnsembleResult ensemble_subsets(const LabeledBatch& batch, const SearchConfig& config,
                                std::size_t n_subsets, std::size_t subset_size, std::uint64_t seed);

LabeledBatch subset_of(const LabeledBatch& batch, const std::vector<std::size_t>& indices);

}  // namespace nlx
