#pragma once

// Synthetic classification tasks with planted explanations, and the
// line-oriented text form of a labeled batch.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nlx/executor.hpp"
#include "nlx/explang.hpp"
#include "nlx/rng.hpp"

namespace nlx {

enum class Conjunction { None, Simple, Nested };
enum class Negation { None, Clause, Label, ClauseAndLabel };

struct ComplexityDescriptor {
  bool quantifier = false;
  Conjunction conjunction = Conjunction::None;
  Negation negation = Negation::None;

  std::size_t num_conditions() const noexcept {
    return conjunction == Conjunction::None ? 1 : conjunction == Conjunction::Simple ? 2 : 3;
  }
  bool clause_negated() const noexcept {
    return negation == Negation::Clause || negation == Negation::ClauseAndLabel;
  }
  bool label_negated() const noexcept {
    return negation == Negation::Label || negation == Negation::ClauseAndLabel;
  }

  friend bool operator==(const ComplexityDescriptor&, const ComplexityDescriptor&) = default;
};

// All 2 x 3 x 4 descriptors in a fixed order.
std::array<ComplexityDescriptor, 24> all_descriptors();

// Short names such as "plain-none-none" or "quant-nested-clause+label".
std::string descriptor_name(const ComplexityDescriptor& d);
// Throws InvalidArgument.
ComplexityDescriptor descriptor_from_name(std::string_view name);

// The descriptor an explanation realises.
ComplexityDescriptor describe(const Explanation& e);

struct SyntheticTask {
  FeatureSchema schema;
  Explanation planted;
  LabeledBatch train;  // PREDICTED: the planted rule plays the classifier
  LabeledBatch test;   // GOLD
  ComplexityDescriptor descriptor;
  std::uint64_t seed = 0;
};

inline constexpr double kMinClassFraction = 0.10;
inline constexpr int kMaxBalanceAttempts = 64;

FeatureSchema sample_schema(std::size_t num_features, std::uint64_t seed);

// Throws SchemaTooSmall when the schema has fewer features than conditions.
Explanation sample_explanation(const ComplexityDescriptor& d, const FeatureSchema& schema,
                               std::uint64_t seed);

// Resamples explanation and examples until the train split is balanced.
// Throws InvalidArgument (n_train < 10) or BalanceUnreachable.
SyntheticTask generate_task(const ComplexityDescriptor& d, std::size_t num_features,
                            std::size_t n_train, std::size_t n_test, std::uint64_t seed);

// Same, for a fixed schema and planted explanation; only examples are resampled.
SyntheticTask generate_task_for(const FeatureSchema& schema, const Explanation& planted,
                                std::size_t n_train, std::size_t n_test, std::uint64_t seed);

// Uniform draw over the schema (integers for numeric features).
std::vector<Example> sample_examples(const FeatureSchema& schema, std::size_t n, Rng& rng);

// Planted labeling: deterministic decision, then quantifier noise on the
// clause-true examples. Exactly round(n_true * min(c, 1 - c)) of them are
// flipped, chosen uniformly.
std::vector<std::string> label_examples(const Explanation& planted, const FeatureSchema& schema,
                                        const std::vector<Example>& examples, Rng& noise);

double min_class_fraction(const LabeledBatch& batch);

// Multi-class labels to {L, "not L"}. Throws LabelAbsent.
LabeledBatch binarize(const LabeledBatch& batch, std::string_view label_of_interest);

// "f1: v1 | f2: v2 | label: y" per example, then "explanation:".
std::string linearize(const LabeledBatch& batch);
LabeledBatch delinearize(std::string_view text, const FeatureSchema& schema, LabelKind kind,
                         std::string_view label_of_interest);

// Task bundle directory: schema.json, planted.txt, train.csv, test.csv, meta.json.
void write_task_bundle(const SyntheticTask& task, const std::filesystem::path& dir);
SyntheticTask read_task_bundle(const std::filesystem::path& dir);

void write_batch_csv(const LabeledBatch& batch, const std::filesystem::path& path);

}  // namespace nlx
