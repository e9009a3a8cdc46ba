#pragma once

// Built-in classifiers for experiments: softmax logistic regression, a
// one-hidden-layer tanh network and a Gini decision tree.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "nlx/classifier.hpp"
#include "nlx/dataset.hpp"

namespace nlx {

enum class ClassifierKind { Logistic, Tree, Mlp };

// "logistic", "tree", "mlp". Throws UnsupportedKind.
ClassifierKind classifier_kind_from_name(std::string_view name);
std::string_view classifier_kind_name(ClassifierKind kind) noexcept;

struct TrainOptions {
  std::uint64_t seed = 0;
  int tree_depth = 3;
  std::size_t epochs = 400;
  std::size_t hidden_units = 16;
};

// Fits on the dataset's train split (all rows if the split is empty).
// Deterministic given options.seed.
std::shared_ptr<const Classifier> train_classifier(ClassifierKind kind, const Dataset& data,
                                                   const TrainOptions& options = {});

// Fraction of batch labels the classifier reproduces (raw label equality).
double accuracy(const Classifier& c, const LabeledBatch& batch);

}  // namespace nlx
