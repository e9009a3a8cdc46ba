#pragma once

// Black-box label oracles.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nlx/executor.hpp"

namespace nlx {

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string predict(const Example& ex) const = 0;
  virtual const FeatureSchema& schema() const = 0;
};

// Adapts a callable; handy for rule-defined oracles in tests and experiments.
class FunctionClassifier final : public Classifier {
 public:
  using Fn = std::function<std::string(const Example&)>;

  FunctionClassifier(FeatureSchema schema, Fn fn) : schema_(std::move(schema)), fn_(std::move(fn)) {}

  std::string predict(const Example& ex) const override { return fn_(ex); }
  const FeatureSchema& schema() const override { return schema_; }

 private:
  FeatureSchema schema_;
  Fn fn_;
};

// Labels with an explanation's decision (as the planted rule does).
std::shared_ptr<const Classifier> explanation_classifier(FeatureSchema schema, Explanation e);

}  // namespace nlx
