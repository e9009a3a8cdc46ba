#pragma once

// Experiment protocols over a dataset and a black-box classifier, with JSON
// and markdown reports. Every emitted number is a function of the config.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlx/dataset.hpp"
#include "nlx/explainer.hpp"
#include "nlx/json_io.hpp"

namespace nlx {

struct ExperimentConfig {
  std::string dataset = kBuiltinAdult;  // or a CSV path
  std::size_t dataset_rows = 6000;      // built-in dataset only
  std::optional<std::string> label_column;
  std::optional<std::string> label_of_interest;
  std::string classifier = "tree";
  int tree_depth = 3;
  // When set, the classifier is an external process speaking the oracle protocol.
  std::optional<std::string> oracle_command;
  std::size_t n_subsets = 100;
  std::size_t subset_size = 10;
  std::size_t budget = 15;
  std::vector<std::string> methods = {"lime", "anchors", "top1", "beam", "perfeat"};
  std::size_t top_k_features = 5;  // 0 keeps every feature
  std::uint64_t seed = 7;
  SearchConfig search;
  std::size_t lime_perturbations = 1;
  std::size_t anchors_pool = 5;
  double anchors_precision = 0.95;
  std::size_t repetitions = 100;  // scale-examples

  // Throws Config.
  void validate() const;
};

// Unknown keys and wrong types are Config errors.
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config_file(const std::string& path);

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for fewer than two runs
};

Stat summarize(const std::vector<double>& xs);

struct MethodSummary {
  std::string method;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::size_t budget_failures = 0;
  std::vector<double> faithfulness;
  std::vector<double> simulatability;
  std::size_t budget_used_total = 0;
  std::size_t budget_used_max = 0;
};

struct BudgetReport {
  ExperimentConfig config;
  std::vector<std::string> features;
  std::string label_of_interest;
  std::size_t dataset_rows = 0;
  double classifier_test_accuracy = 0.0;
  std::size_t degenerate_redraws = 0;
  std::vector<MethodSummary> methods;
  std::size_t metered_calls_total = 0;
  double runtime_seconds = 0.0;  // not part of the JSON form

  const MethodSummary& method(const std::string& name) const;
  bool any_budget_failure() const noexcept;
};

BudgetReport run_budget_experiment(const ExperimentConfig& config);
json budget_report_to_json(const BudgetReport& r);
std::string budget_report_markdown(const BudgetReport& r);

struct SweepReport {
  ExperimentConfig config;
  std::vector<std::size_t> k_values;
  std::vector<BudgetReport> points;
};

SweepReport feature_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& k_range);
json sweep_report_to_json(const SweepReport& r);
std::string sweep_report_markdown(const SweepReport& r);

struct ScalePoint {
  std::size_t n = 0;
  std::vector<double> plain_faithfulness;     // on all N pairs
  std::vector<double> ensemble_faithfulness;  // on all N pairs
  std::vector<double> plain_simulatability;
  std::vector<double> ensemble_simulatability;
};

struct ScaleReport {
  ExperimentConfig config;
  std::vector<ScalePoint> points;
};

ScaleReport scale_examples_experiment(const ExperimentConfig& config, const std::vector<std::size_t>& n_range);
json scale_report_to_json(const ScaleReport& r);
std::string scale_report_markdown(const ScaleReport& r);

// "5..11" or "10,20,40". Throws Config.
std::vector<std::size_t> parse_range(const std::string& text);

}  // namespace nlx
