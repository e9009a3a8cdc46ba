#include "nlx/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include "nlx/baselines.hpp"
#include "nlx/error.hpp"
#include "nlx/models.hpp"
#include "nlx/oracle_process.hpp"
#include "nlx/rng.hpp"

namespace nlx {

namespace {

const std::vector<std::string> kKnownMethods = {"lime", "anchors", "top1", "beam", "perfeat"};
constexpr int kMaxRedraws = 50;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, "config: " + what); }

std::string display_name(const std::string& method) {
  if (method == "lime") return "LIME";
  if (method == "anchors") return "Anchors";
  if (method == "top1") return "TOP1";
  if (method == "beam") return "BEAM";
  if (method == "perfeat") return "PER_FEATURE";
  return method;
}

std::string fixed4(double x) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4) << x;
  return ss.str();
}

json stat_json(const std::vector<double>& xs) {
  const Stat s = summarize(xs);
  return json{{"mean", round4(s.mean)}, {"std", round4(s.std)}};
}

// Everything an experiment needs before the per-subset loop.
struct Prepared {
  Dataset data;
  std::shared_ptr<const Classifier> classifier;
  std::string label;
  LabeledBatch test_gold;  // binarized
  double test_accuracy = 0.0;
};

std::string binarized(const std::string& y, const std::string& label) {
  return y == label ? label : negate_label(label);
}

Prepared prepare(const ExperimentConfig& config) {
  Prepared p;
  if (config.dataset == kBuiltinAdult) {
    p.data = synthetic_adult(config.dataset_rows, config.seed);
    if (config.label_of_interest) p.data.batch.label_of_interest = *config.label_of_interest;
  } else {
    CsvLoadOptions opts;
    opts.label_column = config.label_column;
    opts.label_of_interest = config.label_of_interest;
    opts.seed = config.seed;
    p.data = load_csv(config.dataset, opts);
  }
  if (config.top_k_features > p.data.schema.size()) {
    config_error("top_k_features = " + std::to_string(config.top_k_features) + " exceeds the dataset's " +
                 std::to_string(p.data.schema.size()) + " features");
  }
  if (config.top_k_features > 0 && config.top_k_features < p.data.schema.size()) {
    p.data = project_dataset(p.data, mutual_info_topk(p.data, config.top_k_features));
  }
  p.label = p.data.batch.label_of_interest;

  if (config.oracle_command) {
    p.classifier = std::make_shared<SubprocessClassifier>(shell_argv(*config.oracle_command), p.data.schema);
  } else {
    TrainOptions topt;
    topt.seed = config.seed;
    topt.tree_depth = config.tree_depth;
    p.classifier = train_classifier(classifier_kind_from_name(config.classifier), p.data, topt);
  }

  p.test_gold = p.data.rows(p.data.test);
  p.test_gold.label_kind = LabelKind::Gold;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p.test_gold.size(); ++i) {
    const std::string raw = p.test_gold.labels[i];
    hits += p.classifier->predict(p.test_gold.examples[i]) == raw;
    p.test_gold.labels[i] = binarized(raw, p.label);
  }
  p.test_accuracy = p.test_gold.size() ? static_cast<double>(hits) / static_cast<double>(p.test_gold.size()) : 0.0;
  return p;
}

// Classifier predictions on given rows, binarized; these are the explainer's inputs.
LabeledBatch predicted_batch(const Prepared& p, const std::vector<std::size_t>& rows) {
  LabeledBatch b = p.data.rows(rows);
  b.label_kind = LabelKind::Predicted;
  for (std::size_t i = 0; i < b.size(); ++i) b.labels[i] = binarized(p.classifier->predict(b.examples[i]), p.label);
  return b;
}

bool has_both_classes(const LabeledBatch& b) {
  bool a = false, c = false;
  for (const auto& y : b.labels) (y == b.label_of_interest ? a : c) = true;
  return a && c;
}

std::optional<double> maybe_simulatability(const Explanation& e, const LabeledBatch& test) {
  if (test.examples.empty()) return std::nullopt;
  return simulatability(e, test);
}

struct RunOutcome {
  double faithfulness = 0.0;
  std::optional<double> simulatability;
};

RunOutcome run_method(const std::string& method, const ExperimentConfig& config, const Prepared& p,
                      const LabeledBatch& sub, std::size_t subset_index, ClassifierHandle& handle) {
  RunOutcome out;
  if (method == "lime") {
    LimeOptions opts;
    opts.perturbations_per_example = config.lime_perturbations;
    opts.seed = splitmix64(config.seed ^ (0x4c494d45ULL + subset_index));
    const AttributionExplanation a = lime_budgeted(sub.examples, handle, p.label, opts);
    out.faithfulness = attribution_agreement(a, sub);
    if (!p.test_gold.examples.empty()) out.simulatability = attribution_agreement(a, p.test_gold);
    return out;
  }
  if (method == "anchors") {
    const std::size_t runs = std::max<std::size_t>(1, config.budget / std::max<std::size_t>(1, config.anchors_pool));
    Rng rng = Rng::derive(config.seed, Stream::Pool, subset_index);
    const auto picks = rng.sample_indices(sub.size(), std::min(runs, sub.size()));
    std::vector<Example> candidates;
    for (std::size_t i : p.data.train) candidates.push_back(p.data.batch.examples[i]);
    std::optional<Candidate> best;
    for (std::size_t pick : picks) {
      const auto pool = nearest_pool(p.data.schema, sub.examples[pick], candidates, config.anchors_pool);
      const AnchorResult r = anchors_budgeted(sub.examples[pick], sub.labels[pick], pool, handle,
                                              config.anchors_precision, p.label);
      Candidate c = score_candidate(r.explanation, sub);
      if (!best || c.matches > best->matches) best = std::move(c);
    }
    out.faithfulness = best->faithfulness();
    out.simulatability = maybe_simulatability(best->explanation, p.test_gold);
    return out;
  }
  SearchConfig sc = config.search;
  sc.strategy = strategy_from_name(method);
  const ExplainResult r = explain(sub, sc);
  out.faithfulness = r.report.faithfulness;
  out.simulatability = maybe_simulatability(r.best, p.test_gold);
  return out;
}

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("'") + key + "': " + e.what());
  }
}

json method_json(const MethodSummary& m) {
  json j;
  j["method"] = m.method;
  j["runs"] = m.runs;
  j["failures"] = m.failures;
  j["budget_failures"] = m.budget_failures;
  j["faithfulness"] = stat_json(m.faithfulness);
  j["simulatability"] = stat_json(m.simulatability);
  j["budget_used"] = json{{"total", m.budget_used_total}, {"max", m.budget_used_max}};
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (subset_size < 2) config_error("subset_size must be at least 2");
  if (n_subsets < 1) config_error("n_subsets must be at least 1");
  if (methods.empty()) config_error("no methods selected");
  for (const auto& m : methods) {
    if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) == kKnownMethods.end()) {
      config_error("unknown method '" + m + "'");
    }
  }
  if (std::set<std::string>(methods.begin(), methods.end()).size() != methods.size()) {
    config_error("duplicate method");
  }
  if (tree_depth < 1) config_error("tree_depth must be at least 1");
  if (lime_perturbations < 1) config_error("lime_perturbations must be at least 1");
  if (anchors_pool < 1) config_error("anchors_pool must be at least 1");
  if (anchors_precision < 0.0 || anchors_precision > 1.0) config_error("anchors_precision must lie in [0, 1]");
  if (repetitions < 1) config_error("repetitions must be at least 1");
  if (!oracle_command) classifier_kind_from_name(classifier);
  search.validate();
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("expected a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "dataset") c.dataset = get_field<std::string>(j, "dataset");
    else if (key == "dataset_rows") c.dataset_rows = get_field<std::size_t>(j, "dataset_rows");
    else if (key == "label_column") c.label_column = value.is_null() ? std::nullopt : std::optional(get_field<std::string>(j, "label_column"));
    else if (key == "label_of_interest") c.label_of_interest = value.is_null() ? std::nullopt : std::optional(get_field<std::string>(j, "label_of_interest"));
    else if (key == "classifier") c.classifier = get_field<std::string>(j, "classifier");
    else if (key == "tree_depth") c.tree_depth = get_field<int>(j, "tree_depth");
    else if (key == "oracle_command") c.oracle_command = value.is_null() ? std::nullopt : std::optional(get_field<std::string>(j, "oracle_command"));
    else if (key == "n_subsets") c.n_subsets = get_field<std::size_t>(j, "n_subsets");
    else if (key == "subset_size") c.subset_size = get_field<std::size_t>(j, "subset_size");
    else if (key == "budget") c.budget = get_field<std::size_t>(j, "budget");
    else if (key == "methods") c.methods = get_field<std::vector<std::string>>(j, "methods");
    else if (key == "top_k_features") c.top_k_features = get_field<std::size_t>(j, "top_k_features");
    else if (key == "seed") c.seed = get_field<std::uint64_t>(j, "seed");
    else if (key == "strategy") c.search.strategy = strategy_from_name(get_field<std::string>(j, "strategy"));
    else if (key == "beam_width") c.search.beam_width = get_field<std::size_t>(j, "beam_width");
    else if (key == "max_conjunction_depth") c.search.max_conjunction_depth = get_field<int>(j, "max_conjunction_depth");
    else if (key == "quantifier_fitting") c.search.quantifier_fitting = get_field<bool>(j, "quantifier_fitting");
    else if (key == "lime_perturbations") c.lime_perturbations = get_field<std::size_t>(j, "lime_perturbations");
    else if (key == "anchors_pool") c.anchors_pool = get_field<std::size_t>(j, "anchors_pool");
    else if (key == "anchors_precision") c.anchors_precision = get_field<double>(j, "anchors_precision");
    else if (key == "repetitions") c.repetitions = get_field<std::size_t>(j, "repetitions");
    else config_error("unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = c.dataset;
  j["dataset_rows"] = c.dataset_rows;
  j["label_column"] = c.label_column ? json(*c.label_column) : json(nullptr);
  j["label_of_interest"] = c.label_of_interest ? json(*c.label_of_interest) : json(nullptr);
  j["classifier"] = c.classifier;
  j["tree_depth"] = c.tree_depth;
  j["oracle_command"] = c.oracle_command ? json(*c.oracle_command) : json(nullptr);
  j["n_subsets"] = c.n_subsets;
  j["subset_size"] = c.subset_size;
  j["budget"] = c.budget;
  j["methods"] = c.methods;
  j["top_k_features"] = c.top_k_features;
  j["seed"] = c.seed;
  j["strategy"] = std::string(strategy_name(c.search.strategy));
  j["beam_width"] = c.search.beam_width;
  j["max_conjunction_depth"] = c.search.max_conjunction_depth;
  j["quantifier_fitting"] = c.search.quantifier_fitting;
  j["lime_perturbations"] = c.lime_perturbations;
  j["anchors_pool"] = c.anchors_pool;
  j["anchors_precision"] = c.anchors_precision;
  j["repetitions"] = c.repetitions;
  return j;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    config_error(path + ": " + e.what());
  }
}

Stat summarize(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

const MethodSummary& BudgetReport::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "report has no method '" + name + "'");
}

bool BudgetReport::any_budget_failure() const noexcept {
  return std::any_of(methods.begin(), methods.end(), [](const MethodSummary& m) { return m.budget_failures > 0; });
}

BudgetReport run_budget_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const Prepared p = prepare(config);
  if (p.data.validation.size() < config.subset_size) {
    throw Error(ErrorCode::InsufficientExamples, "validation split has " + std::to_string(p.data.validation.size()) +
                                                     " rows, subsets need " + std::to_string(config.subset_size));
  }

  BudgetReport report;
  report.config = config;
  report.features = p.data.schema.names();
  report.label_of_interest = p.label;
  report.dataset_rows = p.data.size();
  report.classifier_test_accuracy = p.test_accuracy;
  for (const auto& m : config.methods) { MethodSummary ms; ms.method = m; report.methods.push_back(std::move(ms)); }

  for (std::size_t s = 0; s < config.n_subsets; ++s) {
    std::optional<LabeledBatch> sub;
    for (int attempt = 0; attempt < kMaxRedraws && !sub; ++attempt) {
      Rng rng = Rng::derive(config.seed, Stream::Subset, s * kMaxRedraws + static_cast<std::size_t>(attempt));
      std::vector<std::size_t> rows;
      for (std::size_t i : rng.sample_indices(p.data.validation.size(), config.subset_size)) {
        rows.push_back(p.data.validation[i]);
      }
      LabeledBatch b = predicted_batch(p, rows);
      if (has_both_classes(b)) {
        sub = std::move(b);
      } else {
        ++report.degenerate_redraws;
      }
    }
    for (auto& m : report.methods) {
      ++m.runs;
      if (!sub) {
        ++m.failures;
        continue;
      }
      auto budget = std::make_shared<Budget>(config.budget);
      ClassifierHandle handle(p.classifier, budget);
      try {
        const RunOutcome r = run_method(m.method, config, p, *sub, s, handle);
        m.faithfulness.push_back(r.faithfulness);
        if (r.simulatability) m.simulatability.push_back(*r.simulatability);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::BudgetExhausted) {
          ++m.budget_failures;
        } else if (e.code() != ErrorCode::DegenerateBatch) {
          throw;
        }
        ++m.failures;
      }
      if (budget->used() > budget->limit() || handle.metered_calls() != budget->used()) {
        throw Error(ErrorCode::InvalidArgument, "budget accounting violated for " + m.method);
      }
      m.budget_used_total += budget->used();
      m.budget_used_max = std::max(m.budget_used_max, budget->used());
      report.metered_calls_total += handle.metered_calls();
    }
  }
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

json budget_report_to_json(const BudgetReport& r) {
  json j;
  j["experiment"] = "budget";
  j["config"] = config_to_json(r.config);
  j["dataset"] = json{{"rows", r.dataset_rows}, {"features", r.features}, {"label_of_interest", r.label_of_interest}};
  j["classifier"] = json{{"kind", r.config.oracle_command ? std::string("oracle") : r.config.classifier},
                         {"test_accuracy", round4(r.classifier_test_accuracy)}};
  j["subsets"] = json{{"count", r.config.n_subsets}, {"size", r.config.subset_size},
                      {"degenerate_redraws", r.degenerate_redraws}};
  json methods = json::array();
  for (const auto& m : r.methods) methods.push_back(method_json(m));
  j["methods"] = std::move(methods);
  j["metered_calls_total"] = r.metered_calls_total;
  return j;
}

std::string budget_report_markdown(const BudgetReport& r) {
  std::ostringstream out;
  out << "| method | faithfulness | simulatability | budget used (max) | failures |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& m : r.methods) {
    const Stat f = summarize(m.faithfulness);
    const Stat s = summarize(m.simulatability);
    out << "| " << display_name(m.method) << " | " << fixed4(f.mean) << " ± " << fixed4(f.std) << " | "
        << fixed4(s.mean) << " ± " << fixed4(s.std) << " | " << m.budget_used_max << " | " << m.failures << " |\n";
  }
  out << "\nclassifier " << (r.config.oracle_command ? "oracle" : r.config.classifier) << ", test accuracy "
      << fixed4(r.classifier_test_accuracy) << "; " << r.config.n_subsets << " subsets of "
      << r.config.subset_size << "; budget " << r.config.budget << "; runtime " << std::fixed
      << std::setprecision(2) << r.runtime_seconds << " s\n";
  return out.str();
}

SweepReport feature_sweep(const ExperimentConfig& config, const std::vector<std::size_t>& k_range) {
  if (k_range.empty()) config_error("empty feature range");
  SweepReport report;
  report.config = config;
  for (std::size_t k : k_range) {
    if (k == 0) config_error("feature counts must be positive");
    ExperimentConfig c = config;
    c.top_k_features = k;
    report.k_values.push_back(k);
    report.points.push_back(run_budget_experiment(c));
  }
  return report;
}

json sweep_report_to_json(const SweepReport& r) {
  json j;
  j["experiment"] = "feature_sweep";
  j["config"] = config_to_json(r.config);
  j["k"] = r.k_values;
  json series = json::object();
  for (const auto& m : r.config.methods) {
    json faith = json::array(), sim = json::array();
    for (const auto& p : r.points) {
      faith.push_back(round4(summarize(p.method(m).faithfulness).mean));
      sim.push_back(round4(summarize(p.method(m).simulatability).mean));
    }
    series[m] = json{{"faithfulness", faith}, {"simulatability", sim}};
  }
  j["series"] = std::move(series);
  json points = json::array();
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    json methods = json::array();
    for (const auto& m : r.points[i].methods) methods.push_back(method_json(m));
    points.push_back(json{{"k", r.k_values[i]}, {"features", r.points[i].features}, {"methods", methods}});
  }
  j["points"] = std::move(points);
  return j;
}

std::string sweep_report_markdown(const SweepReport& r) {
  std::ostringstream out;
  out << "| k |";
  for (const auto& m : r.config.methods) out << ' ' << display_name(m) << " faith | " << display_name(m) << " sim |";
  out << "\n|---|";
  for (std::size_t i = 0; i < r.config.methods.size(); ++i) out << "---|---|";
  out << '\n';
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    out << "| " << r.k_values[i] << " |";
    for (const auto& m : r.config.methods) {
      out << ' ' << fixed4(summarize(r.points[i].method(m).faithfulness).mean) << " | "
          << fixed4(summarize(r.points[i].method(m).simulatability).mean) << " |";
    }
    out << '\n';
  }
  return out.str();
}

ScaleReport scale_examples_experiment(const ExperimentConfig& config, const std::vector<std::size_t>& n_range) {
  config.validate();
  if (n_range.empty()) config_error("empty example-count range");
  const Prepared p = prepare(config);
  ScaleReport report;
  report.config = config;
  for (std::size_t n : n_range) {
    if (n == 0 || n % config.subset_size != 0) {
      config_error("example count " + std::to_string(n) + " is not a positive multiple of subset_size " +
                   std::to_string(config.subset_size));
    }
    if (n > p.data.validation.size()) {
      throw Error(ErrorCode::InsufficientExamples, "validation split has " + std::to_string(p.data.validation.size()) +
                                                       " rows, fewer than " + std::to_string(n));
    }
    ScalePoint point;
    point.n = n;
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
      for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        const std::uint64_t key = (n * 1000003ULL + rep) * kMaxRedraws + static_cast<std::uint64_t>(attempt);
        Rng rng = Rng::derive(config.seed, Stream::Subset, key);
        std::vector<std::size_t> rows;
        for (std::size_t i : rng.sample_indices(p.data.validation.size(), n)) rows.push_back(p.data.validation[i]);
        const LabeledBatch batch = predicted_batch(p, rows);
        EnsembleResult ens;
        try {
          ens = ensemble_subsets(batch, config.search, n / config.subset_size, config.subset_size, splitmix64(key));
        } catch (const Error& e) {
          if (e.code() == ErrorCode::DegenerateBatch) continue;
          throw;
        }
        // The plain explainer sees only the first usable subset.
        const Candidate& plain = ens.winners.front();
        const Candidate ensemble = score_candidate(ens.best, batch);
        point.plain_faithfulness.push_back(plain.faithfulness());
        point.ensemble_faithfulness.push_back(ensemble.faithfulness());
        if (!p.test_gold.examples.empty()) {
          point.plain_simulatability.push_back(simulatability(plain.explanation, p.test_gold));
          point.ensemble_simulatability.push_back(simulatability(ens.best, p.test_gold));
        }
        break;
      }
    }
    report.points.push_back(std::move(point));
  }
  return report;
}

json scale_report_to_json(const ScaleReport& r) {
  json j;
  j["experiment"] = "scale_examples";
  j["config"] = config_to_json(r.config);
  json n = json::array();
  for (const auto& p : r.points) n.push_back(p.n);
  j["n"] = std::move(n);
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back(json{{"n", p.n},
                          {"repetitions", p.plain_faithfulness.size()},
                          {"plain", json{{"faithfulness", stat_json(p.plain_faithfulness)},
                                         {"simulatability", stat_json(p.plain_simulatability)}}},
                          {"ensemble", json{{"faithfulness", stat_json(p.ensemble_faithfulness)},
                                            {"simulatability", stat_json(p.ensemble_simulatability)}}}});
  }
  j["points"] = std::move(points);
  return j;
}

std::string scale_report_markdown(const ScaleReport& r) {
  std::ostringstream out;
  out << "| N | plain faith | ensemble faith | plain sim | ensemble sim |\n|---|---|---|---|---|\n";
  for (const auto& p : r.points) {
    out << "| " << p.n << " | " << fixed4(summarize(p.plain_faithfulness).mean) << " | "
        << fixed4(summarize(p.ensemble_faithfulness).mean) << " | " << fixed4(summarize(p.plain_simulatability).mean)
        << " | " << fixed4(summarize(p.ensemble_simulatability).mean) << " |\n";
  }
  return out.str();
}

std::vector<std::size_t> parse_range(const std::string& text) {
  auto to_size = [&](std::string_view s) {
    const auto x = parse_number(s);
    if (!x || *x < 0 || std::floor(*x) != *x) config_error("bad range element '" + std::string(s) + "'");
    return static_cast<std::size_t>(*x);
  };
  std::vector<std::size_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::size_t lo = to_size(std::string_view(text).substr(0, dots));
    const std::size_t hi = to_size(std::string_view(text).substr(dots + 2));
    if (hi < lo) config_error("empty range '" + text + "'");
    for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    out.push_back(to_size(std::string_view(text).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace nlx
