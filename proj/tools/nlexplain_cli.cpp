// nlexplain command line. Talks to the library only through the C interface.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlexplain/nlexplain.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;

int exit_code(nlx_status s) {
  switch (s) {
    case NLX_OK: return kExitOk;
    case NLX_ERR_PARSE:
    case NLX_ERR_CONFIG:
    case NLX_ERR_INVALID_ARGUMENT: return kExitUsage;
    case NLX_ERR_BUDGET: return kExitBudget;
    default: return kExitFailure;
  }
}

int report(nlx_status s) {
  if (s != NLX_OK) std::cerr << "nlexplain: " << nlx_status_name(s) << ": " << nlx_last_error() << "\n";
  return exit_code(s);
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Owns a string handed out by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { nlx_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct BatchDeleter {
  void operator()(nlx_batch* b) const { nlx_batch_free(b); }
};
using BatchPtr = std::unique_ptr<nlx_batch, BatchDeleter>;

struct ExplanationDeleter {
  void operator()(nlx_explanation* e) const { nlx_explanation_free(e); }
};
using ExplanationPtr = std::unique_ptr<nlx_explanation, ExplanationDeleter>;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw UsageError(path + ": expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

// Options shared by bench, sweep-features and scale-examples.
struct ExperimentFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> dataset;
  std::optional<std::size_t> rows;
  std::optional<std::string> label_column;
  std::optional<std::string> label;
  std::optional<std::string> classifier;
  std::optional<int> tree_depth;
  std::optional<std::string> oracle;
  std::optional<std::size_t> subsets;
  std::optional<std::size_t> subset_size;
  std::optional<std::size_t> budget;
  std::vector<std::string> methods;
  std::optional<std::size_t> top_k;
  std::optional<int> depth;
  std::optional<std::size_t> beam;
  std::optional<std::size_t> repetitions;
  std::string out;
  std::string markdown;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "JSON experiment config");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--dataset", dataset, "CSV path or builtin:adult");
    cmd->add_option("--rows", rows, "rows of the built-in dataset");
    cmd->add_option("--label-column", label_column);
    cmd->add_option("--label", label, "label of interest");
    cmd->add_option("--classifier", classifier, "logistic | tree | mlp");
    cmd->add_option("--tree-depth", tree_depth);
    cmd->add_option("--oracle", oracle, "shell command speaking the NDJSON oracle protocol");
    cmd->add_option("--subsets", subsets);
    cmd->add_option("--subset-size", subset_size);
    cmd->add_option("--budget", budget, "black-box calls per method run");
    cmd->add_option("--methods", methods, "lime anchors top1 beam perfeat")->delimiter(',');
    cmd->add_option("--top-k", top_k, "features kept by mutual information (0 = all)");
    cmd->add_option("--depth", depth, "max_conjunction_depth for beam search");
    cmd->add_option("--beam", beam, "beam width");
    cmd->add_option("-o,--out", out, "JSON report path (default stdout)");
    cmd->add_option("--markdown", markdown, "markdown table path");
  }

  json config() const {
    json j = config_path.empty() ? json::object() : read_json_file(config_path);
    if (seed) j["seed"] = *seed;
    if (dataset) j["dataset"] = *dataset;
    if (rows) j["dataset_rows"] = *rows;
    if (label_column) j["label_column"] = *label_column;
    if (label) j["label_of_interest"] = *label;
    if (classifier) j["classifier"] = *classifier;
    if (tree_depth) j["tree_depth"] = *tree_depth;
    if (oracle) j["oracle_command"] = *oracle;
    if (subsets) j["n_subsets"] = *subsets;
    if (subset_size) j["subset_size"] = *subset_size;
    if (budget) j["budget"] = *budget;
    if (!methods.empty()) j["methods"] = methods;
    if (top_k) j["top_k_features"] = *top_k;
    if (depth) j["max_conjunction_depth"] = *depth;
    if (beam) j["beam_width"] = *beam;
    if (repetitions) j["repetitions"] = *repetitions;
    return j;
  }

  // Writes both reports; the status is passed through so a budget failure still leaves its report.
  int emit(nlx_status s, const LibString& js, const LibString& md) const {
    if (js.p) write_text(out, js.str());
    if (md.p) {
      if (!markdown.empty()) write_text(markdown, md.str());
      else if (!out.empty() && out != "-") std::cout << md.str();
    }
    return report(s);
  }
};

struct BatchFlags {
  std::string input;
  std::string predictions_col;
  std::string label;
  std::string schema;
  std::string gold;

  void attach(CLI::App* cmd) {
    cmd->add_option("-i,--input", input, "CSV of examples with predicted labels")->required();
    cmd->add_option("--predictions-col", predictions_col, "label column (default: last)");
    cmd->add_option("--label", label, "label of interest (default: first row's)");
    cmd->add_option("--schema", schema, "schema.json enforcing feature types");
    cmd->add_option("--gold", gold, "held-out CSV with gold labels for simulatability");
  }

  std::string options(const char* kind, const std::string& label_override) const {
    json j;
    j["kind"] = kind;
    if (!predictions_col.empty()) j["label_column"] = predictions_col;
    if (!label_override.empty()) j["label_of_interest"] = label_override;
    if (!schema.empty()) j["schema"] = schema;
    return j.dump();
  }

  // Loads the predicted batch and, when given, a gold batch sharing its label of interest.
  nlx_status load(BatchPtr& predicted, BatchPtr& gold_batch) const {
    nlx_batch* p = nullptr;
    nlx_status s = nlx_batch_load_csv(input.c_str(), options("predicted", label).c_str(), &p);
    if (s != NLX_OK) return s;
    predicted.reset(p);
    if (gold.empty()) return NLX_OK;
    nlx_batch* g = nullptr;
    s = nlx_batch_load_csv(gold.c_str(), options("gold", nlx_batch_label(p)).c_str(), &g);
    if (s == NLX_OK) gold_batch.reset(g);
    return s;
  }
};

int run_parse(const std::string& text, bool as_json) {
  nlx_explanation* raw = nullptr;
  const nlx_status s = nlx_explanation_parse(text.c_str(), &raw);
  if (s != NLX_OK) return report(s);
  ExplanationPtr e(raw);
  LibString rendered, ast;
  nlx_explanation_render(e.get(), &rendered.p);
  nlx_explanation_to_json(e.get(), &ast.p);
  // Canonical text must survive a second trip unchanged.
  nlx_explanation* again = nullptr;
  if (nlx_explanation_parse(rendered.p, &again) != NLX_OK) return report(NLX_ERR_INTERNAL);
  ExplanationPtr second(again);
  LibString rerendered;
  nlx_explanation_render(second.get(), &rerendered.p);
  const bool stable = rerendered.str() == rendered.str();
  if (as_json) {
    json j;
    j["input"] = text;
    j["canonical"] = rendered.str();
    j["identical"] = rendered.str() == text;
    j["stable"] = stable;
    j["ast"] = json::parse(ast.str());
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << rendered.str() << "\n";
  }
  if (!stable) {
    std::cerr << "nlexplain: canonical form is not stable under a second round trip\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural-language explanations for tabular classifiers"};
  app.set_version_flag("--version", std::string(nlx_version()));
  app.require_subcommand(1);

  // forge
  auto* forge = app.add_subcommand("forge", "generate synthetic tasks with planted explanations");
  std::string forge_out, forge_config;
  std::vector<std::string> forge_descriptors;
  std::optional<std::size_t> forge_seeds, forge_features, forge_train, forge_test;
  std::optional<std::uint64_t> forge_seed;
  forge->add_option("-o,--out", forge_out, "output directory")->required();
  forge->add_option("-c,--config", forge_config, "JSON options");
  forge->add_option("--descriptors", forge_descriptors, "descriptor names or 'all'")->delimiter(',');
  forge->add_option("--seeds", forge_seeds, "tasks per descriptor");
  forge->add_option("--seed", forge_seed, "first seed");
  forge->add_option("--features", forge_features);
  forge->add_option("--n-train", forge_train);
  forge->add_option("--n-test", forge_test);

  // explain
  auto* explain = app.add_subcommand("explain", "search for an explanation of a labeled batch");
  BatchFlags explain_batch;
  explain_batch.attach(explain);
  std::string explain_config, explain_out, strategy;
  std::optional<std::size_t> beam, top;
  std::optional<int> depth;
  std::optional<std::uint64_t> explain_seed;
  bool no_quantifiers = false;
  explain->add_option("-c,--config", explain_config, "JSON search options");
  explain->add_option("--strategy", strategy, "perfeat | beam | top1");
  explain->add_option("--beam", beam, "beam width");
  explain->add_option("--depth", depth, "max_conjunction_depth (1 or 2)");
  explain->add_option("--top", top, "candidates to list");
  explain->add_flag("--no-quantifiers", no_quantifiers, "disable quantifier fitting");
  explain->add_option("--seed", explain_seed, "accepted for uniformity; search is deterministic");
  explain->add_option("-o,--out", explain_out, "result path (default stdout)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score an explanation against a labeled batch");
  BatchFlags eval_batch;
  eval_batch.attach(evaluate);
  std::string eval_text, eval_out;
  std::optional<std::uint64_t> eval_seed;
  evaluate->add_option("-e,--explanation", eval_text, "explanation text")->required();
  evaluate->add_option("--seed", eval_seed, "accepted for uniformity");
  evaluate->add_option("-o,--out", eval_out, "report path (default stdout)");

  // experiments
  auto* bench = app.add_subcommand("bench", "fixed-budget comparison against LIME and Anchors");
  ExperimentFlags bench_flags;
  bench_flags.attach(bench);

  auto* sweep = app.add_subcommand("sweep-features", "budget protocol across feature counts");
  ExperimentFlags sweep_flags;
  sweep_flags.attach(sweep);
  std::string k_range = "5..11";
  sweep->add_option("--k", k_range, "feature counts, e.g. 5..11 or 5,7,9");

  auto* scale = app.add_subcommand("scale-examples", "subset ensembling across example counts");
  ExperimentFlags scale_flags;
  scale_flags.attach(scale);
  std::string n_range = "10,20,40,80";
  scale->add_option("--n", n_range, "example counts, multiples of the subset size");
  scale->add_option("--repetitions", scale_flags.repetitions);

  // parse
  auto* parse = app.add_subcommand("parse", "round-trip an explanation through the canonical form");
  std::string parse_text;
  bool parse_json = false;
  std::optional<std::uint64_t> parse_seed;
  parse->add_option("text", parse_text, "explanation text")->required();
  parse->add_flag("--json", parse_json, "print input, canonical form and AST");
  parse->add_option("--seed", parse_seed, "accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*forge) {
      json opts = forge_config.empty() ? json::object() : read_json_file(forge_config);
      if (!forge_descriptors.empty()) {
        if (forge_descriptors.size() == 1 && forge_descriptors[0] == "all") opts["descriptors"] = "all";
        else opts["descriptors"] = forge_descriptors;
      }
      if (forge_seeds) opts["seeds"] = *forge_seeds;
      if (forge_seed) opts["seed"] = *forge_seed;
      if (forge_features) opts["num_features"] = *forge_features;
      if (forge_train) opts["n_train"] = *forge_train;
      if (forge_test) opts["n_test"] = *forge_test;
      LibString summary;
      const nlx_status s = nlx_forge(opts.dump().c_str(), forge_out.c_str(), &summary.p);
      if (summary.p) std::cout << summary.str() << "\n";
      return report(s);
    }
    if (*explain) {
      BatchPtr predicted, gold;
      nlx_status s = explain_batch.load(predicted, gold);
      if (s != NLX_OK) return report(s);
      json opts = explain_config.empty() ? json::object() : read_json_file(explain_config);
      if (!strategy.empty()) opts["strategy"] = strategy;
      if (beam) opts["beam_width"] = *beam;
      if (depth) opts["max_conjunction_depth"] = *depth;
      if (top) opts["top_candidates"] = *top;
      if (no_quantifiers) opts["quantifier_fitting"] = false;
      LibString result;
      s = nlx_explain(predicted.get(), gold.get(), opts.dump().c_str(), &result.p);
      if (s != NLX_OK) return report(s);
      write_text(explain_out, result.str() + "\n");
      return kExitOk;
    }
    if (*evaluate) {
      BatchPtr predicted, gold;
      nlx_status s = eval_batch.load(predicted, gold);
      if (s != NLX_OK) return report(s);
      nlx_explanation* raw = nullptr;
      s = nlx_explanation_parse(eval_text.c_str(), &raw);
      if (s != NLX_OK) return report(s);
      ExplanationPtr e(raw);
      LibString result;
      s = nlx_evaluate(e.get(), predicted.get(), gold.get(), &result.p);
      if (s != NLX_OK) return report(s);
      write_text(eval_out, result.str() + "\n");
      return kExitOk;
    }
    if (*bench) {
      LibString js, md;
      const nlx_status s = nlx_bench(bench_flags.config().dump().c_str(), &js.p, &md.p);
      return bench_flags.emit(s, js, md);
    }
    if (*sweep) {
      LibString js, md;
      const nlx_status s = nlx_sweep_features(sweep_flags.config().dump().c_str(), k_range.c_str(), &js.p, &md.p);
      return sweep_flags.emit(s, js, md);
    }
    if (*scale) {
      LibString js, md;
      const nlx_status s = nlx_scale_examples(scale_flags.config().dump().c_str(), n_range.c_str(), &js.p, &md.p);
      return scale_flags.emit(s, js, md);
    }
    if (*parse) return run_parse(parse_text, parse_json);
  } catch (const UsageError& e) {
    std::cerr << "nlexplain: config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "nlexplain: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
