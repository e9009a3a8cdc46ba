#include "nlexplain/nlexplain.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "nlx/dataset.hpp"
#include "nlx/error.hpp"
#include "nlx/executor.hpp"
#include "nlx/experiments.hpp"
#include "nlx/explainer.hpp"
#include "nlx/explang.hpp"
#include "nlx/json_io.hpp"
#include "nlx/taskforge.hpp"
#include "nlx/textmetrics.hpp"

#ifndef NLX_VERSION_STRING
#define NLX_VERSION_STRING "0.0.0"
#endif

struct nlx_explanation {
  nlx::Explanation value;
};

struct nlx_batch {
  nlx::LabeledBatch value;
};

namespace {

using nlx::ErrorCode;
using nlx::json;

thread_local std::string g_last_error;

nlx_status status_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::UnknownQuantifier:
      return NLX_ERR_PARSE;
    case ErrorCode::Config:
    case ErrorCode::UnsupportedKind:
      return NLX_ERR_CONFIG;
    case ErrorCode::BudgetExhausted:
      return NLX_ERR_BUDGET;
    case ErrorCode::Io:
    case ErrorCode::Oracle:
      return NLX_ERR_IO;
    case ErrorCode::InvalidArgument:
    case ErrorCode::MissingQuantifier:
    case ErrorCode::EmptyInput:
      return NLX_ERR_INVALID_ARGUMENT;
    default:
      return NLX_ERR_DATA;
  }
}

nlx_status fail(nlx_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

// Runs `body`, translating exceptions into a status and the thread's last error.
// Malformed JSON arguments count as `json_status`.
template <typename F>
nlx_status guarded(F&& body, nlx_status json_status = NLX_ERR_CONFIG) noexcept {
  g_last_error.clear();
  try {
    return body();
  } catch (const nlx::Error& e) {
    return fail(status_of(e.code()), std::string(nlx::error_code_name(e.code())) + ": " + e.what());
  } catch (const json::exception& e) {
    return fail(json_status, std::string("json: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(NLX_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NLX_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(NLX_ERR_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_out(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

#define NLX_REQUIRE(cond, what) \
  if (!(cond)) return fail(NLX_ERR_INVALID_ARGUMENT, what)

json parse_object(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw nlx::Error(ErrorCode::Config, "expected a JSON object");
  return j;
}

nlx::ExperimentConfig experiment_config(const char* text) {
  return nlx::config_from_json(parse_object(text));
}

nlx::SearchConfig search_config(const json& j, std::size_t& top_candidates) {
  nlx::SearchConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "strategy") c.strategy = nlx::strategy_from_name(value.get<std::string>());
    else if (key == "beam_width") c.beam_width = value.get<std::size_t>();
    else if (key == "max_conjunction_depth") c.max_conjunction_depth = value.get<int>();
    else if (key == "quantifier_fitting") c.quantifier_fitting = value.get<bool>();
    else if (key == "top_candidates") top_candidates = value.get<std::size_t>();
    else throw nlx::Error(ErrorCode::Config, "unknown search option '" + key + "'");
  }
  c.validate();
  return c;
}

json candidate_json(const nlx::Candidate& c) {
  return json{{"text", c.rendered},
              {"matches", c.matches},
              {"applied", c.applied},
              {"faithfulness", nlx::round4(c.faithfulness())},
              {"coverage", nlx::round4(c.coverage())}};
}

}  // namespace

extern "C" {

const char* nlx_version(void) { return NLX_VERSION_STRING; }

const char* nlx_status_name(nlx_status status) {
  switch (status) {
    case NLX_OK: return "ok";
    case NLX_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case NLX_ERR_PARSE: return "parse";
    case NLX_ERR_CONFIG: return "config";
    case NLX_ERR_BUDGET: return "budget";
    case NLX_ERR_IO: return "io";
    case NLX_ERR_DATA: return "data";
    case NLX_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* nlx_last_error(void) { return g_last_error.c_str(); }

void nlx_string_free(char* s) { std::free(s); }

nlx_status nlx_explanation_parse(const char* text, nlx_explanation** out) {
  return guarded([&] {
    NLX_REQUIRE(text && out, "text and out are required");
    *out = new nlx_explanation{nlx::parse(text)};
    return NLX_OK;
  });
}

nlx_status nlx_explanation_from_json(const char* json_text, nlx_explanation** out) {
  return guarded(
      [&] {
        NLX_REQUIRE(json_text && out, "json_text and out are required");
        *out = new nlx_explanation{nlx::explanation_from_json(json::parse(json_text))};
        return NLX_OK;
      },
      NLX_ERR_PARSE);
}

nlx_status nlx_explanation_render(const nlx_explanation* e, char** out) {
  return guarded([&] {
    NLX_REQUIRE(e && out, "explanation and out are required");
    *out = dup_string(nlx::render(e->value));
    return NLX_OK;
  });
}

nlx_status nlx_explanation_render_confidence(const nlx_explanation* e, char** out) {
  return guarded([&] {
    NLX_REQUIRE(e && out, "explanation and out are required");
    *out = dup_string(nlx::render_with_confidence(e->value));
    return NLX_OK;
  });
}

nlx_status nlx_explanation_to_json(const nlx_explanation* e, char** out) {
  return guarded([&] {
    NLX_REQUIRE(e && out, "explanation and out are required");
    *out = dup_string(nlx::explanation_to_json(e->value).dump());
    return NLX_OK;
  });
}

void nlx_explanation_free(nlx_explanation* e) { delete e; }

nlx_status nlx_quantifier_confidence(const char* word, double* out) {
  return guarded([&] {
    NLX_REQUIRE(word && out, "word and out are required");
    *out = nlx::quantifier_confidence(word);
    return NLX_OK;
  });
}

nlx_status nlx_batch_load_csv(const char* path, const char* options_json, nlx_batch** out) {
  return guarded([&] {
    NLX_REQUIRE(path && out, "path and out are required");
    nlx::CsvLoadOptions opts;
    nlx::LabelKind kind = nlx::LabelKind::Predicted;
    const json options = parse_object(options_json);
    for (const auto& [key, value] : options.items()) {
      if (key == "label_column") {
        opts.label_column = value.get<std::string>();
      } else if (key == "label_of_interest") {
        opts.label_of_interest = value.get<std::string>();
      } else if (key == "schema") {
        std::ifstream in(value.get<std::string>());
        if (!in) throw nlx::Error(ErrorCode::Io, "cannot open schema '" + value.get<std::string>() + "'");
        opts.schema = nlx::schema_from_json(json::parse(in));
      } else if (key == "kind") {
        const auto k = value.get<std::string>();
        if (k == "predicted") kind = nlx::LabelKind::Predicted;
        else if (k == "gold") kind = nlx::LabelKind::Gold;
        else throw nlx::Error(ErrorCode::Config, "kind must be 'predicted' or 'gold', got '" + k + "'");
      } else {
        throw nlx::Error(ErrorCode::Config, "unknown batch option '" + key + "'");
      }
    }
    const nlx::Dataset d = nlx::load_csv(path, opts);
    nlx::LabeledBatch b = nlx::binarize(d.batch, d.batch.label_of_interest);
    b.label_kind = kind;
    *out = new nlx_batch{std::move(b)};
    return NLX_OK;
  });
}

size_t nlx_batch_size(const nlx_batch* b) { return b ? b->value.size() : 0; }

const char* nlx_batch_label(const nlx_batch* b) { return b ? b->value.label_of_interest.c_str() : ""; }

void nlx_batch_free(nlx_batch* b) { delete b; }

nlx_status nlx_evaluate(const nlx_explanation* e, const nlx_batch* predicted, const nlx_batch* gold,
                        char** report_json) {
  return guarded([&] {
    NLX_REQUIRE(e && predicted && report_json, "explanation, predicted batch and out are required");
    const nlx::EvalReport r = nlx::evaluate(e->value, predicted->value, gold ? &gold->value : nullptr);
    *report_json = dup_string(nlx::eval_report_to_json(r).dump());
    return NLX_OK;
  });
}

nlx_status nlx_explain(const nlx_batch* predicted, const nlx_batch* gold, const char* config_json,
                       char** result_json) {
  return guarded([&] {
    NLX_REQUIRE(predicted && result_json, "predicted batch and out are required");
    std::size_t top = 10;
    const nlx::SearchConfig config = search_config(parse_object(config_json), top);
    nlx::ExplainResult r = nlx::explain(predicted->value, config);
    if (gold) r.report.simulatability = nlx::simulatability(r.best, gold->value);
    json j;
    j["explanation"] = json{{"text", nlx::render(r.best)}, {"ast", nlx::explanation_to_json(r.best)}};
    j["report"] = nlx::eval_report_to_json(r.report);
    j["strategy"] = std::string(nlx::strategy_name(config.strategy));
    json cands = json::array();
    for (std::size_t i = 0; i < r.candidates.candidates.size() && i < top; ++i) {
      cands.push_back(candidate_json(r.candidates.candidates[i]));
    }
    j["candidates"] = std::move(cands);
    *result_json = dup_string(j.dump(2));
    return NLX_OK;
  });
}

nlx_status nlx_forge(const char* options_json, const char* out_dir, char** summary_json) {
  return guarded([&] {
    NLX_REQUIRE(out_dir, "out_dir is required");
    std::vector<nlx::ComplexityDescriptor> descriptors;
    std::size_t seeds = 1, num_features = 5, n_train = 10, n_test = 100;
    std::uint64_t base = 0;
    bool have_descriptors = false;
    const json options = parse_object(options_json);
    for (const auto& [key, value] : options.items()) {
      if (key == "descriptors") {
        have_descriptors = true;
        if (value.is_string() && value.get<std::string>() == "all") {
          const auto all = nlx::all_descriptors();
          descriptors.assign(all.begin(), all.end());
        } else {
          for (const auto& name : value.get<std::vector<std::string>>()) {
            descriptors.push_back(nlx::descriptor_from_name(name));
          }
        }
      } else if (key == "seeds") {
        seeds = value.get<std::size_t>();
      } else if (key == "seed") {
        base = value.get<std::uint64_t>();
      } else if (key == "num_features") {
        num_features = value.get<std::size_t>();
      } else if (key == "n_train") {
        n_train = value.get<std::size_t>();
      } else if (key == "n_test") {
        n_test = value.get<std::size_t>();
      } else {
        throw nlx::Error(ErrorCode::Config, "unknown forge option '" + key + "'");
      }
    }
    if (!have_descriptors) {
      const auto all = nlx::all_descriptors();
      descriptors.assign(all.begin(), all.end());
    }
    if (descriptors.empty() || seeds == 0) throw nlx::Error(ErrorCode::Config, "nothing to generate");

    json tasks = json::array();
    for (const auto& d : descriptors) {
      for (std::size_t s = 0; s < seeds; ++s) {
        const std::uint64_t seed = base + s;
        const nlx::SyntheticTask task = nlx::generate_task(d, num_features, n_train, n_test, seed);
        const std::filesystem::path dir =
            std::filesystem::path(out_dir) / nlx::descriptor_name(d) / ("seed-" + std::to_string(seed));
        nlx::write_task_bundle(task, dir);
        tasks.push_back(json{{"dir", dir.string()},
                             {"descriptor", nlx::descriptor_name(d)},
                             {"seed", seed},
                             {"planted", nlx::render(task.planted)},
                             {"min_class_fraction", nlx::round4(nlx::min_class_fraction(task.train))}});
      }
    }
    set_out(summary_json, json{{"count", tasks.size()}, {"tasks", tasks}}.dump(2));
    return NLX_OK;
  });
}

nlx_status nlx_bench(const char* config_json, char** report_json, char** report_markdown) {
  return guarded([&] {
    const nlx::BudgetReport r = nlx::run_budget_experiment(experiment_config(config_json));
    set_out(report_json, nlx::budget_report_to_json(r).dump(2) + "\n");
    set_out(report_markdown, nlx::budget_report_markdown(r));
    if (r.any_budget_failure()) return fail(NLX_ERR_BUDGET, "at least one method exhausted its budget");
    return NLX_OK;
  });
}

nlx_status nlx_sweep_features(const char* config_json, const char* k_range, char** report_json,
                              char** report_markdown) {
  return guarded([&] {
    NLX_REQUIRE(k_range, "k_range is required");
    const nlx::SweepReport r = nlx::feature_sweep(experiment_config(config_json), nlx::parse_range(k_range));
    set_out(report_json, nlx::sweep_report_to_json(r).dump(2) + "\n");
    set_out(report_markdown, nlx::sweep_report_markdown(r));
    for (const auto& p : r.points) {
      if (p.any_budget_failure()) return fail(NLX_ERR_BUDGET, "at least one method exhausted its budget");
    }
    return NLX_OK;
  });
}

nlx_status nlx_scale_examples(const char* config_json, const char* n_range, char** report_json,
                              char** report_markdown) {
  return guarded([&] {
    NLX_REQUIRE(n_range, "n_range is required");
    const nlx::ScaleReport r =
        nlx::scale_examples_experiment(experiment_config(config_json), nlx::parse_range(n_range));
    set_out(report_json, nlx::scale_report_to_json(r).dump(2) + "\n");
    set_out(report_markdown, nlx::scale_report_markdown(r));
    return NLX_OK;
  });
}

nlx_status nlx_bleu(const char* candidate, const char* const* references, size_t n_references, double* out) {
  return guarded([&] {
    NLX_REQUIRE(candidate && out && (references || n_references == 0), "candidate, references and out are required");
    std::vector<nlx::TokenSeq> refs;
    for (size_t i = 0; i < n_references; ++i) {
      NLX_REQUIRE(references[i], "null reference");
      refs.push_back(nlx::tokenize(references[i]));
    }
    *out = nlx::bleu(nlx::tokenize(candidate), refs);
    return NLX_OK;
  });
}

nlx_status nlx_rouge_n(const char* candidate, const char* reference, int n, double* precision, double* recall,
                       double* f1) {
  return guarded([&] {
    NLX_REQUIRE(candidate && reference, "candidate and reference are required");
    const nlx::RougeScore s = nlx::rouge_n(nlx::tokenize(candidate), nlx::tokenize(reference), n);
    if (precision) *precision = s.precision;
    if (recall) *recall = s.recall;
    if (f1) *f1 = s.f1;
    return NLX_OK;
  });
}

nlx_status nlx_rouge_l(const char* candidate, const char* reference, double* f1) {
  return guarded([&] {
    NLX_REQUIRE(candidate && reference && f1, "candidate, reference and f1 are required");
    *f1 = nlx::rouge_l(nlx::tokenize(candidate), nlx::tokenize(reference));
    return NLX_OK;
  });
}

}  // extern "C"
