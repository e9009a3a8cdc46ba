/* nlexplain C interface.
 *
 * Handles are opaque and owned by the caller; release them with the matching
 * *_free function. Strings returned through char** are heap copies released
 * with nlx_string_free. Every function returning nlx_status leaves a message
 * for nlx_last_error() on failure (per thread).
 *
 * Structured arguments and results are JSON text.
 */
#ifndef NLEXPLAIN_H
#define NLEXPLAIN_H

#include <stddef.h>

#if defined(NLX_BUILDING_LIBRARY)
#define NLX_API __attribute__((visibility("default")))
#else
#define NLX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlx_status {
  NLX_OK = 0,
  NLX_ERR_INVALID_ARGUMENT = 1,
  NLX_ERR_PARSE = 2,
  NLX_ERR_CONFIG = 3,
  NLX_ERR_BUDGET = 4,
  NLX_ERR_IO = 5,
  NLX_ERR_DATA = 6,
  NLX_ERR_INTERNAL = 7
} nlx_status;

typedef struct nlx_explanation nlx_explanation;
typedef struct nlx_batch nlx_batch;

NLX_API const char* nlx_version(void);
NLX_API const char* nlx_status_name(nlx_status status);
/* Message of the last failure on this thread; "" if none. Valid until the next call. */
NLX_API const char* nlx_last_error(void);
NLX_API void nlx_string_free(char* s);

/* ---- explanations ---- */

NLX_API nlx_status nlx_explanation_parse(const char* text, nlx_explanation** out);
NLX_API nlx_status nlx_explanation_from_json(const char* json_text, nlx_explanation** out);
NLX_API nlx_status nlx_explanation_render(const nlx_explanation* e, char** out);
/* "{p}% of the time, it is {label} if {clause}"; NLX_ERR_INVALID_ARGUMENT without a quantifier. */
NLX_API nlx_status nlx_explanation_render_confidence(const nlx_explanation* e, char** out);
NLX_API nlx_status nlx_explanation_to_json(const nlx_explanation* e, char** out);
NLX_API void nlx_explanation_free(nlx_explanation* e);

NLX_API nlx_status nlx_quantifier_confidence(const char* word, double* out);

/* ---- batches ----
 * options_json may be NULL or an object with any of
 *   "label_column", "label_of_interest", "schema" (path to schema.json),
 *   "kind" ("predicted" | "gold").
 * Labels are binarized against the label of interest.
 */
NLX_API nlx_status nlx_batch_load_csv(const char* path, const char* options_json, nlx_batch** out);
NLX_API size_t nlx_batch_size(const nlx_batch* b);
/* Label of interest; owned by the batch. */
NLX_API const char* nlx_batch_label(const nlx_batch* b);
NLX_API void nlx_batch_free(nlx_batch* b);

/* ---- evaluation and search ---- */

/* gold may be NULL. Result: {"faithfulness", "simulatability", "coverage", "precision"}. */
NLX_API nlx_status nlx_evaluate(const nlx_explanation* e, const nlx_batch* predicted, const nlx_batch* gold,
                                char** report_json);

/* config_json may be NULL: {"strategy", "beam_width", "max_conjunction_depth",
 * "quantifier_fitting", "top_candidates"}. gold may be NULL.
 * Result: {"explanation": {"text", "ast"}, "report", "candidates": [...]}. */
NLX_API nlx_status nlx_explain(const nlx_batch* predicted, const nlx_batch* gold, const char* config_json,
                               char** result_json);

/* options_json: {"descriptors": [names] | "all", "seeds": n, "seed": base,
 * "num_features", "n_train", "n_test"}. Writes one bundle per task under out_dir. */
NLX_API nlx_status nlx_forge(const char* options_json, const char* out_dir, char** summary_json);

/* ---- experiments ----
 * config_json is an experiment config object (NULL for defaults).
 * Both outputs are optional. NLX_ERR_BUDGET is returned, with the outputs
 * filled, when any method ran out of budget.
 */
NLX_API nlx_status nlx_bench(const char* config_json, char** report_json, char** report_markdown);
/* k_range: "5..11" or "5,7,9". */
NLX_API nlx_status nlx_sweep_features(const char* config_json, const char* k_range, char** report_json,
                                      char** report_markdown);
NLX_API nlx_status nlx_scale_examples(const char* config_json, const char* n_range, char** report_json,
                                      char** report_markdown);

/* ---- text metrics ---- */

NLX_API nlx_status nlx_bleu(const char* candidate, const char* const* references, size_t n_references,
                            double* out);
NLX_API nlx_status nlx_rouge_n(const char* candidate, const char* reference, int n, double* precision,
                               double* recall, double* f1);
/* Longest-common-subsequence F1. */
NLX_API nlx_status nlx_rouge_l(const char* candidate, const char* reference, double* f1);

#ifdef __cplusplus
}
#endif

#endif /* NLEXPLAIN_H */
