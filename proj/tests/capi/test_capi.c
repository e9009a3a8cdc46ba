/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/stat.h>

#include "nlexplain/nlexplain.h"

static int failures = 0;

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: CHECK(%s) failed\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

#define CHECK_OK(expr)                                                                     \
  do {                                                                                     \
    nlx_status s_ = (expr);                                                                \
    if (s_ != NLX_OK) {                                                                    \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #expr, nlx_status_name(s_), \
              nlx_last_error());                                                           \
      ++failures;                                                                          \
    }                                                                                      \
  } while (0)

static void write_file(const char* path, const char* text) {
  FILE* f = fopen(path, "w");
  if (!f) {
    perror(path);
    exit(1);
  }
  fputs(text, f);
  fclose(f);
}

static void test_explanations(void) {
  const char* text = "If twqk equal to no, then it is seldom fem";
  nlx_explanation* e = NULL;
  char* out = NULL;
  CHECK_OK(nlx_explanation_parse(text, &e));
  CHECK_OK(nlx_explanation_render(e, &out));
  CHECK(out && strcmp(out, text) == 0);
  nlx_string_free(out);

  CHECK_OK(nlx_explanation_render_confidence(e, &out));
  CHECK(out && strcmp(out, "10% of the time, it is fem if twqk equal to no") == 0);
  nlx_string_free(out);

  CHECK_OK(nlx_explanation_to_json(e, &out));
  nlx_explanation* back = NULL;
  CHECK_OK(nlx_explanation_from_json(out, &back));
  nlx_string_free(out);
  CHECK_OK(nlx_explanation_render(back, &out));
  CHECK(out && strcmp(out, text) == 0);
  nlx_string_free(out);
  nlx_explanation_free(back);
  nlx_explanation_free(e);

  e = NULL;
  CHECK(nlx_explanation_parse("If twqk equal", &e) == NLX_ERR_PARSE);
  CHECK(e == NULL);
  CHECK(strlen(nlx_last_error()) > 0);
  CHECK(nlx_explanation_parse(NULL, &e) == NLX_ERR_INVALID_ARGUMENT);
  CHECK(nlx_explanation_from_json("{not json", &e) == NLX_ERR_PARSE);

  double c = 0.0;
  CHECK_OK(nlx_quantifier_confidence("usually", &c));
  CHECK(c == 0.90);
  CHECK(nlx_quantifier_confidence("mostly", &c) == NLX_ERR_PARSE);
  CHECK(strcmp(nlx_status_name(NLX_ERR_BUDGET), nlx_status_name(NLX_OK)) != 0);
  CHECK(strlen(nlx_version()) > 0);
}

static void test_batches(const char* dir) {
  char pred_path[512], gold_path[512];
  snprintf(pred_path, sizeof pred_path, "%s/pred.csv", dir);
  snprintf(gold_path, sizeof gold_path, "%s/gold.csv", dir);
  write_file(pred_path,
             "w,color,label\n10,red,no\n20,red,no\n30,blue,yes\n40,blue,yes\n50,red,yes\n60,blue,yes\n");
  write_file(gold_path, "w,color,label\n15,red,no\n35,blue,yes\n55,red,no\n");

  nlx_batch* pred = NULL;
  nlx_batch* gold = NULL;
  CHECK_OK(nlx_batch_load_csv(pred_path, "{\"label_of_interest\": \"yes\"}", &pred));
  CHECK_OK(nlx_batch_load_csv(gold_path, "{\"label_of_interest\": \"yes\", \"kind\": \"gold\"}", &gold));
  CHECK(nlx_batch_size(pred) == 6);
  CHECK(strcmp(nlx_batch_label(pred), "yes") == 0);

  nlx_explanation* e = NULL;
  char* report = NULL;
  CHECK_OK(nlx_explanation_parse("If w greater than 25, then yes", &e));
  CHECK_OK(nlx_evaluate(e, pred, gold, &report));
  CHECK(report && strstr(report, "\"faithfulness\":1.0") != NULL);
  CHECK(report && strstr(report, "\"simulatability\":0.666") != NULL);
  nlx_string_free(report);

  char* result = NULL;
  CHECK_OK(nlx_explain(pred, gold, "{\"strategy\": \"perfeat\", \"top_candidates\": 2}", &result));
  CHECK(result && strstr(result, "\"candidates\"") != NULL);
  CHECK(result && strstr(result, "If w ") != NULL);
  nlx_string_free(result);
  CHECK(nlx_explain(pred, NULL, "{\"strategy\": \"dfs\"}", &result) == NLX_ERR_CONFIG);

  nlx_batch* missing = NULL;
  CHECK(nlx_batch_load_csv("/nonexistent/x.csv", NULL, &missing) == NLX_ERR_IO);
  CHECK(nlx_batch_load_csv(pred_path, "{\"bogus\": 1}", &missing) == NLX_ERR_CONFIG);

  nlx_explanation_free(e);
  nlx_batch_free(pred);
  nlx_batch_free(gold);
}

static void test_forge(const char* dir) {
  char out_dir[512];
  snprintf(out_dir, sizeof out_dir, "%s/forge", dir);
  char* summary = NULL;
  CHECK_OK(nlx_forge("{\"descriptors\": [\"plain-none-none\"], \"seeds\": 2, \"seed\": 4}", out_dir, &summary));
  CHECK(summary != NULL);
  nlx_string_free(summary);
  char planted[600];
  snprintf(planted, sizeof planted, "%s/plain-none-none/seed-4/planted.txt", out_dir);
  struct stat st;
  CHECK(stat(planted, &st) == 0);
  CHECK(nlx_forge("{\"descriptors\": [\"nope\"]}", out_dir, &summary) != NLX_OK);
}

static void test_metrics(void) {
  const char* refs[] = {"if a equal to 2 then yes"};
  double b = 0.0;
  CHECK_OK(nlx_bleu("if a equal to 1 then yes", refs, 1, &b));
  CHECK(fabs(b - pow((6.0 / 7.0) * (5.0 / 7.0) * (3.0 / 6.0) * (2.0 / 5.0), 0.25)) < 1e-12);
  double p = 0, r = 0, f = 0;
  CHECK_OK(nlx_rouge_n("a b c d e", "a w x y", 1, &p, &r, &f));
  CHECK(fabs(p - 0.2) < 1e-12 && fabs(r - 0.25) < 1e-12);
  CHECK_OK(nlx_rouge_l("a b c", "a c", &f));
  CHECK(fabs(f - 0.8) < 1e-12);
  CHECK(nlx_rouge_l("", "a", &f) == NLX_ERR_INVALID_ARGUMENT);
}

static void test_bench(void) {
  const char* cfg =
      "{\"dataset_rows\": 1200, \"n_subsets\": 3, \"methods\": [\"top1\", \"perfeat\"], \"seed\": 5}";
  char* j1 = NULL;
  char* md = NULL;
  char* j2 = NULL;
  CHECK_OK(nlx_bench(cfg, &j1, &md));
  CHECK_OK(nlx_bench(cfg, &j2, NULL));
  CHECK(j1 && j2 && strcmp(j1, j2) == 0);
  CHECK(md && strstr(md, "PER_FEATURE") != NULL);
  nlx_string_free(j1);
  nlx_string_free(j2);
  nlx_string_free(md);

  char* starved = NULL;
  CHECK(nlx_bench("{\"dataset_rows\": 1200, \"n_subsets\": 2, \"methods\": [\"lime\"], \"budget\": 5}", &starved,
                  NULL) == NLX_ERR_BUDGET);
  CHECK(starved != NULL);
  nlx_string_free(starved);
  CHECK(nlx_bench("{\"methods\": [\"shap\"]}", NULL, NULL) == NLX_ERR_CONFIG);
}

int main(void) {
  const char* dir = NLX_TEST_SCRATCH;
  char cmd[600];
  snprintf(cmd, sizeof cmd, "mkdir -p '%s'", dir);
  if (system(cmd) != 0) return 1;

  test_explanations();
  test_batches(dir);
  test_forge(dir);
  test_metrics();
  test_bench();

  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  puts("all C API checks passed");
  return 0;
}
