#include <doctest.h>

#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "nlx/baselines.hpp"
#include "nlx/error.hpp"
#include "nlx/oracle_process.hpp"
#include "nlx/rng.hpp"

using namespace nlx;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an nlx::Error");
  return ErrorCode::InvalidArgument;
}

FeatureSchema fruit_schema() {
  return FeatureSchema({{"color", CategoricalDomain{{"red", "green", "yellow"}}}, {"weight", NumericRange{0, 500}}});
}

std::shared_ptr<const Classifier> heavy_is_apple(const FeatureSchema& s) {
  return std::make_shared<FunctionClassifier>(
      s, [](const Example& ex) { return ex.values[1].as_number() > 250 ? "apple" : "not apple"; });
}

std::vector<Example> random_fruit(const FeatureSchema& s, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> colors = {"red", "green", "yellow"};
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(make_example(s, {{"color", Value::text(colors[rng.below(3)])},
                                   {"weight", Value::number(static_cast<double>(rng.below(501)))}}));
  }
  return out;
}

}  // namespace

TEST_CASE("budget accounting") {
  Budget b(3);
  b.charge();
  b.charge(2);
  CHECK(b.used() == 3);
  CHECK(b.remaining() == 0);
  CHECK(code_of([&] { b.charge(); }) == ErrorCode::BudgetExhausted);
  CHECK(b.used() == 3);

  Budget wide(1000);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int k = 0; k < 200; ++k) {
        try {
          wide.charge();
        } catch (const Error&) {
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(wide.used() == 1000);
}

TEST_CASE("handles meter only predict") {
  const FeatureSchema s = fruit_schema();
  ClassifierHandle h(heavy_is_apple(s), std::make_shared<Budget>(2));
  const auto xs = random_fruit(s, 5, 1);
  CHECK(h.predict_exempt(xs).size() == 5);
  CHECK(h.metered_calls() == 0);
  h.predict(xs[0]);
  h.predict(xs[1]);
  CHECK(h.metered_calls() == 2);
  CHECK(code_of([&] { h.predict(xs[2]); }) == ErrorCode::BudgetExhausted);
  CHECK(h.metered_calls() == 2);
}

TEST_CASE("LIME spends one call per perturbation") {
  const FeatureSchema s = fruit_schema();
  const auto anchors = random_fruit(s, 10, 2);
  ClassifierHandle h(heavy_is_apple(s), std::make_shared<Budget>(15));
  lime_budgeted(anchors, h, "apple", LimeOptions{1, 3});
  CHECK(h.metered_calls() == 10);
  CHECK(h.budget().used() == 10);

  ClassifierHandle tight(heavy_is_apple(s), std::make_shared<Budget>(15));
  CHECK(code_of([&] { lime_budgeted(anchors, tight, "apple", LimeOptions{2, 3}); }) == ErrorCode::BudgetExhausted);
  CHECK(tight.metered_calls() == 0);
  CHECK(code_of([&] { lime_budgeted(anchors, tight, "apple", LimeOptions{0, 3}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { lime_budgeted({}, tight, "apple", LimeOptions{}); }) == ErrorCode::InvalidArgument);
  CHECK(tight.budget().used() == 0);
}

TEST_CASE("LIME weights the planted feature and votes consistently") {
  const FeatureSchema s = fruit_schema();
  const auto anchors = random_fruit(s, 40, 4);
  ClassifierHandle h(heavy_is_apple(s), std::make_shared<Budget>(200));
  const AttributionExplanation a = lime_budgeted(anchors, h, "apple", LimeOptions{3, 11});
  CHECK(h.metered_calls() == 120);
  const auto imp = attribution_importance(a, s);
  CHECK(imp.at("weight") > imp.at("color"));
  CHECK(a.weights.at("weight") > 0.0);

  // Recompute the vote from the published weights.
  const auto xs = random_fruit(s, 100, 5);
  LabeledBatch b;
  b.schema = s;
  b.label_of_interest = "apple";
  std::size_t agree = 0;
  for (const auto& ex : xs) {
    double v = a.intercept;
    const auto [mean, scale] = a.standardization.at("weight");
    v += a.weights.at("weight") * (ex.values[1].as_number() - mean) / scale;
    v += a.weights.at("color=" + ex.values[0].as_text());
    CHECK(attribution_vote(a, s, ex) == doctest::Approx(v));
    const std::string truth = ex.values[1].as_number() > 250 ? "apple" : "not apple";
    b.examples.push_back(ex);
    b.labels.push_back(truth);
    agree += (v > 0.0 ? "apple" : "not apple") == truth;
  }
  CHECK(attribution_agreement(a, b) == doctest::Approx(static_cast<double>(agree) / 100.0));
  CHECK(attribution_agreement(a, b) > 0.8);

  // Scoring against the complement label of interest flips nothing.
  LabeledBatch flipped = b;
  flipped.label_of_interest = "not apple";
  CHECK(attribution_agreement(a, flipped) == doctest::Approx(attribution_agreement(a, b)));
}

TEST_CASE("Anchors grows a rule on the planted feature") {
  const FeatureSchema s = fruit_schema();
  const Example anchor = make_example(s, {{"color", Value::text("red")}, {"weight", Value::number(400)}});
  const auto candidates = random_fruit(s, 60, 6);
  const auto pool = nearest_pool(s, anchor, candidates, 5);
  ClassifierHandle h(heavy_is_apple(s), std::make_shared<Budget>(5));
  const AnchorResult r = anchors_budgeted(anchor, "apple", pool, h, 0.95, "apple");
  CHECK(h.metered_calls() == 5);
  bool mentions_weight = false;
  r.explanation.clause.for_each_condition([&](const Condition& c) { mentions_weight |= c.feature == "weight"; });
  CHECK((mentions_weight || r.precision == 1.0));
  CHECK(r.explanation.label == "apple");
  CHECK_FALSE(r.explanation.label_negated);
  CHECK(r.coverage > 0.0);

  ClassifierHandle easy(heavy_is_apple(s), std::make_shared<Budget>(5));
  const AnchorResult trivial = anchors_budgeted(anchor, "apple", pool, easy, 0.0, "apple");
  CHECK(trivial.coverage == 1.0);
  CHECK(trivial.target_reached);
  CHECK(faithfulness(trivial.explanation, [&] {
          LabeledBatch b;
          b.schema = s;
          b.label_of_interest = "apple";
          b.examples = {anchor};
          b.labels = {"apple"};
          return b;
        }()) == 1.0);

  ClassifierHandle poor(heavy_is_apple(s), std::make_shared<Budget>(4));
  CHECK(code_of([&] { anchors_budgeted(anchor, "apple", pool, poor, 0.95, "apple"); }) == ErrorCode::BudgetExhausted);
  CHECK(poor.metered_calls() == 0);
}

TEST_CASE("nearest pool orders by scaled distance") {
  const FeatureSchema s = fruit_schema();
  auto fruit = [&](const char* c, double w) {
    return make_example(s, {{"color", Value::text(c)}, {"weight", Value::number(w)}});
  };
  const Example anchor = fruit("red", 100);
  const std::vector<Example> cands = {fruit("green", 100), fruit("red", 350), fruit("red", 110), fruit("red", 90)};
  const auto pool = nearest_pool(s, anchor, cands, 3);
  REQUIRE(pool.size() == 3);
  CHECK(pool[0] == cands[2]);  // tie with cands[3]; candidate order kept
  CHECK(pool[1] == cands[3]);
  CHECK(pool[2] == cands[1]);
  CHECK(nearest_pool(s, anchor, cands, 10).size() == 4);
}

TEST_CASE("subprocess oracle") {
  const FeatureSchema s = fruit_schema();
  const std::string exe = NLX_FAKE_ORACLE;
  SubprocessClassifier c({exe, "--feature", "weight", "--threshold", "250", "--above", "apple", "--below", "not apple"}, s);
  for (const auto& ex : random_fruit(s, 20, 7)) {
    CHECK(c.predict(ex) == (ex.values[1].as_number() > 250 ? "apple" : "not apple"));
  }
  CHECK(c.requests() == 20);

  SubprocessClassifier shell(shell_argv("'" + exe + "' --feature color --threshold red --above r --below o"), s);
  CHECK(shell.predict(random_fruit(s, 1, 8)[0]).size() == 1);

  SubprocessClassifier liar({exe, "--feature", "weight", "--threshold", "1", "--wrong-id"}, s);
  CHECK(code_of([&] { liar.predict(random_fruit(s, 1, 9)[0]); }) == ErrorCode::Oracle);

  SubprocessClassifier quitter({exe, "--feature", "weight", "--threshold", "1", "--exit-after", "1"}, s);
  const auto xs = random_fruit(s, 2, 10);
  quitter.predict(xs[0]);
  CHECK(code_of([&] { quitter.predict(xs[1]); }) == ErrorCode::Oracle);

  CHECK(code_of([&] { SubprocessClassifier missing({"/nonexistent/oracle"}, s); missing.predict(xs[0]); }) ==
        ErrorCode::Oracle);
}
