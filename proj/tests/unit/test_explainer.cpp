#include <doctest.h>

#include <functional>
#include <set>
#include <string>

#include "nlx/error.hpp"
#include "nlx/explainer.hpp"
#include "nlx/taskforge.hpp"

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

// Best match count over every single condition and both label polarities,
// scored through the executor rather than the explainer's masks.
std::size_t brute_force_single(const LabeledBatch& b) {
  std::size_t best = 0;
  for (const Condition& c : enumerate_conditions(b.schema, b)) {
    for (bool neg : {false, true}) {
      const Explanation e{ClauseTree(c), std::nullopt, b.label_of_interest, neg, std::nullopt, false};
      best = std::max(best, count_matches(e, b).matches());
    }
  }
  return best;
}

LabeledBatch tiny_batch() {
  LabeledBatch b;
  b.schema = FeatureSchema({{"size", NumericRange{0, 10}}, {"hue", CategoricalDomain{{"red", "blue"}}}});
  const std::vector<std::pair<double, std::string>> rows = {{1, "red"}, {2, "blue"}, {5, "red"}, {8, "blue"}};
  for (const auto& [x, h] : rows) b.examples.push_back(make_example(b.schema, {{"size", Value::number(x)}, {"hue", Value::text(h)}}));
  b.labels = {"big", "not big", "big", "big"};
  b.label_of_interest = "big";
  return b;
}

}  // namespace

TEST_CASE("condition enumeration") {
  const LabeledBatch b = tiny_batch();
  const auto conds = enumerate_conditions(b.schema, b);
  // 3 midpoints x 6 comparators + 2 values x 2 comparators
  CHECK(conds.size() == 22);
  std::set<double> mids;
  for (const auto& c : conds) {
    if (c.feature == "size") mids.insert(c.value.as_number());
  }
  CHECK(mids == std::set<double>{1.5, 3.5, 6.5});

  LabeledBatch constant = b;
  for (auto& ex : constant.examples) ex.values[0] = Value::number(4);
  CHECK(enumerate_conditions(constant.schema, constant).size() == 4);
}

TEST_CASE("nearest quantifier") {
  CHECK(nearest_quantifier(1.0).word() == "always");
  CHECK(nearest_quantifier(0.0).word() == "never");
  CHECK(nearest_quantifier(0.51).word() == "sometimes");
  // Equal confidences: the earlier table entry wins.
  CHECK(nearest_quantifier(0.95).word() == "certainly");
  CHECK(nearest_quantifier(0.70).word() == "likely");
  CHECK(nearest_quantifier(0.12).word() == "seldom");
}

TEST_CASE("quantifier fitting") {
  const LabeledBatch b = tiny_batch();
  const ClauseTree hue_red = ClauseTree(Condition{"hue", Comparator::Eq, Value::text("red")});
  const Explanation always = fit_quantifier(hue_red, "big", b);
  CHECK_FALSE(always.quantifier);
  const ClauseTree blue = ClauseTree(Condition{"hue", Comparator::Eq, Value::text("blue")});
  const Explanation half = fit_quantifier(blue, "big", b);
  REQUIRE(half.quantifier);
  CHECK(half.quantifier->word() == nearest_quantifier(0.5).word());
  const Explanation neg = fit_quantifier(blue, "not big", b);
  CHECK(neg.label_negated);
  const ClauseTree none = ClauseTree(Condition{"size", Comparator::Gt, Value::number(100)});
  CHECK(code_of([&] { fit_quantifier(none, "big", b); }) == ErrorCode::ZeroCoverage);
  CHECK(code_of([&] { fit_quantifier(blue, "small", b); }) == ErrorCode::LabelMismatch);
}

TEST_CASE("per-feature search finds the brute-force optimum") {
  SearchConfig plain;
  plain.quantifier_fitting = false;
  SearchConfig fitted;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto& d = all_descriptors()[seed % 24];
    const SyntheticTask t = generate_task(d, 5, 10, 10, 700 + seed);
    const std::size_t oracle = brute_force_single(t.train);
    for (const SearchConfig* cfg : {&plain, &fitted}) {
      const CandidateSet set = per_feature_search(t.train, *cfg);
      CHECK(set.best().matches == oracle);
      std::set<std::string> feats;
      for (const auto& c : set.candidates) {
        CHECK(c.explanation.clause.is_leaf());
        feats.insert(c.explanation.clause.condition().feature);
        CHECK(count_matches(c.explanation, t.train).matches() == c.matches);
      }
      CHECK(feats.size() == set.size());
      for (std::size_t i = 1; i < set.size(); ++i) CHECK_FALSE(ranks_before(set.candidates[i], set.candidates[i - 1]));
    }
  }
}

TEST_CASE("beam and top1 agree with the executor") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SyntheticTask t = generate_task(all_descriptors()[seed % 24], 5, 20, 10, 900 + seed);
    SearchConfig beam;
    beam.strategy = Strategy::Beam;
    const ExplainResult r1 = explain(t.train, beam);
    CHECK(r1.best.clause.is_leaf());
    CHECK(r1.report.faithfulness == doctest::Approx(faithfulness(r1.best, t.train)));
    CHECK(r1.candidates.best().matches == brute_force_single(t.train));

    beam.max_conjunction_depth = 2;
    const ExplainResult r2 = explain(t.train, beam);
    CHECK(r2.report.faithfulness >= r1.report.faithfulness);
    CHECK(r2.candidates.size() <= beam.beam_width);
    for (const auto& c : r2.candidates.candidates) {
      CHECK(count_matches(c.explanation, t.train).matches() == c.matches);
    }

    SearchConfig top1;
    top1.strategy = Strategy::Top1;
    const ExplainResult r3 = explain(t.train, top1);
    CHECK(r3.report.faithfulness <= r1.report.faithfulness);
    CHECK(r3.candidates.size() == 1);
  }
}

TEST_CASE("top1 picks the informative feature") {
  LabeledBatch b;
  b.schema = FeatureSchema({{"noise", CategoricalDomain{{"a", "b"}}}, {"signal", CategoricalDomain{{"on", "off"}}}});
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"a", "on"}, {"b", "on"}, {"a", "on"}, {"b", "off"}, {"a", "off"}, {"b", "off"}};
  for (const auto& [n, s] : rows) b.examples.push_back(make_example(b.schema, {{"noise", Value::text(n)}, {"signal", Value::text(s)}}));
  b.labels = {"yes", "yes", "yes", "not yes", "not yes", "not yes"};
  b.label_of_interest = "yes";
  SearchConfig cfg;
  cfg.strategy = Strategy::Top1;
  const ExplainResult r = explain(b, cfg);
  CHECK(r.best.clause.condition().feature == "signal");
  CHECK(r.report.faithfulness == 1.0);
}

TEST_CASE("search input errors") {
  LabeledBatch b = tiny_batch();
  const SearchConfig cfg;
  LabeledBatch single = b;
  single.labels.assign(single.size(), "big");
  CHECK(code_of([&] { explain(single, cfg); }) == ErrorCode::DegenerateBatch);
  LabeledBatch raw = b;
  raw.labels[1] = "small";
  CHECK(code_of([&] { explain(raw, cfg); }) == ErrorCode::InvalidArgument);
  LabeledBatch empty = b;
  empty.examples.clear();
  empty.labels.clear();
  CHECK(code_of([&] { explain(empty, cfg); }) == ErrorCode::EmptyBatch);
  CHECK(code_of([&] { ensemble_subsets(b, cfg, 2, 3, 1); }) == ErrorCode::InsufficientExamples);
  CHECK(code_of([&] { ensemble_subsets(single, cfg, 2, 2, 1); }) == ErrorCode::DegenerateBatch);
}

TEST_CASE("config") {
  CHECK(strategy_from_name("GREEDY") == Strategy::Top1);
  CHECK(strategy_from_name("per_feature") == Strategy::PerFeature);
  CHECK(strategy_from_name("pf") == Strategy::PerFeature);
  CHECK(strategy_from_name("beam") == Strategy::Beam);
  CHECK(code_of([] { strategy_from_name("dfs"); }) == ErrorCode::Config);
  SearchConfig c;
  c.max_conjunction_depth = 3;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::Config);
  c.max_conjunction_depth = 1;
  c.beam_width = 0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::Config);
}

TEST_CASE("beam width one keeps a single candidate") {
  const SyntheticTask t = generate_task(all_descriptors()[5], 5, 20, 10, 31);
  SearchConfig cfg;
  cfg.strategy = Strategy::Beam;
  cfg.beam_width = 1;
  cfg.max_conjunction_depth = 2;
  const CandidateSet set = beam_conjunction_search(t.train, cfg);
  CHECK(set.size() == 1);
  CHECK(set.best().matches >= brute_force_single(t.train));
}

TEST_CASE("ensembling keeps the winner with most full-batch matches") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SyntheticTask t = generate_task(all_descriptors()[seed % 24], 5, 80, 10, 300 + seed);
    const EnsembleResult r = ensemble_subsets(t.train, SearchConfig{}, 8, 10, seed);
    REQUIRE_FALSE(r.winners.empty());
    CHECK(r.subsets.size() == 8);
    std::set<std::size_t> seen;
    for (const auto& s : r.subsets) {
      CHECK(s.size() == 10);
      seen.insert(s.begin(), s.end());
    }
    CHECK(seen.size() == 80);
    std::size_t best = 0;
    for (const auto& w : r.winners) {
      CHECK(w.total == 80);
      CHECK(count_matches(w.explanation, t.train).matches() == w.matches);
      best = std::max(best, w.matches);
    }
    CHECK(count_matches(r.best, t.train).matches() == best);
  }
}
