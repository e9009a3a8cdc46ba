// Acceptance run: one [PASS]/[FAIL] line per criterion, exit status 1 if any fails.
// Usage: acceptance <path-to-cli> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nlx/error.hpp"
#include "nlx/executor.hpp"
#include "nlx/experiments.hpp"
#include "nlx/explainer.hpp"
#include "nlx/explang.hpp"
#include "nlx/rng.hpp"
#include "nlx/taskforge.hpp"
#include "nlx/textmetrics.hpp"

namespace fs = std::filesystem;
using namespace nlx;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const std::string& title, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_seconds;
  const bool pass = o.pass && in_time;
  if (!pass) ++g_failures;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2fs/%.0fs", secs, limit_seconds);
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << title << " | " << o.detail << " | "
            << timing << (in_time ? "" : " (over time limit)") << std::endl;
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. Explanation strings printed in the source tables. The crowd-written
// free-text explanations next to them are not in the rule language.

const std::vector<std::string> kCorpus = {
    "If pdsu lesser than or equal to 1014, then no",
    "If pdsu not greater than 1020, then it is certainly no",
    "If vpgu equal to antartica, then blicket",
    "If vpgu equal to antartica, then it is definitely blicket",
    "If twqk equal to no, then it is seldom fem",
    "If bgbs not equal to 4, then it is certainly 2",
    "If bgbs equal to 4, then it is seldom 2",
    "If aehw equal to no AND hxva equal to africas, then tupa.",
    "If hxva equal to africas, then it is definitely tupa",
    "If kjwx greater than or equal to 18 OR bzjf greater than 1601, then it is definitely 1.",
    "If kjwx not lesser than 19, then it is likely 1",
    "If aehw equal to no AND hxva equal to africas, then tupa",
    "If bgbs not equal to 4, then 2",
    "If aehw equal to yes, then not tupa.",
    "If szoj not equal to 3, then not 5",
    "If skewness lesser than or equal to 3.049, then it is occasionally Fake.",
    "If kurtosis lesser than or equal to 0.995, then it is often Fake",
    "If kurtosis lesser than 9600, then it is frequently Fake",
    "If SGPT lesser than or equal to 39, then patient is generally No",
    "If age lesser than or equal to 39, then patient is generally No",
    "If middle-middle-square equal to x, then Game over is sometimes positive",
};

Outcome criterion_grammar() {
  std::size_t ok = 0;
  std::string first_bad;
  for (const auto& s : kCorpus) {
    bool good = false;
    try {
      const Explanation e = parse(s);
      const std::string r = render(e);
      good = r == s && parse(r) == e && render(parse(r)) == r;
    } catch (const Error&) {
    }
    if (good) ++ok;
    else if (first_bad.empty()) first_bad = s;
  }
  return {ok == kCorpus.size(), std::to_string(ok) + "/" + std::to_string(kCorpus.size()) +
                                    " byte-identical" + (first_bad.empty() ? "" : ", first failure: " + first_bad)};
}

// ---------------------------------------------------------------------------
// 2. Truth-table interpreter, written against the documented semantics only.

struct TinyWorld {
  FeatureSchema schema;
  std::vector<std::vector<Value>> domains;  // every value a feature can take
};

TinyWorld random_world(Rng& rng) {
  TinyWorld w;
  std::vector<FeatureSpec> specs;
  const std::size_t nf = 1 + rng.below(3);
  for (std::size_t f = 0; f < nf; ++f) {
    const std::size_t k = 1 + rng.below(3);
    std::vector<Value> dom;
    if (rng.bernoulli(0.5)) {
      for (std::size_t v = 0; v < k; ++v) dom.push_back(Value::number(static_cast<double>(v)));
      specs.push_back({"n" + std::to_string(f), NumericRange{0.0, static_cast<double>(std::max<std::size_t>(k - 1, 1))}});
    } else {
      std::vector<std::string> words;
      for (std::size_t v = 0; v < k; ++v) {
        words.push_back(std::string(1, static_cast<char>('a' + v)));
        dom.push_back(Value::text(words.back()));
      }
      specs.push_back({"c" + std::to_string(f), CategoricalDomain{words}});
    }
    w.domains.push_back(std::move(dom));
  }
  w.schema = FeatureSchema(std::move(specs));
  return w;
}

Condition random_condition(const TinyWorld& w, Rng& rng) {
  const std::size_t f = rng.below(w.schema.size());
  Condition c;
  c.feature = w.schema[f].name;
  if (w.schema[f].is_numeric()) {
    c.comparator = kAllComparators[rng.below(kAllComparators.size())];
    // Thresholds on and between the grid points.
    c.value = Value::number(static_cast<double>(rng.between(-1, 6)) * 0.5);
  } else {
    c.comparator = rng.bernoulli(0.5) ? Comparator::Eq : Comparator::Neq;
    c.value = w.domains[f][rng.below(w.domains[f].size())];
  }
  return c;
}

bool oracle_condition(const Condition& c, const TinyWorld& w, const std::vector<Value>& row) {
  std::size_t f = 0;
  while (w.schema[f].name != c.feature) ++f;
  const Value& v = row[f];
  if (!v.is_number()) {
    const bool same = v.as_text() == c.value.as_text();
    return c.comparator == Comparator::Eq ? same : !same;
  }
  const double x = v.as_number(), t = c.value.as_number();
  switch (c.comparator) {
    case Comparator::Eq: return x == t;
    case Comparator::Neq: return x != t;
    case Comparator::Gt: return x > t;
    case Comparator::Lt: return x < t;
    case Comparator::Geq: return x >= t;
    case Comparator::Leq: return x <= t;
    case Comparator::Ngt: return !(x > t);
    case Comparator::Nlt: return !(x < t);
  }
  return false;
}

bool oracle_clause(const ClauseTree& t, const TinyWorld& w, const std::vector<Value>& row) {
  if (t.is_leaf()) return oracle_condition(t.condition(), w, row);
  const bool l = oracle_clause(t.left(), w, row);
  const bool r = oracle_clause(t.right(), w, row);
  return t.op() == BoolOp::And ? (l && r) : (l || r);
}

// The stated label is predicted where the clause fires; a quantifier below
// one half flips that, and everything else gets the other label.
std::string oracle_label(const Explanation& e, bool fires) {
  const std::string stated = e.label_negated ? "not " + e.label : e.label;
  const std::string other = e.label_negated ? e.label : "not " + e.label;
  const bool inverted = e.quantifier && e.quantifier->confidence() < 0.5;
  return (fires != inverted) ? stated : other;
}

Outcome criterion_executor() {
  std::size_t mismatches = 0, checked = 0;
  for (std::uint64_t i = 0; i < 500; ++i) {
    Rng rng = Rng::derive(1000 + i, Stream::Explanation);
    const TinyWorld w = random_world(rng);
    ClauseTree clause = random_condition(w, rng);
    const std::size_t joins = rng.below(3);
    for (std::size_t j = 0; j < joins; ++j) {
      clause = ClauseTree::join(rng.bernoulli(0.5) ? BoolOp::And : BoolOp::Or, clause, random_condition(w, rng));
    }
    Explanation e;
    e.clause = clause;
    e.label = "L";
    e.label_negated = rng.bernoulli(0.5);
    if (rng.bernoulli(0.6)) e.quantifier = Quantifier(kQuantifierTable[rng.below(kQuantifierTable.size())].word);

    // Every row of the (at most 27-row) product space.
    std::vector<std::vector<Value>> rows = {{}};
    for (const auto& dom : w.domains) {
      std::vector<std::vector<Value>> next;
      for (const auto& r : rows) {
        for (const auto& v : dom) {
          auto r2 = r;
          r2.push_back(v);
          next.push_back(std::move(r2));
        }
      }
      rows = std::move(next);
    }
    for (const auto& r : rows) {
      const bool fires = oracle_clause(e.clause, w, r);
      const Verdict v = apply_explanation(e, w.schema, Example{r}, "L");
      ++checked;
      if (v.applies != fires || v.predicted_label != oracle_label(e, fires)) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over " + std::to_string(checked) + " rows"};
}

// ---------------------------------------------------------------------------
// 3. Generator statistics.

Outcome criterion_generator() {
  const auto descriptors = all_descriptors();
  double worst_fraction = 1.0;
  std::size_t unfaithful = 0, noise_bad = 0, noise_checked = 0;
  double worst_gap = 0.0;
  for (const auto& d : descriptors) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SyntheticTask t = generate_task(d, 5, 10, 100, seed);
      worst_fraction = std::min(worst_fraction, min_class_fraction(t.train));
      if (!d.quantifier && faithfulness(t.planted, t.train) != 1.0) ++unfaithful;
      if (d.quantifier) {
        const SyntheticTask big = generate_task(d, 5, 2000, 10, seed);
        const std::string stated =
            big.planted.label_negated ? negate_label(big.planted.label) : big.planted.label;
        std::size_t fires = 0, stated_hits = 0;
        for (std::size_t i = 0; i < big.train.size(); ++i) {
          if (!clause_holds(big.planted.clause, big.schema, big.train.examples[i])) continue;
          ++fires;
          stated_hits += big.train.labels[i] == stated;
        }
        const double rate = static_cast<double>(stated_hits) / static_cast<double>(fires);
        const double gap = std::fabs(rate - big.planted.quantifier->confidence());
        worst_gap = std::max(worst_gap, gap);
        ++noise_checked;
        if (gap > 0.02) ++noise_bad;
      }
    }
  }
  const bool pass = worst_fraction >= kMinClassFraction && unfaithful == 0 && noise_bad == 0;
  return {pass, "(a) min class fraction " + fmt(worst_fraction) + "; (b) " + std::to_string(unfaithful) +
                    " unfaithful planted rules; (c) worst noise gap " + fmt(worst_gap) + " over " +
                    std::to_string(noise_checked) + " tasks"};
}

// ---------------------------------------------------------------------------
// 4. Planted recovery.

Outcome criterion_recovery() {
  const ComplexityDescriptor single[] = {
      {false, Conjunction::None, Negation::None},
      {false, Conjunction::None, Negation::Clause},
      {false, Conjunction::None, Negation::Label},
      {false, Conjunction::None, Negation::ClauseAndLabel},
  };
  SearchConfig config;
  config.strategy = Strategy::PerFeature;
  std::size_t perfect = 0;
  double sim_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SyntheticTask t = generate_task(single[seed % 4], 5, 10, 100, 5000 + seed);
    const ExplainResult r = explain(t.train, config);
    perfect += r.report.faithfulness == 1.0;
    sim_sum += simulatability(r.best, t.test);
  }
  const double sim = sim_sum / 100.0;
  return {perfect >= 95 && sim >= 0.90,
          std::to_string(perfect) + "/100 with input faithfulness 1.0; mean held-out simulatability " + fmt(sim)};
}

// ---------------------------------------------------------------------------
// 5. Strategy ordering.

std::map<Strategy, double> strategy_means(int depth) {
  const auto descriptors = all_descriptors();
  std::map<Strategy, double> sum;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const SyntheticTask t = generate_task(descriptors[s % descriptors.size()], 5, 10, 10, 9000 + s);
    for (Strategy st : {Strategy::Top1, Strategy::Beam, Strategy::PerFeature}) {
      SearchConfig c;
      c.strategy = st;
      c.max_conjunction_depth = depth;
      sum[st] += explain(t.train, c).report.faithfulness;
    }
  }
  for (auto& [k, v] : sum) v /= 200.0;
  return sum;
}

Outcome criterion_ordering() {
  const auto m = strategy_means(1);
  const double pf = m.at(Strategy::PerFeature), beam = m.at(Strategy::Beam), top1 = m.at(Strategy::Top1);
  return {pf >= beam && beam >= top1 && pf - top1 > 0.0,
          "PER_FEATURE " + fmt(pf) + " >= BEAM " + fmt(beam) + " >= TOP1 " + fmt(top1)};
}

// ---------------------------------------------------------------------------
// 6. Budget regime.

Outcome criterion_budget() {
  ExperimentConfig config;  // depth-3 tree, built-in adult-like table, 100 x 10, budget 15
  const BudgetReport r = run_budget_experiment(config);
  const Stat pf = summarize(r.method("perfeat").faithfulness);
  const Stat lime = summarize(r.method("lime").faithfulness);
  std::size_t max_used = 0;
  for (const auto& m : r.methods) max_used = std::max(max_used, m.budget_used_max);
  return {pf.mean > lime.mean && max_used <= config.budget && r.method("perfeat").faithfulness.size() == 100,
          "PER_FEATURE " + fmt(pf.mean) + " vs LIME " + fmt(lime.mean) + "; max calls in a run " +
              std::to_string(max_used) + "/" + std::to_string(config.budget) + "; classifier accuracy " +
              fmt(r.classifier_test_accuracy)};
}

// ---------------------------------------------------------------------------
// 7. Subset ensembling.

Outcome criterion_ensemble() {
  const auto descriptors = all_descriptors();
  std::size_t violations = 0;
  double ens_sum = 0.0, single_sum = 0.0;
  SearchConfig config;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SyntheticTask t = generate_task(descriptors[seed % descriptors.size()], 6, 80, 10, 7000 + seed);
    const EnsembleResult r = ensemble_subsets(t.train, config, 8, 10, seed);
    const std::size_t best = count_matches(r.best, t.train).matches();
    for (const auto& w : r.winners) {
      if (count_matches(w.explanation, t.train).matches() > best) ++violations;
    }
    ens_sum += faithfulness(r.best, t.train);
    single_sum += faithfulness(r.winners.front().explanation, t.train);
  }
  const double ens = ens_sum / 50.0, single = single_sum / 50.0;
  return {violations == 0 && ens >= single, std::to_string(violations) + " argmax violations; ensembled mean " +
                                                fmt(ens) + " vs single-subset mean " + fmt(single)};
}

// ---------------------------------------------------------------------------
// 8. Metric identities and text-metric oracles.

std::size_t lcs_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t i,
                       std::size_t j, std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  const auto key = std::make_pair(i, j);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const std::size_t v = a[i] == b[j] ? 1 + lcs_oracle(a, b, i + 1, j + 1, memo)
                                     : std::max(lcs_oracle(a, b, i + 1, j, memo), lcs_oracle(a, b, i, j + 1, memo));
  memo[key] = v;
  return v;
}

Outcome criterion_metrics() {
  const auto descriptors = all_descriptors();
  std::size_t identity_bad = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Rng rng = Rng::derive(i, Stream::Examples, 77);
    const FeatureSchema schema = sample_schema(3 + rng.below(4), i);
    const Explanation e = sample_explanation(descriptors[rng.below(descriptors.size())], schema, i);
    LabeledBatch b;
    b.schema = schema;
    b.label_of_interest = e.label;
    b.examples = sample_examples(schema, 1 + rng.below(40), rng);
    for (std::size_t k = 0; k < b.examples.size(); ++k) {
      b.labels.push_back(rng.bernoulli(0.5) ? e.label : negate_label(e.label));
    }
    // Independent counts.
    std::size_t n = b.size(), fired = 0, hit_on = 0, hit_off = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool f = clause_holds(e.clause, schema, b.examples[k]);
      const bool hit = oracle_label(e, f) == b.labels[k];
      fired += f;
      (f ? hit_on : hit_off) += hit;
    }
    const EvalReport r = evaluate(e, b);
    const double off = fired == n ? 0.0 : static_cast<double>(hit_off) / static_cast<double>(n - fired);
    const double gap = std::fabs(r.faithfulness - (r.coverage * r.precision + (1.0 - r.coverage) * off));
    worst = std::max(worst, gap);
    // Exact check on the integers behind the floats.
    const MatchCounts mc = count_matches(e, b);
    const bool exact = mc.total == n && mc.applied == fired && mc.applied_matches == hit_on &&
                       mc.other_matches == hit_off && mc.matches() == hit_on + hit_off;
    if (gap > 1e-12 || !exact) ++identity_bad;
  }

  // Text metrics.
  const TokenSeq s = tokenize("If aehw equal to no AND hxva equal to africas, then tupa");
  const bool identity = bleu(s, {s}) == 1.0 && rouge_n(s, s, 1).f1 == 1.0 && rouge_n(s, s, 2).f1 == 1.0 &&
                        rouge_l(s, s) == 1.0;
  // Hand counts: 6/7 unigrams; bigrams (4+1)/(6+1); trigrams (2+1)/(5+1);
  // 4-grams (1+1)/(4+1); equal lengths so no brevity penalty.
  const double bleu_hand = std::pow((6.0 / 7.0) * (5.0 / 7.0) * (3.0 / 6.0) * (2.0 / 5.0), 0.25);
  const double bleu_got = bleu(tokenize("if a equal to 1 then yes"), {tokenize("if a equal to 2 then yes")});
  const RougeScore r1 = rouge_n(tokenize("a b c d e"), tokenize("a w x y"), 1);
  const double f1_hand = 2.0 * 0.2 * 0.25 / 0.45;
  bool rouge_ok = std::fabs(r1.precision - 0.2) < 1e-9 && std::fabs(r1.recall - 0.25) < 1e-9 &&
                  std::fabs(r1.f1 - f1_hand) < 1e-9;
  std::size_t lcs_bad = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng rng = Rng::derive(i, Stream::Examples, 99);
    std::vector<std::string> a, b;
    for (int k = 0; k < 10; ++k) {
      a.emplace_back(1, static_cast<char>('a' + rng.below(4)));
      b.emplace_back(1, static_cast<char>('a' + rng.below(4)));
    }
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    const double l = static_cast<double>(lcs_oracle(a, b, 0, 0, memo));
    const double want = l == 0.0 ? 0.0 : 2.0 * (l / 10.0) * (l / 10.0) / (l / 10.0 + l / 10.0);
    if (std::fabs(rouge_l(TokenSeq{a}, TokenSeq{b}) - want) > 1e-9) ++lcs_bad;
  }
  const bool bleu_ok = std::fabs(bleu_got - bleu_hand) < 1e-9;
  return {identity_bad == 0 && identity && bleu_ok && rouge_ok && lcs_bad == 0,
          std::to_string(identity_bad) + "/1000 identity failures (worst float gap " + std::to_string(worst) +
              "); identity scores " + (identity ? "1.0" : "not 1.0") + "; BLEU " + fmt(bleu_got, 9) + " vs hand " +
              fmt(bleu_hand, 9) + "; ROUGE-1 " + (rouge_ok ? "ok" : "off") + "; ROUGE-L " +
              std::to_string(lcs_bad) + "/200 off"};
}

// ---------------------------------------------------------------------------
// 9. Determinism through the command line.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_determinism(const std::string& cli, const fs::path& scratch) {
  fs::create_directories(scratch);
  const fs::path config = scratch / "bench.json";
  {
    std::ofstream out(config);
    out << R"({"n_subsets": 100, "subset_size": 10, "budget": 15, "classifier": "tree", "tree_depth": 3})" << "\n";
  }
  std::vector<std::string> bodies;
  for (int run = 0; run < 2; ++run) {
    const fs::path report = scratch / ("bench-" + std::to_string(run) + ".json");
    fs::remove(report);
    const std::string cmd = "\"" + cli + "\" bench --config \"" + config.string() + "\" --seed 11 --out \"" +
                            report.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) return {false, "bench exited with status " + std::to_string(rc)};
    bodies.push_back(slurp(report));
  }
  const bool same = !bodies[0].empty() && bodies[0] == bodies[1];
  return {same, same ? "two runs, " + std::to_string(bodies[0].size()) + " identical bytes" : "reports differ"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <cli> <scratch-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argv[2];

  run_criterion(1, "grammar corpus round-trip", 1, criterion_grammar);
  run_criterion(2, "executor vs truth-table oracle", 10, criterion_executor);
  run_criterion(3, "generator statistics", 30, criterion_generator);
  run_criterion(4, "planted recovery", 30, criterion_recovery);
  run_criterion(5, "strategy ordering", 60, criterion_ordering);
  run_criterion(6, "budget regime", 300, criterion_budget);
  run_criterion(7, "subset ensembling", 60, criterion_ensemble);
  run_criterion(8, "metric identities", 10, criterion_metrics);
  run_criterion(9, "bench determinism", 300, [&] { return criterion_determinism(cli, scratch); });

  // Not a criterion: the same batches with one conjunction level allowed.
  try {
    const auto m = strategy_means(2);
    std::cout << "[INFO] depth-2 beam: PER_FEATURE " << fmt(m.at(Strategy::PerFeature)) << ", BEAM "
              << fmt(m.at(Strategy::Beam)) << ", TOP1 " << fmt(m.at(Strategy::Top1)) << std::endl;
  } catch (const std::exception& e) {
    std::cout << "[INFO] depth-2 beam: " << e.what() << std::endl;
  }

  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
