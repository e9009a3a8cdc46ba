#include "nlx/explainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "nlx/error.hpp"
#include "nlx/rng.hpp"

namespace nlx {

namespace {

// Bit per example.
class Mask {
 public:
  explicit Mask(std::size_t n = 0) : n_(n), words_((n + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  std::size_t count_and(const Mask& o) const noexcept {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
      c += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
    }
    return c;
  }
  Mask combine(const Mask& o, BoolOp op) const {
    Mask out(n_);
    for (std::size_t i = 0; i < words_.size(); ++i) {
      out.words_[i] = op == BoolOp::And ? (words_[i] & o.words_[i]) : (words_[i] | o.words_[i]);
    }
    return out;
  }

 private:
  std::size_t n_;
  std::vector<std::uint64_t> words_;
};

void check_search_input(const LabeledBatch& batch) {
  if (batch.examples.empty()) throw Error(ErrorCode::EmptyBatch, "batch is empty");
  if (batch.examples.size() != batch.labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "batch has mismatched example and label counts");
  }
  bool has_interest = false;
  bool has_other = false;
  for (const auto& y : batch.labels) {
    if (!is_binary_label(y, batch.label_of_interest)) {
      throw Error(ErrorCode::InvalidArgument, "label '" + y + "' is not binarized against '" +
                                                  batch.label_of_interest + "'");
    }
    (y == batch.label_of_interest ? has_interest : has_other) = true;
  }
  if (!has_interest || !has_other) {
    throw Error(ErrorCode::DegenerateBatch, "batch contains a single predicted class");
  }
}

double entropy2(std::size_t a, std::size_t n) {
  if (n == 0 || a == 0 || a == n) return 0.0;
  const double p = static_cast<double>(a) / static_cast<double>(n);
  return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p));
}

struct ClauseEntry {
  ClauseTree clause;
  Mask mask;
  std::size_t feature = 0;  // schema index of the first condition's feature
};

// Scores clause/polarity pairs against one batch using precomputed masks.
class Scorer {
 public:
  Scorer(const LabeledBatch& batch, bool fit_quantifiers)
      : batch_(batch), fit_(fit_quantifiers), n_(batch.size()), interest_(batch.size()) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (batch.labels[i] == batch.label_of_interest) interest_.set(i);
    }
    n_interest_ = interest_.count();
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t n_interest() const noexcept { return n_interest_; }
  const Mask& interest() const noexcept { return interest_; }

  Mask condition_mask(const Condition& c) const {
    Mask m(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (condition_holds(c, batch_.schema, batch_.examples[i])) m.set(i);
    }
    return m;
  }

  Candidate make(const ClauseTree& clause, const Mask& mask, bool stated_negated) const {
    const std::size_t applied = mask.count();
    const std::size_t applied_interest = mask.count_and(interest_);
    Explanation e{clause, std::nullopt, batch_.label_of_interest, stated_negated, std::nullopt, false};
    if (fit_ && applied > 0) {
      const std::size_t carrying = stated_negated ? applied - applied_interest : applied_interest;
      if (carrying != applied) {
        e.quantifier = nearest_quantifier(static_cast<double>(carrying) / static_cast<double>(applied));
      }
    }
    return finish(std::move(e), applied, applied_interest);
  }

  Candidate finish(Explanation e, std::size_t applied, std::size_t applied_interest) const {
    const bool interest_if_applies = predicts_interest(e, true);
    const std::size_t outside = n_ - applied;
    const std::size_t outside_interest = n_interest_ - applied_interest;
    Candidate c;
    c.matches = interest_if_applies ? applied_interest + (outside - outside_interest)
                                    : (applied - applied_interest) + outside_interest;
    c.applied = applied;
    c.total = n_;
    c.rendered = render(e);
    c.explanation = std::move(e);
    return c;
  }

  // Better of the two label polarities.
  Candidate best_polarity(const ClauseTree& clause, const Mask& mask) const {
    Candidate a = make(clause, mask, false);
    Candidate b = make(clause, mask, true);
    return ranks_before(b, a) ? b : a;
  }

 private:
  const LabeledBatch& batch_;
  bool fit_;
  std::size_t n_;
  Mask interest_;
  std::size_t n_interest_ = 0;
};

std::vector<ClauseEntry> single_clauses(const LabeledBatch& batch, const Scorer& scorer) {
  std::vector<ClauseEntry> out;
  for (const Condition& c : enumerate_conditions(batch.schema, batch)) {
    out.push_back(ClauseEntry{ClauseTree(c), scorer.condition_mask(c), *batch.schema.index_of(c.feature)});
  }
  return out;
}

CandidateSet finalize(std::vector<Candidate> pool, std::size_t limit) {
  std::sort(pool.begin(), pool.end(), ranks_before);
  CandidateSet set;
  std::unordered_set<std::string> seen;
  for (auto& c : pool) {
    if (set.candidates.size() >= limit) break;
    if (seen.insert(c.rendered).second) set.candidates.push_back(std::move(c));
  }
  return set;
}

std::set<std::string> features_of(const ClauseTree& clause) {
  std::set<std::string> out;
  clause.for_each_condition([&](const Condition& c) { out.insert(c.feature); });
  return out;
}

}  // namespace

std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::Top1: return "top1";
    case Strategy::Beam: return "beam";
    case Strategy::PerFeature: return "perfeat";
  }
  return "perfeat";
}

Strategy strategy_from_name(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "top1" || lower == "greedy") return Strategy::Top1;
  if (lower == "beam" || lower == "bs") return Strategy::Beam;
  if (lower == "perfeat" || lower == "per_feature" || lower == "pf") return Strategy::PerFeature;
  throw Error(ErrorCode::Config, "unknown strategy '" + std::string(name) + "'");
}

void SearchConfig::validate() const {
  if (beam_width < 1) throw Error(ErrorCode::Config, "beam_width must be at least 1");
  if (max_conjunction_depth < 1 || max_conjunction_depth > 2) {
    throw Error(ErrorCode::Config, "max_conjunction_depth must be 1 or 2");
  }
}

bool ranks_before(const Candidate& a, const Candidate& b) noexcept {
  if (a.matches != b.matches) return a.matches > b.matches;
  if (a.applied != b.applied) return a.applied > b.applied;
  const std::size_t sa = a.explanation.clause.size();
  const std::size_t sb = b.explanation.clause.size();
  if (sa != sb) return sa < sb;
  return a.rendered < b.rendered;
}

const Candidate& CandidateSet::best() const {
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "empty candidate set");
  return candidates.front();
}

std::vector<Condition> enumerate_conditions(const FeatureSchema& schema, const LabeledBatch& batch) {
  if (batch.examples.empty()) throw Error(ErrorCode::EmptyBatch, "batch is empty");
  std::vector<Condition> out;
  for (std::size_t f = 0; f < schema.size(); ++f) {
    const FeatureSpec& spec = schema[f];
    const auto col = batch.schema.index_of(spec.name);
    if (!col) throw Error(ErrorCode::UnknownFeature, "batch lacks feature '" + spec.name + "'");
    if (!spec.is_numeric()) {
      std::vector<std::string> values = spec.domain().values;
      for (const auto& ex : batch.examples) {
        const std::string& v = ex.values.at(*col).as_text();
        if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
      }
      for (Comparator cmp : {Comparator::Eq, Comparator::Neq}) {
        for (const auto& v : values) out.push_back(Condition{spec.name, cmp, Value::text(v)});
      }
      continue;
    }
    std::set<double> observed;
    for (const auto& ex : batch.examples) observed.insert(ex.values.at(*col).as_number());
    std::vector<double> sorted(observed.begin(), observed.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      const double mid = sorted[i - 1] + (sorted[i] - sorted[i - 1]) / 2.0;
      for (Comparator cmp : {Comparator::Gt, Comparator::Lt, Comparator::Geq, Comparator::Leq,
                             Comparator::Ngt, Comparator::Nlt}) {
        out.push_back(Condition{spec.name, cmp, Value::number(mid)});
      }
    }
  }
  return out;
}

Quantifier nearest_quantifier(double p) {
  std::size_t best = 0;
  double best_gap = std::abs(kQuantifierTable[0].confidence - p);
  for (std::size_t i = 1; i < kQuantifierTable.size(); ++i) {
    const double gap = std::abs(kQuantifierTable[i].confidence - p);
    if (gap < best_gap) {
      best = i;
      best_gap = gap;
    }
  }
  return Quantifier(kQuantifierTable[best].word);
}

Explanation fit_quantifier(const ClauseTree& clause, std::string_view label, const LabeledBatch& batch) {
  const std::string& interest = batch.label_of_interest;
  bool negated = false;
  if (label == interest) {
    negated = false;
  } else if (label == negate_label(interest)) {
    negated = true;
  } else {
    throw Error(ErrorCode::LabelMismatch, "label '" + std::string(label) +
                                              "' is neither '" + interest + "' nor its negation");
  }
  std::size_t applied = 0;
  std::size_t carrying = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!clause_holds(clause, batch.schema, batch.examples[i])) continue;
    ++applied;
    carrying += batch.labels[i] == label;
  }
  if (applied == 0) throw Error(ErrorCode::ZeroCoverage, "clause fires on no example");
  Explanation e{clause, std::nullopt, interest, negated, std::nullopt, false};
  if (carrying != applied) {
    e.quantifier = nearest_quantifier(static_cast<double>(carrying) / static_cast<double>(applied));
  }
  return e;
}

CandidateSet per_feature_search(const LabeledBatch& batch, const SearchConfig& config) {
  config.validate();
  check_search_input(batch);
  const Scorer scorer(batch, config.quantifier_fitting);
  std::map<std::size_t, Candidate> best_per_feature;
  for (const auto& entry : single_clauses(batch, scorer)) {
    Candidate c = scorer.best_polarity(entry.clause, entry.mask);
    auto it = best_per_feature.find(entry.feature);
    if (it == best_per_feature.end()) {
      best_per_feature.emplace(entry.feature, std::move(c));
    } else if (ranks_before(c, it->second)) {
      it->second = std::move(c);
    }
  }
  std::vector<Candidate> pool;
  for (auto& [f, c] : best_per_feature) pool.push_back(std::move(c));
  const std::size_t n = pool.size();
  return finalize(std::move(pool), n);
}

CandidateSet top1_search(const LabeledBatch& batch, const SearchConfig& config) {
  config.validate();
  check_search_input(batch);
  const Scorer scorer(batch, config.quantifier_fitting);
  const double h = entropy2(scorer.n_interest(), scorer.n());

  struct FeatureScore {
    double gain = -1.0;
    std::optional<Candidate> best;
  };
  std::map<std::size_t, FeatureScore> per_feature;
  for (const auto& entry : single_clauses(batch, scorer)) {
    const std::size_t a = entry.mask.count();
    const std::size_t a_int = entry.mask.count_and(scorer.interest());
    const std::size_t n = scorer.n();
    const double cond = (static_cast<double>(a) * entropy2(a_int, a) +
                         static_cast<double>(n - a) * entropy2(scorer.n_interest() - a_int, n - a)) /
                        static_cast<double>(n);
    FeatureScore& fs = per_feature[entry.feature];
    fs.gain = std::max(fs.gain, h - cond);
    Candidate c = scorer.best_polarity(entry.clause, entry.mask);
    if (!fs.best || ranks_before(c, *fs.best)) fs.best = std::move(c);
  }
  if (per_feature.empty()) return CandidateSet{};

  constexpr double kGainTolerance = 1e-12;
  auto chosen = per_feature.begin();
  for (auto it = std::next(per_feature.begin()); it != per_feature.end(); ++it) {
    const double diff = it->second.gain - chosen->second.gain;
    if (diff > kGainTolerance ||
        (std::abs(diff) <= kGainTolerance && it->second.best->matches > chosen->second.best->matches)) {
      chosen = it;
    }
  }
  CandidateSet set;
  set.candidates.push_back(*chosen->second.best);
  return set;
}

CandidateSet beam_conjunction_search(const LabeledBatch& batch, const SearchConfig& config) {
  config.validate();
  check_search_input(batch);
  const Scorer scorer(batch, config.quantifier_fitting);
  const std::vector<ClauseEntry> singles = single_clauses(batch, scorer);

  struct BeamItem {
    Candidate best;
    const ClauseEntry* root = nullptr;  // level-1 entry, for its mask
    std::optional<ClauseEntry> extended;
  };

  std::vector<BeamItem> level;
  for (const auto& entry : singles) level.push_back(BeamItem{scorer.best_polarity(entry.clause, entry.mask), &entry, std::nullopt});
  std::sort(level.begin(), level.end(),
            [](const BeamItem& a, const BeamItem& b) { return ranks_before(a.best, b.best); });
  {
    // One beam slot per clause; the other polarity of a clause never ranks higher.
    std::vector<BeamItem> trimmed;
    std::unordered_set<std::string> seen;
    for (auto& item : level) {
      if (trimmed.size() >= config.beam_width) break;
      if (seen.insert(render_clause(item.best.explanation.clause)).second) trimmed.push_back(std::move(item));
    }
    level = std::move(trimmed);
  }

  std::vector<Candidate> pool;
  for (const auto& item : level) pool.push_back(item.best);

  for (int depth = 2; depth <= config.max_conjunction_depth; ++depth) {
    std::vector<BeamItem> next;
    for (const auto& item : level) {
      const ClauseTree& base = item.best.explanation.clause;
      if (base.depth() >= ClauseTree::kMaxDepth) continue;
      const Mask& base_mask = item.extended ? item.extended->mask : item.root->mask;
      const std::set<std::string> used = features_of(base);
      for (const auto& entry : singles) {
        if (used.count(entry.clause.condition().feature)) continue;
        for (BoolOp op : {BoolOp::And, BoolOp::Or}) {
          ClauseEntry ext{ClauseTree::join(op, base, entry.clause), base_mask.combine(entry.mask, op),
                          item.root->feature};
          Candidate c = scorer.best_polarity(ext.clause, ext.mask);
          if (c.matches <= item.best.matches) continue;
          next.push_back(BeamItem{std::move(c), item.root, std::move(ext)});
        }
      }
    }
    std::sort(next.begin(), next.end(),
              [](const BeamItem& a, const BeamItem& b) { return ranks_before(a.best, b.best); });
    std::vector<BeamItem> trimmed;
    std::unordered_set<std::string> seen;
    for (auto& item : next) {
      if (trimmed.size() >= config.beam_width) break;
      if (seen.insert(item.best.rendered).second) trimmed.push_back(std::move(item));
    }
    for (const auto& item : trimmed) pool.push_back(item.best);
    level = std::move(trimmed);
    if (level.empty()) break;
  }
  return finalize(std::move(pool), config.beam_width);
}

Candidate score_candidate(const Explanation& e, const LabeledBatch& batch) {
  const MatchCounts counts = count_matches(e, batch);
  Candidate c;
  c.explanation = e;
  c.rendered = render(e);
  c.matches = counts.matches();
  c.applied = counts.applied;
  c.total = counts.total;
  return c;
}

ExplainResult explain(const LabeledBatch& batch, const SearchConfig& config) {
  CandidateSet set;
  switch (config.strategy) {
    case Strategy::Top1: set = top1_search(batch, config); break;
    case Strategy::Beam: set = beam_conjunction_search(batch, config); break;
    case Strategy::PerFeature: set = per_feature_search(batch, config); break;
  }
  if (set.empty()) {
    throw Error(ErrorCode::DegenerateBatch, "no candidate conditions: every feature is constant");
  }
  ExplainResult result;
  result.best = set.best().explanation;
  const MatchCounts counts = count_matches(result.best, batch);
  result.report.faithfulness = static_cast<double>(counts.matches()) / static_cast<double>(counts.total);
  result.report.coverage = static_cast<double>(counts.applied) / static_cast<double>(counts.total);
  result.report.precision = counts.applied == 0 ? 0.0
                                                : static_cast<double>(counts.applied_matches) /
                                                      static_cast<double>(counts.applied);
  result.candidates = std::move(set);
  return result;
}

LabeledBatch subset_of(const LabeledBatch& batch, const std::vector<std::size_t>& indices) {
  LabeledBatch out;
  out.schema = batch.schema;
  out.label_kind = batch.label_kind;
  out.label_of_interest = batch.label_of_interest;
  out.examples.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.examples.push_back(batch.examples.at(i));
    out.labels.push_back(batch.labels.at(i));
  }
  return out;
}

EnsembleResult ensemble_subsets(const LabeledBatch& batch, const SearchConfig& config,
                                std::size_t n_subsets, std::size_t subset_size, std::uint64_t seed) {
  if (n_subsets == 0 || subset_size == 0) {
    throw Error(ErrorCode::InvalidArgument, "n_subsets and subset_size must be positive");
  }
  if (batch.size() < n_subsets * subset_size) {
    throw Error(ErrorCode::InsufficientExamples,
                "need " + std::to_string(n_subsets * subset_size) + " examples, have " +
                    std::to_string(batch.size()));
  }
  Rng rng = Rng::derive(seed, Stream::Partition);
  const std::vector<std::size_t> order = rng.sample_indices(batch.size(), n_subsets * subset_size);

  EnsembleResult result;
  std::optional<Candidate> chosen;
  for (std::size_t s = 0; s < n_subsets; ++s) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(s * subset_size),
                                 order.begin() + static_cast<std::ptrdiff_t>((s + 1) * subset_size));
    result.subsets.push_back(idx);
    ExplainResult sub;
    try {
      sub = explain(subset_of(batch, idx), config);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateBatch) continue;
      throw;
    }
    Candidate c = score_candidate(sub.best, batch);
    if (!chosen || ranks_before(c, *chosen)) chosen = c;
    result.winners.push_back(std::move(c));
  }
  if (!chosen) throw Error(ErrorCode::DegenerateBatch, "every subset contains a single predicted class");
  result.best = chosen->explanation;
  return result;
}

}  // namespace nlx
