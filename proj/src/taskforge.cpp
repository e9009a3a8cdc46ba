#include "nlx/taskforge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nlx/csv.hpp"
#include "nlx/error.hpp"
#include "nlx/json_io.hpp"

namespace nlx {

namespace {

constexpr std::array<std::string_view, 20> kLabelWords = {
    "blicket", "tupa", "fem",  "dax",  "wug",  "toma", "zorb",  "fep",    "glorp",  "snib",
    "kiki",    "bouba", "modi", "lorp", "zav", "niz",  "gazzer", "tulver", "pimwit", "yoff"};

constexpr std::array<std::string_view, 30> kValueWords = {
    "antartica", "africas", "asias", "europes", "oceanias", "americas", "red",    "blue",
    "green",     "amber",   "violet", "north",  "south",    "east",     "west",   "low",
    "mid",       "high",    "alpha",  "beta",   "gamma",    "delta",    "yes",    "no",
    "maybe",     "solid",   "liquid", "vapor",  "round",    "square"};

// Four-letter words the parser treats as keywords.
const std::set<std::string> kReservedNames = {"then", "less"};

std::string_view conjunction_name(Conjunction c) {
  switch (c) {
    case Conjunction::None: return "none";
    case Conjunction::Simple: return "simple";
    case Conjunction::Nested: return "nested";
  }
  return "none";
}

std::string_view negation_name(Negation n) {
  switch (n) {
    case Negation::None: return "none";
    case Negation::Clause: return "clause";
    case Negation::Label: return "label";
    case Negation::ClauseAndLabel: return "clause+label";
  }
  return "none";
}

Condition sample_condition(const FeatureSpec& f, bool negated, Rng& rng) {
  Condition c;
  c.feature = f.name;
  if (!f.is_numeric()) {
    const auto& values = f.domain().values;
    c.value = Value::text(values[rng.below(values.size())]);
    c.comparator = negated ? Comparator::Neq : Comparator::Eq;
    return c;
  }
  const double lo = f.range().min;
  const double span = f.range().max - lo;
  const auto t_lo = static_cast<std::int64_t>(std::ceil(lo + 0.1 * span));
  const auto t_hi = static_cast<std::int64_t>(std::floor(lo + 0.9 * span));
  c.value = Value::number(static_cast<double>(rng.between(t_lo, std::max(t_lo, t_hi))));
  static constexpr std::array<Comparator, 4> kPlain = {Comparator::Gt, Comparator::Lt,
                                                       Comparator::Geq, Comparator::Leq};
  static constexpr std::array<Comparator, 2> kNegated = {Comparator::Ngt, Comparator::Nlt};
  c.comparator = negated ? kNegated[rng.below(kNegated.size())] : kPlain[rng.below(kPlain.size())];
  return c;
}

Explanation sample_explanation_with(const ComplexityDescriptor& d, const FeatureSchema& schema,
                                    Rng& rng) {
  const std::size_t k = d.num_conditions();
  if (schema.size() < k) {
    throw Error(ErrorCode::SchemaTooSmall, "descriptor needs " + std::to_string(k) +
                                               " features, schema has " +
                                               std::to_string(schema.size()));
  }
  const std::vector<std::size_t> features = rng.sample_indices(schema.size(), k);

  std::vector<bool> negated(k, false);
  if (d.clause_negated()) {
    bool any = false;
    for (std::size_t i = 0; i < k; ++i) {
      negated[i] = rng.bernoulli(0.5);
      any = any || negated[i];
    }
    if (!any) negated[rng.below(k)] = true;
  }

  ClauseTree clause = sample_condition(schema[features[0]], negated[0], rng);
  const BoolOp first = rng.bernoulli(0.5) ? BoolOp::And : BoolOp::Or;
  if (k >= 2) clause = ClauseTree::join(first, clause, sample_condition(schema[features[1]], negated[1], rng));
  if (k == 3) {
    const BoolOp second = first == BoolOp::And ? BoolOp::Or : BoolOp::And;
    clause = ClauseTree::join(second, clause, sample_condition(schema[features[2]], negated[2], rng));
  }

  std::optional<Quantifier> quantifier;
  if (d.quantifier) {
    quantifier = Quantifier(kQuantifierTable[rng.below(kQuantifierTable.size())].word);
  }
  const std::string label(kLabelWords[rng.below(kLabelWords.size())]);
  return Explanation{std::move(clause), quantifier, label, d.label_negated(), std::nullopt, false};
}

LabeledBatch make_batch(const FeatureSchema& schema, std::vector<Example> examples,
                        std::vector<std::string> labels, LabelKind kind, const std::string& label) {
  LabeledBatch b;
  b.schema = schema;
  b.examples = std::move(examples);
  b.labels = std::move(labels);
  b.label_kind = kind;
  b.label_of_interest = label;
  return b;
}

// Samples train/test for one attempt; returns false when train is unbalanced.
bool try_fill(SyntheticTask& task, std::size_t n_train, std::size_t n_test, std::uint64_t seed,
              std::uint64_t attempt) {
  Rng examples_rng = Rng::derive(seed, Stream::Examples, attempt);
  Rng noise_rng = Rng::derive(seed, Stream::Noise, attempt);
  auto train_x = sample_examples(task.schema, n_train, examples_rng);
  auto train_y = label_examples(task.planted, task.schema, train_x, noise_rng);
  task.train = make_batch(task.schema, std::move(train_x), std::move(train_y),
                          LabelKind::Predicted, task.planted.label);
  if (min_class_fraction(task.train) < kMinClassFraction) return false;
  auto test_x = sample_examples(task.schema, n_test, examples_rng);
  auto test_y = label_examples(task.planted, task.schema, test_x, noise_rng);
  task.test = make_batch(task.schema, std::move(test_x), std::move(test_y), LabelKind::Gold,
                         task.planted.label);
  return true;
}

void check_sizes(std::size_t n_train) {
  if (n_train < 10) throw Error(ErrorCode::InvalidArgument, "n_train must be at least 10");
}

LabeledBatch batch_from_csv(const CsvTable& table, const FeatureSchema& schema, LabelKind kind,
                            const std::string& label_of_interest) {
  std::vector<std::string> expected = schema.names();
  expected.emplace_back("label");
  if (table.header != expected) {
    throw MalformedCsvError(1, "header does not match the task schema");
  }
  LabeledBatch b;
  b.schema = schema;
  b.label_kind = kind;
  b.label_of_interest = label_of_interest;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Example ex;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].is_numeric()) {
        const auto x = parse_number(row[i]);
        if (!x) throw MalformedCsvError(table.row_lines[r], "'" + row[i] + "' is not a number");
        ex.values.push_back(Value::number(*x));
      } else {
        ex.values.push_back(Value::text(row[i]));
      }
    }
    b.examples.push_back(std::move(ex));
    b.labels.push_back(row.back());
  }
  return b;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::array<ComplexityDescriptor, 24> all_descriptors() {
  std::array<ComplexityDescriptor, 24> out{};
  std::size_t i = 0;
  for (bool q : {false, true}) {
    for (Conjunction c : {Conjunction::None, Conjunction::Simple, Conjunction::Nested}) {
      for (Negation n : {Negation::None, Negation::Clause, Negation::Label, Negation::ClauseAndLabel}) {
        out[i++] = ComplexityDescriptor{q, c, n};
      }
    }
  }
  return out;
}

std::string descriptor_name(const ComplexityDescriptor& d) {
  return std::string(d.quantifier ? "quant" : "plain") + "-" +
         std::string(conjunction_name(d.conjunction)) + "-" + std::string(negation_name(d.negation));
}

ComplexityDescriptor descriptor_from_name(std::string_view name) {
  for (const auto& d : all_descriptors()) {
    if (descriptor_name(d) == name) return d;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown complexity descriptor '" + std::string(name) + "'");
}

ComplexityDescriptor describe(const Explanation& e) {
  ComplexityDescriptor d;
  d.quantifier = e.quantifier.has_value();
  const std::size_t n = e.clause.size();
  d.conjunction = n == 1 ? Conjunction::None : n == 2 ? Conjunction::Simple : Conjunction::Nested;
  bool clause_neg = false;
  e.clause.for_each_condition([&](const Condition& c) { clause_neg = clause_neg || is_negated(c.comparator); });
  if (clause_neg && e.label_negated) {
    d.negation = Negation::ClauseAndLabel;
  } else if (clause_neg) {
    d.negation = Negation::Clause;
  } else if (e.label_negated) {
    d.negation = Negation::Label;
  }
  return d;
}

FeatureSchema sample_schema(std::size_t num_features, std::uint64_t seed) {
  if (num_features == 0) throw Error(ErrorCode::InvalidArgument, "num_features must be at least 1");
  Rng rng = Rng::derive(seed, Stream::Schema);
  std::set<std::string> used;
  std::vector<bool> numeric(num_features);
  for (std::size_t i = 0; i < num_features; ++i) numeric[i] = rng.bernoulli(0.5);
  if (num_features >= 2 && std::all_of(numeric.begin(), numeric.end(), [&](bool b) { return b == numeric[0]; })) {
    numeric[rng.below(num_features)] = !numeric[0];
  }

  std::vector<FeatureSpec> specs;
  for (std::size_t i = 0; i < num_features; ++i) {
    std::string name;
    do {
      name.clear();
      for (int k = 0; k < 4; ++k) name.push_back(static_cast<char>('a' + rng.below(26)));
    } while (used.count(name) || kReservedNames.count(name));
    used.insert(name);

    FeatureSpec f;
    f.name = name;
    if (numeric[i]) {
      const auto lo = static_cast<double>(rng.between(0, 1000));
      const auto span = static_cast<double>(rng.between(20, 1000));
      f.kind = NumericRange{lo, lo + span};
    } else {
      const auto size = static_cast<std::size_t>(rng.between(2, 5));
      CategoricalDomain dom;
      for (std::size_t idx : rng.sample_indices(kValueWords.size(), size)) {
        dom.values.emplace_back(kValueWords[idx]);
      }
      f.kind = std::move(dom);
    }
    specs.push_back(std::move(f));
  }
  return FeatureSchema(std::move(specs));
}

Explanation sample_explanation(const ComplexityDescriptor& d, const FeatureSchema& schema,
                               std::uint64_t seed) {
  Rng rng = Rng::derive(seed, Stream::Explanation, 0);
  return sample_explanation_with(d, schema, rng);
}

std::vector<Example> sample_examples(const FeatureSchema& schema, std::size_t n, Rng& rng) {
  std::vector<Example> out(n);
  for (auto& ex : out) {
    ex.values.reserve(schema.size());
    for (const auto& f : schema.features()) {
      if (f.is_numeric()) {
        ex.values.push_back(Value::number(static_cast<double>(
            rng.between(static_cast<std::int64_t>(std::ceil(f.range().min)),
                        static_cast<std::int64_t>(std::floor(f.range().max))))));
      } else {
        const auto& values = f.domain().values;
        ex.values.push_back(Value::text(values[rng.below(values.size())]));
      }
    }
  }
  return out;
}

std::vector<std::string> label_examples(const Explanation& planted, const FeatureSchema& schema,
                                        const std::vector<Example>& examples, Rng& noise) {
  std::vector<bool> interest(examples.size());
  std::vector<std::size_t> clause_true;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const bool applies = clause_holds(planted.clause, schema, examples[i]);
    interest[i] = predicts_interest(planted, applies);
    if (applies) clause_true.push_back(i);
  }
  if (planted.quantifier && !clause_true.empty()) {
    const double c = planted.quantifier->confidence();
    const double flip_rate = std::min(c, 1.0 - c);
    const auto n_flip = static_cast<std::size_t>(
        std::llround(static_cast<double>(clause_true.size()) * flip_rate));
    for (std::size_t pick : noise.sample_indices(clause_true.size(), n_flip)) {
      interest[clause_true[pick]] = !interest[clause_true[pick]];
    }
  }
  std::vector<std::string> labels;
  labels.reserve(examples.size());
  for (bool b : interest) labels.push_back(b ? planted.label : negate_label(planted.label));
  return labels;
}

double min_class_fraction(const LabeledBatch& batch) {
  if (batch.labels.empty()) return 0.0;
  const auto hits = static_cast<double>(
      std::count(batch.labels.begin(), batch.labels.end(), batch.label_of_interest));
  const auto n = static_cast<double>(batch.labels.size());
  return std::min(hits, n - hits) / n;
}

SyntheticTask generate_task(const ComplexityDescriptor& d, std::size_t num_features,
                            std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  check_sizes(n_train);
  SyntheticTask task;
  task.schema = sample_schema(num_features, seed);
  task.descriptor = d;
  task.seed = seed;
  for (int attempt = 0; attempt < kMaxBalanceAttempts; ++attempt) {
    Rng rng = Rng::derive(seed, Stream::Explanation, static_cast<std::uint64_t>(attempt));
    task.planted = sample_explanation_with(d, task.schema, rng);
    if (try_fill(task, n_train, n_test, seed, static_cast<std::uint64_t>(attempt))) return task;
  }
  throw Error(ErrorCode::BalanceUnreachable,
              "no balanced train split for " + descriptor_name(d) + " after " +
                  std::to_string(kMaxBalanceAttempts) + " attempts");
}

SyntheticTask generate_task_for(const FeatureSchema& schema, const Explanation& planted,
                                std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  check_sizes(n_train);
  SyntheticTask task;
  task.schema = schema;
  task.planted = planted;
  task.descriptor = describe(planted);
  task.seed = seed;
  for (int attempt = 0; attempt < kMaxBalanceAttempts; ++attempt) {
    if (try_fill(task, n_train, n_test, seed, static_cast<std::uint64_t>(attempt))) return task;
  }
  throw Error(ErrorCode::BalanceUnreachable, "planted explanation '" + render(planted) +
                                                 "' never yields a balanced train split");
}

LabeledBatch binarize(const LabeledBatch& batch, std::string_view label_of_interest) {
  if (std::find(batch.labels.begin(), batch.labels.end(), label_of_interest) == batch.labels.end()) {
    throw Error(ErrorCode::LabelAbsent, "label '" + std::string(label_of_interest) +
                                            "' does not occur in the batch");
  }
  LabeledBatch out = batch;
  out.label_of_interest = std::string(label_of_interest);
  for (auto& y : out.labels) {
    if (y != label_of_interest) y = negate_label(label_of_interest);
  }
  return out;
}

std::string linearize(const LabeledBatch& batch) {
  std::string out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t f = 0; f < batch.schema.size(); ++f) {
      out += batch.schema[f].name;
      out += ": ";
      out += batch.examples[i].values.at(f).to_string();
      out += " | ";
    }
    out += "label: ";
    out += batch.labels[i];
    out += '\n';
  }
  out += "explanation:";
  return out;
}

LabeledBatch delinearize(std::string_view text, const FeatureSchema& schema, LabelKind kind,
                         std::string_view label_of_interest) {
  LabeledBatch b;
  b.schema = schema;
  b.label_kind = kind;
  b.label_of_interest = std::string(label_of_interest);

  auto fail = [](std::size_t line, const std::string& what) {
    throw Error(ErrorCode::Parse, "linearized batch line " + std::to_string(line) + ": " + what);
  };
  auto split_pair = [&](std::string_view part, std::size_t line) {
    const auto colon = part.find(": ");
    if (colon == std::string_view::npos) fail(line, "expected 'name: value'");
    return std::pair{part.substr(0, colon), part.substr(colon + 2)};
  };

  std::size_t line_no = 0;
  bool terminated = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (terminated) fail(line_no, "text after 'explanation:'");
    if (line == "explanation:") {
      terminated = true;
      continue;
    }
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      const auto bar = line.find(" | ", start);
      parts.push_back(line.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
      if (bar == std::string_view::npos) break;
      start = bar + 3;
    }
    if (parts.size() != schema.size() + 1) fail(line_no, "wrong number of fields");
    Example ex;
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const auto [name, value] = split_pair(parts[f], line_no);
      if (name != schema[f].name) fail(line_no, "expected feature '" + schema[f].name + "'");
      if (schema[f].is_numeric()) {
        const auto x = parse_number(value);
        if (!x) fail(line_no, "'" + std::string(value) + "' is not a number");
        ex.values.push_back(Value::number(*x));
      } else {
        ex.values.push_back(Value::text(std::string(value)));
      }
    }
    const auto [name, label] = split_pair(parts.back(), line_no);
    if (name != "label") fail(line_no, "expected 'label'");
    b.examples.push_back(std::move(ex));
    b.labels.emplace_back(label);
  }
  if (!terminated) fail(line_no, "missing terminal 'explanation:' line");
  return b;
}

void write_batch_csv(const LabeledBatch& batch, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  std::vector<std::string> header = batch.schema.names();
  header.emplace_back("label");
  write_csv_row(out, header);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::vector<std::string> row;
    for (const auto& v : batch.examples[i].values) row.push_back(v.to_string());
    row.push_back(batch.labels[i]);
    write_csv_row(out, row);
  }
}

void write_task_bundle(const SyntheticTask& task, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
  write_text(dir / "schema.json", schema_to_json(task.schema).dump(2) + "\n");
  write_text(dir / "planted.txt", render(task.planted) + "\n");
  write_batch_csv(task.train, dir / "train.csv");
  write_batch_csv(task.test, dir / "test.csv");
  json meta;
  meta["descriptor"] = descriptor_name(task.descriptor);
  meta["quantifier"] = task.descriptor.quantifier;
  meta["conjunction"] = std::string(conjunction_name(task.descriptor.conjunction));
  meta["negation"] = std::string(negation_name(task.descriptor.negation));
  meta["seed"] = task.seed;
  meta["label_of_interest"] = task.planted.label;
  meta["n_train"] = task.train.size();
  meta["n_test"] = task.test.size();
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

SyntheticTask read_task_bundle(const std::filesystem::path& dir) {
  SyntheticTask task;
  try {
    task.schema = schema_from_json(json::parse(read_text(dir / "schema.json")));
    const json meta = json::parse(read_text(dir / "meta.json"));
    task.descriptor = descriptor_from_name(meta.at("descriptor").get<std::string>());
    task.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidArgument, "task bundle '" + dir.string() + "': " + ex.what());
  }
  std::string planted = read_text(dir / "planted.txt");
  while (!planted.empty() && (planted.back() == '\n' || planted.back() == '\r')) planted.pop_back();
  task.planted = parse(planted);
  const std::string& label = task.planted.label;
  task.train = batch_from_csv(read_csv_file((dir / "train.csv").string()), task.schema,
                              LabelKind::Predicted, label);
  task.test = batch_from_csv(read_csv_file((dir / "test.csv").string()), task.schema,
                             LabelKind::Gold, label);
  return task;
}

}  // namespace nlx
