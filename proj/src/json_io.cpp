#include "nlx/json_io.hpp"

#include <cmath>

#include "nlx/error.hpp"

namespace nlx {

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, "explanation JSON: " + what);
}

Value value_from_json(const json& j) {
  if (j.is_number()) return Value::number(j.get<double>());
  if (j.is_string()) return Value::text(j.get<std::string>());
  bad("condition value must be a number or string");
}

ClauseTree clause_from_json(const json& j) {
  if (!j.is_object()) bad("clause must be an object");
  if (j.contains("op")) {
    const std::string op = j.at("op").get<std::string>();
    BoolOp bop;
    if (op == "AND") {
      bop = BoolOp::And;
    } else if (op == "OR") {
      bop = BoolOp::Or;
    } else {
      bad("unknown op '" + op + "'");
    }
    return ClauseTree::join(bop, clause_from_json(j.at("left")), clause_from_json(j.at("right")));
  }
  const auto cmp = comparator_from_tag(j.at("comparator").get<std::string>());
  if (!cmp) bad("unknown comparator '" + j.at("comparator").get<std::string>() + "'");
  return ClauseTree(Condition{j.at("feature").get<std::string>(), *cmp, value_from_json(j.at("value"))});
}

}  // namespace

json value_to_json(const Value& v) {
  if (v.is_number()) return v.as_number();
  return v.as_text();
}

json clause_to_json(const ClauseTree& clause) {
  if (clause.is_leaf()) {
    const Condition& c = clause.condition();
    return json{{"feature", c.feature},
                {"comparator", std::string(comparator_tag(c.comparator))},
                {"value", value_to_json(c.value)}};
  }
  return json{{"op", std::string(bool_op_keyword(clause.op()))},
              {"left", clause_to_json(clause.left())},
              {"right", clause_to_json(clause.right())}};
}

json explanation_to_json(const Explanation& e) {
  json j;
  j["clause"] = clause_to_json(e.clause);
  j["quantifier"] = e.quantifier ? json(e.quantifier->word()) : json(nullptr);
  j["label"] = e.label;
  j["label_negated"] = e.label_negated;
  j["target_name"] = e.target_name ? json(*e.target_name) : json(nullptr);
  return j;
}

Explanation explanation_from_json(const json& j) {
  try {
    if (!j.is_object()) bad("expected an object");
    std::optional<Quantifier> q;
    if (j.contains("quantifier") && !j.at("quantifier").is_null()) {
      q = Quantifier(j.at("quantifier").get<std::string>());
    }
    std::optional<std::string> target;
    if (j.contains("target_name") && !j.at("target_name").is_null()) {
      target = j.at("target_name").get<std::string>();
    }
    Explanation e{clause_from_json(j.at("clause")), q, j.at("label").get<std::string>(),
                  j.value("label_negated", false), target, false};
    if (e.label.empty() || e.label.rfind("not ", 0) == 0) {
      bad("label must be non-empty and carry negation in label_negated");
    }
    return e;
  } catch (const json::exception& ex) {
    bad(ex.what());
  }
}

json schema_to_json(const FeatureSchema& schema) {
  json features = json::array();
  for (const auto& f : schema.features()) {
    json jf;
    jf["name"] = f.name;
    if (f.is_numeric()) {
      jf["kind"] = "numeric";
      jf["min"] = f.range().min;
      jf["max"] = f.range().max;
    } else {
      jf["kind"] = "categorical";
      jf["domain"] = f.domain().values;
    }
    features.push_back(std::move(jf));
  }
  return json{{"features", std::move(features)}};
}

FeatureSchema schema_from_json(const json& j) {
  try {
    std::vector<FeatureSpec> specs;
    for (const auto& jf : j.at("features")) {
      FeatureSpec f;
      f.name = jf.at("name").get<std::string>();
      const std::string kind = jf.at("kind").get<std::string>();
      if (kind == "numeric") {
        f.kind = NumericRange{jf.at("min").get<double>(), jf.at("max").get<double>()};
      } else if (kind == "categorical") {
        f.kind = CategoricalDomain{jf.at("domain").get<std::vector<std::string>>()};
      } else {
        throw Error(ErrorCode::InvalidArgument, "schema JSON: unknown kind '" + kind + "'");
      }
      specs.push_back(std::move(f));
    }
    return FeatureSchema(std::move(specs));
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidArgument, std::string("schema JSON: ") + ex.what());
  }
}

json example_to_json(const FeatureSchema& schema, const Example& ex) {
  json j = json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) j[schema[i].name] = value_to_json(ex.values.at(i));
  return j;
}

Example example_from_json(const FeatureSchema& schema, const json& j) {
  Example ex;
  ex.values.resize(schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const json& v = j.at(schema[i].name);
    if (schema[i].is_numeric()) {
      ex.values[i] = Value::number(v.is_number() ? v.get<double>()
                                                 : parse_number(v.get<std::string>()).value());
    } else {
      ex.values[i] = Value::text(v.is_string() ? v.get<std::string>() : format_number(v.get<double>()));
    }
  }
  return ex;
}

double round4(double x) { return std::round(x * 1e4) / 1e4; }

json eval_report_to_json(const EvalReport& r) {
  json j;
  j["faithfulness"] = round4(r.faithfulness);
  j["simulatability"] = r.simulatability ? json(round4(*r.simulatability)) : json(nullptr);
  j["coverage"] = round4(r.coverage);
  j["precision"] = round4(r.precision);
  return j;
}

}  // namespace nlx
