#pragma once

// JSON forms shared by reports, task bundles and the oracle protocol.

#include <json.hpp>

#include "nlx/executor.hpp"
#include "nlx/explang.hpp"

namespace nlx {

using json = nlohmann::ordered_json;

// {"clause": {...}, "quantifier": word|null, "label": text,
//  "label_negated": bool, "target_name": text|null}
json explanation_to_json(const Explanation& e);
json clause_to_json(const ClauseTree& clause);
// Throws InvalidArgument on schema violations.
Explanation explanation_from_json(const json& j);

json schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const json& j);

json value_to_json(const Value& v);
json example_to_json(const FeatureSchema& schema, const Example& ex);
Example example_from_json(const FeatureSchema& schema, const json& j);

// Metric values rounded to four decimal places.
double round4(double x);
json eval_report_to_json(const EvalReport& r);

}  // namespace nlx
