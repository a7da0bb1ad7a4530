#pragma once

#include <string>

#include "nlohmann/json.hpp"
#include "softlogic/ast.hpp"
#include "softlogic/errors.hpp"

namespace softlogic {

// Parse one logical form in surface syntax. Keywords (not/and/or/forall/
// exist/exists/BoolVal/True/False) are case-insensitive; predicate and object
// names are case-sensitive. Atoms are canonicalized on the way in
// (extra arguments folded into the predicate name). Throws ParseError.
FormulaPtr parse_formula_text(const std::string& text);

// Assemble a Problem from a translation envelope:
//   {"objects": [...], "facts": [form | [sentence, form], ...],
//    "query": form | {"A": form, ...}, "larger_direction"?: "left"|"right"}
// Facts that fail to parse are retained with their issue recorded; a query
// that fails to parse leaves query.ok == false. Throws MalformedEnvelope only
// for structural problems (bad JSON shape, missing keys, non-string fields).
Problem parse_problem(const nlohmann::json& envelope);

// Convenience: parse the envelope from text first.
Problem parse_problem_text(const std::string& envelope_json);

}  // namespace softlogic
