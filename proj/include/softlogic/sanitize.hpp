#pragma once

#include <string>
#include <vector>

#include "softlogic/ast.hpp"

namespace softlogic {

// A fact ready for the solver. Placeholders stand in for facts whose surface
// form was rejected: their formula is the tautology BoolVal(True) and their
// weight is pinned to 0 (free to drop, never informative).
struct WeightedFact {
  int index = 0;          // position in Problem.facts
  std::string sentence;
  FormulaPtr formula;
  double weight = 1.0;    // > 0 unless placeholder
  bool placeholder = false;
};

struct SanitizedFactSet {
  std::vector<WeightedFact> facts;  // same length/order as Problem.facts
  int placeholder_count = 0;
  bool query_ok = true;
};

enum class GateDecision { Proceed, FallbackToCoT };

// Replace each malformed fact (parse failure or characters outside the
// accepted set) with a weight-0 placeholder. Never drops or reorders facts.
SanitizedFactSet sanitize(const Problem& problem);

// More than one placeholder, or an unusable query, means the translation is
// too damaged to trust symbolically.
GateDecision gate(const SanitizedFactSet& set);

}  // namespace softlogic
