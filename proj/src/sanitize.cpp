#include "softlogic/sanitize.hpp"

#include <cctype>

namespace softlogic {

namespace {

// Everything the surface syntax can legitimately contain, plus a few benign
// punctuation characters translators sometimes leak. Anything else marks the
// form as garbled even if some parser extension were to accept it.
bool charset_ok(const std::string& s) {
  for (unsigned char c : s) {
    if (std::isalnum(c)) continue;
    switch (c) {
      case '_': case '(': case ')': case '.': case ',': case ' ':
      case '<': case '>': case '=': case '!': case '+': case '*':
      case '/': case '&': case '|': case '^': case '\'': case '"':
      case '-':
        continue;
      default:
        return false;
    }
  }
  return true;
}

}  // namespace

SanitizedFactSet sanitize(const Problem& problem) {
  SanitizedFactSet out;
  out.query_ok = problem.query.ok;
  out.facts.reserve(problem.facts.size());
  for (std::size_t i = 0; i < problem.facts.size(); ++i) {
    const FactEntry& fact = problem.facts[i];
    WeightedFact wf;
    wf.index = static_cast<int>(i);
    wf.sentence = fact.sentence;
    bool usable = fact.formula != nullptr && charset_ok(fact.raw_form);
    if (usable) {
      wf.formula = fact.formula;
      wf.weight = 1.0;
    } else {
      wf.formula = Formula::bool_lit(true);
      wf.weight = 0.0;
      wf.placeholder = true;
      ++out.placeholder_count;
    }
    out.facts.push_back(std::move(wf));
  }
  return out;
}

GateDecision gate(const SanitizedFactSet& set) {
  if (set.placeholder_count > 1 || !set.query_ok) return GateDecision::FallbackToCoT;
  return GateDecision::Proceed;
}

}  // namespace softlogic
