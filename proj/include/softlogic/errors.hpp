#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace softlogic {

// Base for everything this library throws on contract violations.
// Expected outcomes (Unsat, Unknown, fallback verdicts, missing chains)
// are ordinary return values, not exceptions.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Rejected surface text. `column` is 1-based over the input string.
struct ParseError : Error {
  std::size_t column;
  ParseError(std::size_t col, const std::string& msg)
      : Error("parse error at column " + std::to_string(col) + ": " + msg),
        column(col) {}
};

// One predicate used both as a truth-valued atom and inside arithmetic.
struct SortConflict : Error {
  explicit SortConflict(const std::string& pred)
      : Error("predicate '" + pred + "' used with both boolean and numeric sort") {}
};

// A numeric atom ended up with no candidate values.
struct DomainEmpty : Error {
  explicit DomainEmpty(const std::string& atom)
      : Error("empty domain for numeric atom " + atom) {}
};

// Solver search exceeded its node budget. Callers treat this as "give up
// and fall back", never as Unsat.
struct BudgetExceeded : Error {
  BudgetExceeded() : Error("solver node budget exceeded") {}
};

// Internal consistency failure (e.g. a query and its negation both unsat
// against a satisfiable theory).
struct InvariantViolation : Error {
  explicit InvariantViolation(const std::string& msg)
      : Error("invariant violation: " + msg) {}
};

// evaluate() was handed a model that lacks an atom the formula mentions.
struct MissingAtom : Error {
  explicit MissingAtom(const std::string& atom)
      : Error("model does not assign atom " + atom) {}
};

// Side (injected) constraints alone are unsatisfiable; the problem is
// malformed rather than merely inconsistent.
struct SideUnsat : Error {
  SideUnsat() : Error("side constraints are unsatisfiable on their own") {}
};

struct EmptyTrace : Error {
  EmptyTrace() : Error("token trace is empty") {}
};

// Anything that went wrong talking to (or replaying) the language model.
struct GatewayError : Error {
  explicit GatewayError(const std::string& msg) : Error("gateway: " + msg) {}
};

struct NetworkError : GatewayError {
  explicit NetworkError(const std::string& msg) : GatewayError("network: " + msg) {}
};

struct FixtureMissing : GatewayError {
  explicit FixtureMissing(const std::string& key)
      : GatewayError("no fixture recorded for request key " + key) {}
};

struct MalformedEnvelope : GatewayError {
  std::string raw;  // offending model output, preserved for debugging
  explicit MalformedEnvelope(const std::string& msg, std::string raw_text)
      : GatewayError("malformed envelope: " + msg), raw(std::move(raw_text)) {}
};

// Bad line in a normalized dataset file.
struct SchemaError : Error {
  std::size_t line;
  SchemaError(std::size_t ln, const std::string& msg)
      : Error("dataset line " + std::to_string(ln) + ": " + msg), line(ln) {}
};

// Chi-square over a table with an empty marginal is undefined.
struct DegenerateMarginal : Error {
  DegenerateMarginal() : Error("contingency table has an empty marginal") {}
};

// Perturbation asked to remove more premises than the problem has.
struct TooFewPremises : Error {
  TooFewPremises(std::size_t have, std::size_t want)
      : Error("cannot perturb " + std::to_string(want) + " premises, problem has " +
              std::to_string(have)) {}
};

}  // namespace softlogic
