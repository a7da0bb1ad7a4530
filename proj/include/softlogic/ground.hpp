#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "softlogic/ast.hpp"
#include "softlogic/config.hpp"
#include "softlogic/errors.hpp"
#include "softlogic/sanitize.hpp"

namespace softlogic {

struct GroundAtom {
  std::string name;
  std::string arg;  // empty for nullary
  std::string text() const { return name + "(" + arg + ")"; }
};

inline bool operator==(const GroundAtom& a, const GroundAtom& b) {
  return a.name == b.name && a.arg == b.arg;
}

// Every ground atom the problem can mention, in first-occurrence order
// (facts first, then query). Canonical atom order — used for least-model
// selection and discriminator scans — is all booleans, then all numerics.
struct GroundAtomTable {
  std::vector<GroundAtom> booleans;
  std::vector<GroundAtom> numerics;
  std::vector<std::vector<std::int64_t>> domains;  // aligned with numerics, ascending

  int boolean_index(const GroundAtom& a) const;
  int numeric_index(const GroundAtom& a) const;

  // internal lookup, built incrementally
  std::unordered_map<std::string, int> bool_ids;
  std::unordered_map<std::string, int> num_ids;
};

// One quantifier-free constraint. origin >= 0 is the index of the fact it came
// from; kSideOrigin marks injected side constraints (ordering distinctness).
struct GroundConstraint {
  FormulaPtr formula;
  int origin = 0;
};

inline constexpr int kSideOrigin = -1;

struct Grounding {
  GroundAtomTable table;
  std::vector<GroundConstraint> facts;  // aligned with SanitizedFactSet.facts
  std::vector<GroundConstraint> side;
  // Grounded query material (whichever applies):
  FormulaPtr query;  // Boolean
  std::vector<std::pair<std::string, FormulaPtr>> candidates;  // Candidates
  int numeric_target = -1;  // FreeNumeric: index into table.numerics
};

// Expand quantifiers over the object list (forall -> conjunction, exists ->
// disjunction; empty domains give the neutral truth value) and substitute the
// bound variable into atoms.
FormulaPtr ground_formula(const FormulaPtr& f, const std::vector<std::string>& objects);

// Build the full grounding: expand every sanitized fact and the query, assign
// atom indices, derive numeric domains (Pos atoms get 1..n plus pairwise
// distinctness side constraints; other numeric atoms get the problem's
// constants closed under one arithmetic step, clamped), and validate.
// Throws SortConflict, DomainEmpty, SideUnsat.
Grounding ground(const Problem& problem, const SanitizedFactSet& sanitized,
                 const SolverConfig& config);

}  // namespace softlogic
