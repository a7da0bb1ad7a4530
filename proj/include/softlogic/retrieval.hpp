#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "softlogic/gateway.hpp"
#include "softlogic/solver.hpp"

namespace softlogic {

// One hypothetical ground assignment, a = v.
struct Assignment {
  bool is_boolean = true;
  int atom = 0;               // index into the table's boolean or numeric list
  bool bool_value = false;
  std::int64_t num_value = 0;

  FormulaPtr formula(const GroundAtomTable& table) const;
  FormulaPtr negation(const GroundAtomTable& table) const;
  // Surface text, e.g. "Rough(Gary)", "not Small(Alex)", "Pos(raven) = 4".
  std::string text(const GroundAtomTable& table) const;
};

bool operator==(const Assignment& a, const Assignment& b);

struct Discriminator {
  Assignment assignment;
  std::string label;  // the single candidate left satisfiable
};

struct RetrievalOutcome {
  enum class Status { Resolved, Declined };
  Status status = Status::Declined;
  std::string label;              // Resolved only
  std::optional<Discriminator> used;
  std::vector<Assignment> chain;  // strengthening chain, original first
};

// The solver passed to these functions must hold the restored theory
// (side constraints plus the kept facts) as its permanent constraints.

// Scan assignments in canonical order (boolean atoms in table order with
// false before true, then numeric atoms with domains ascending). Keep those
// that are consistent with the theory, not entailed by it, and leave exactly
// one candidate satisfiable.
std::vector<Discriminator> find_discriminators(
    const Solver& solver,
    const std::vector<std::pair<std::string, FormulaPtr>>& candidates);

// Replace `a` by stronger assignments while some consistent a' entails it
// (theory + a' + not-a unsatisfiable), taking the first candidate in
// canonical order each round and never revisiting an accepted assignment.
// When `preserve_label` is given, a replacement must also keep exactly that
// candidate satisfiable (strengthening must not lose the discrimination).
// Returns the final assignment; `chain` receives the accepted assignments in
// discovery order, the original first.
Assignment strengthen(const Solver& solver, const Assignment& a,
                      const std::vector<std::pair<std::string, FormulaPtr>>& candidates,
                      const std::optional<std::string>& preserve_label,
                      std::vector<Assignment>& chain);

// Full resolution step: first discriminator, strengthen it, ask the gateway
// to confirm the strengthened premise against the original text. Gateway
// absence, errors, and denials all yield Declined — the caller's verdict
// then stands unchanged.
RetrievalOutcome resolve(const Solver& solver,
                         const std::vector<std::pair<std::string, FormulaPtr>>& candidates,
                         const std::string& context, const std::string& question,
                         Gateway* gateway);

}  // namespace softlogic
