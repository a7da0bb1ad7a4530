#include "softlogic/retrieval.hpp"

#include <algorithm>

namespace softlogic {

FormulaPtr Assignment::formula(const GroundAtomTable& table) const {
  return is_boolean ? bool_assign(table, atom, bool_value)
                    : num_assign(table, atom, num_value, true);
}

FormulaPtr Assignment::negation(const GroundAtomTable& table) const {
  return is_boolean ? bool_assign(table, atom, !bool_value)
                    : num_assign(table, atom, num_value, false);
}

std::string Assignment::text(const GroundAtomTable& table) const {
  if (is_boolean) {
    const GroundAtom& ga = table.booleans[atom];
    return bool_value ? ga.text() : "not " + ga.text();
  }
  const GroundAtom& ga = table.numerics[atom];
  return ga.text() + " = " + std::to_string(num_value);
}

bool operator==(const Assignment& a, const Assignment& b) {
  if (a.is_boolean != b.is_boolean || a.atom != b.atom) return false;
  return a.is_boolean ? a.bool_value == b.bool_value : a.num_value == b.num_value;
}

namespace {

// Enumerate assignments in canonical order, calling fn until it returns true.
template <typename Fn>
void scan_assignments(const GroundAtomTable& table, Fn&& fn) {
  for (std::size_t i = 0; i < table.booleans.size(); ++i) {
    for (int v = 0; v <= 1; ++v) {
      Assignment a{true, static_cast<int>(i), v == 1, 0};
      if (fn(a)) return;
    }
  }
  for (std::size_t i = 0; i < table.numerics.size(); ++i) {
    for (std::int64_t v : table.domains[i]) {
      Assignment a{false, static_cast<int>(i), false, v};
      if (fn(a)) return;
    }
  }
}

// Exactly one candidate satisfiable together with `fixed`? Returns its label.
std::optional<std::string> unique_candidate(
    const Solver& solver, const std::vector<FormulaPtr>& fixed,
    const std::vector<std::pair<std::string, FormulaPtr>>& candidates) {
  std::optional<std::string> hit;
  for (const auto& [label, f] : candidates) {
    std::vector<FormulaPtr> extra = fixed;
    extra.push_back(f);
    if (solver.check(extra).sat) {
      if (hit) return std::nullopt;  // second one: not unique
      hit = label;
    }
  }
  return hit;
}

}  // namespace

std::vector<Discriminator> find_discriminators(
    const Solver& solver,
    const std::vector<std::pair<std::string, FormulaPtr>>& candidates) {
  const GroundAtomTable& table = solver.table();
  std::vector<Discriminator> out;
  scan_assignments(table, [&](const Assignment& a) {
    FormulaPtr fa = a.formula(table);
    if (!solver.check({fa}).sat) return false;              // inconsistent with theory
    if (!solver.check({a.negation(table)}).sat) return false;  // already entailed
    if (auto label = unique_candidate(solver, {fa}, candidates))
      out.push_back({a, *label});
    return false;  // keep scanning
  });
  return out;
}

Assignment strengthen(const Solver& solver, const Assignment& a,
                      const std::vector<std::pair<std::string, FormulaPtr>>& candidates,
                      const std::optional<std::string>& preserve_label,
                      std::vector<Assignment>& chain) {
  const GroundAtomTable& table = solver.table();
  Assignment current = a;
  std::vector<Assignment> visited{a};
  chain = {a};
  for (;;) {
    bool advanced = false;
    scan_assignments(table, [&](const Assignment& cand) {
      if (std::find(visited.begin(), visited.end(), cand) != visited.end()) return false;
      FormulaPtr fc = cand.formula(table);
      if (!solver.check({fc}).sat) return false;  // a' must be consistent
      if (!solver.check({fc, current.formula(table)}).sat) return false;
      if (solver.check({fc, current.negation(table)}).sat) return false;  // must entail
      if (preserve_label) {
        auto label = unique_candidate(solver, {fc}, candidates);
        if (!label || *label != *preserve_label) return false;
      }
      current = cand;
      visited.push_back(cand);
      chain.push_back(cand);
      advanced = true;
      return true;  // restart the scan from the new assignment
    });
    if (!advanced) return current;
  }
}

RetrievalOutcome resolve(const Solver& solver,
                         const std::vector<std::pair<std::string, FormulaPtr>>& candidates,
                         const std::string& context, const std::string& question,
                         Gateway* gateway) {
  RetrievalOutcome out;
  std::vector<Discriminator> discs = find_discriminators(solver, candidates);
  if (discs.empty()) return out;  // nothing separates the candidates: Declined

  const Discriminator& first = discs.front();
  out.used = first;
  Assignment final_a =
      strengthen(solver, first.assignment, candidates, first.label, out.chain);

  // soundness re-check: the final assignment must still isolate the label
  {
    const GroundAtomTable& table = solver.table();
    auto label = unique_candidate(solver, {final_a.formula(table)}, candidates);
    if (!label || *label != first.label)
      throw InvariantViolation("strengthened assignment lost its discrimination");
  }

  if (!gateway) return out;  // no model available: Declined
  bool confirmed = false;
  try {
    confirmed = gateway->verify_premise(final_a.text(solver.table()), context, question);
  } catch (const GatewayError&) {
    return out;  // unavailable: Declined
  }
  if (!confirmed) return out;
  out.status = RetrievalOutcome::Status::Resolved;
  out.label = first.label;
  return out;
}

}  // namespace softlogic
