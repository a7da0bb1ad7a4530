#pragma once

// Canned problem envelopes plus a helper that runs parse -> sanitize ->
// ground and wires a solver over the result. Shared by the test binaries;
// doctest-free so the acceptance runner can use it too.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "softlogic/ground.hpp"
#include "softlogic/parser.hpp"
#include "softlogic/sanitize.hpp"
#include "softlogic/soft.hpp"
#include "softlogic/solver.hpp"

namespace fixtures {

// Ontology chain: membership propagates Fae down to "not Opaque".
inline constexpr const char* kFaeEnvelope = R"json({
  "objects": ["Fae"],
  "facts": [
    "forall x. Jompus(x) -> Large(x)",
    "forall x. Jompus(x) -> Zumpus(x)",
    "forall x. Zumpus(x) -> Sweet(x)",
    "forall x. Zumpus(x) -> Numpus(x)",
    "forall x. Numpus(x) -> Hot(x)",
    "forall x. Tumpus(x) -> Opaque(x)",
    "forall x. Numpus(x) -> Yumpus(x)",
    "forall x. (Modern(x) and Building(x)) -> (Made_of_concrete(x) or Made_of_steel(x))",
    "forall x. Yumpus(x) -> Brown(x)",
    "forall x. Yumpus(x) -> Wumpus(x)",
    "forall x. Wumpus(x) -> not Opaque(x)",
    "forall x. Wumpus(x) -> Impus(x)",
    "Jompus(Fae)"
  ],
  "query": ["Opaque(Fae)"]
})json";

// Five-bird ordering puzzle with a uniquely pinned permutation.
inline constexpr const char* kRavenEnvelope = R"json({
  "objects": ["cardinal", "robin", "blue_jay", "quail", "raven"],
  "facts": [
    "Pos(robin) > Pos(raven)",
    "Pos(cardinal) = 1",
    "Pos(raven) > Pos(blue_jay)",
    "Pos(blue_jay) = 3"
  ],
  "query": ["Pos(cardinal) = 4", "Pos(robin) = 4", "Pos(blue_jay) = 4",
            "Pos(quail) = 4", "Pos(raven) = 4"],
  "larger_direction": "right"
})json";

struct Fixture {
  softlogic::Problem problem;
  softlogic::SanitizedFactSet sanitized;
  // Heap-allocated so addresses stay put: the solver keeps a pointer to the
  // grounding's atom table.
  std::unique_ptr<softlogic::Grounding> owned;
  std::unique_ptr<softlogic::Solver> solver_ptr;

  softlogic::Grounding& grounding() { return *owned; }
  softlogic::Solver& solver() { return *solver_ptr; }
};

// Parse, sanitize, ground, and load every constraint into a fresh solver.
// `traces` (when given) re-weights the facts before grounding.
inline Fixture make_fixture(const std::string& envelope,
                            softlogic::SolverConfig config = {},
                            const std::vector<softlogic::TokenTrace>& traces = {}) {
  Fixture fx;
  fx.problem = softlogic::parse_problem_text(envelope);
  fx.sanitized = softlogic::sanitize(fx.problem);
  if (softlogic::gate(fx.sanitized) != softlogic::GateDecision::Proceed)
    throw std::runtime_error("fixture envelope failed the sanitize gate");
  if (!traces.empty()) softlogic::apply_trace_weights(fx.sanitized, traces);
  fx.owned = std::make_unique<softlogic::Grounding>(
      softlogic::ground(fx.problem, fx.sanitized, config));
  fx.solver_ptr = std::make_unique<softlogic::Solver>(fx.owned->table, config);
  for (const auto& c : fx.owned->facts) fx.solver_ptr->add(c.formula);
  for (const auto& c : fx.owned->side) fx.solver_ptr->add(c.formula);
  return fx;
}

}  // namespace fixtures
