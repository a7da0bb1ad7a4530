#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "softlogic/ground.hpp"
#include "softlogic/soft.hpp"
#include "softlogic/solver.hpp"

namespace softlogic {

// A signed ground literal: a boolean atom with a truth value, or one numeric
// atom bound (=) or barred (!=) from a single constant.
struct Property {
  bool is_boolean = true;
  int atom = 0;       // index into the table's boolean or numeric list
  bool truth = true;  // boolean sign
  bool equal = true;  // numeric: = vs !=
  std::int64_t value = 0;

  FormulaPtr formula(const GroundAtomTable& table) const;
  // "Rough(Gary)", "not Small(Alex)", "Pos(raven) = 4", "Pos(raven) != 2".
  std::string text(const GroundAtomTable& table) const;
};

bool operator==(const Property& a, const Property& b);

Property bool_property(int atom, bool truth);
Property num_property(int atom, std::int64_t value, bool equal = true);

// One clause kept in its stated orientation: the premises jointly entail at
// least one conclusion. Unit clauses become properties instead; a bare
// disjunction is a rule with no premises.
struct Rule {
  std::vector<Property> premises;
  std::vector<Property> conclusions;  // nonempty
  int origin = 0;                     // index of the fact the clause came from

  std::string text(const GroundAtomTable& table) const;
};

// Clause view of a grounded theory. Constraints with no clause form —
// arithmetic comparisons between numeric atoms — stay behind as residual;
// they still drive elimination through domain pruning.
struct NormalizedTheory {
  std::vector<Property> properties;
  std::vector<int> property_origins;  // aligned with properties
  std::vector<Rule> rules;
  std::vector<GroundConstraint> residual;
};

// Implications keep their direction (never the contrapositive), an Iff splits
// into both directions, conjunctions distribute, and constant-true facts
// (sanitizer placeholders) contribute nothing.
NormalizedTheory normalize(const GroundAtomTable& table,
                           const std::vector<GroundConstraint>& facts);

struct ChainStep {
  enum class Via { Given, Rule, Elimination };

  Via via = Via::Rule;
  Property derived;
  int rule = -1;                       // Via::Rule: index into the theory's rules
  std::vector<Property> excluded;      // Via::Elimination: the refuted alternatives
  std::vector<Property> supports;      // known properties this step rests on
  std::vector<int> residual_supports;  // residual constraints cited alongside
};

struct Chain {
  enum class Direction { Forward, Backward };

  Direction direction = Direction::Forward;
  std::vector<ChainStep> steps;   // derivation order (backward: goal first)
  FormulaPtr target;              // the statement the chain settles
  bool target_value = true;       // the truth value it settles it to
  std::vector<Property> basis;    // known properties that decide the target
};

enum class ChainOutcome { Found, Fixpoint, Cycle, DepthLimit, DeadEnd };

const char* chain_outcome_text(ChainOutcome outcome);

struct ChainResult {
  ChainOutcome outcome = ChainOutcome::DeadEnd;
  std::optional<Chain> chain;  // engaged exactly when outcome is Found
};

// What a chain should establish.
struct ChainTarget {
  FormulaPtr formula;
  bool value = true;
};

// An implication query donates its antecedent literals as extra given
// properties and retargets the consequent — for chain generation only, the
// solver verdict is untouched. Anything else passes through unchanged.
struct QueryPlan {
  FormulaPtr target;
  std::vector<Property> extra_given;
};

QueryPlan query_as_rule(const FormulaPtr& query, const GroundAtomTable& table);

// Saturate: fire rules whose premises all hold (a rule with all but one
// conclusion falsified derives the survivor), prune numeric domains against
// residual and side constraints, and emit an elimination step whenever a
// domain collapses to one value. Stops as soon as the target is determined,
// keeping only steps on a path to it; with no target, or an undetermined one,
// runs to fixpoint. Elimination supports are minimized: every cited property
// and constraint is necessary for the collapse.
ChainResult forward_chain(const NormalizedTheory& theory, const GroundAtomTable& table,
                          const std::vector<GroundConstraint>& side,
                          const std::optional<ChainTarget>& target,
                          const std::vector<Property>& extra_given,
                          const SolverConfig& config);

// Goal-directed search, deepening one level at a time up to
// config.backward_depth_limit. A literal goal is proved by being given, by a
// rule whose sole conclusion is the goal (premises become sub-goals), or — for
// a numeric binding — by refuting every alternative value with one constraint
// and already-given bindings. Goals already on the path report a cycle; the
// failure reason of the deepest attempt wins. Without a target there is
// nothing to chase and the result is a dead end (generate_chains tries both
// query polarities when the verdict is unknown and merges the reasons,
// cycle over depth over dead end).
ChainResult backward_chain(const NormalizedTheory& theory, const GroundAtomTable& table,
                           const std::vector<GroundConstraint>& side,
                           const std::optional<ChainTarget>& target,
                           const std::vector<Property>& extra_given,
                           const SolverConfig& config);

struct ChainCheck {
  bool pass = true;
  int step = -1;  // first violating step, -1 for chain-level failures
  std::string why;
};

// Replay the chain against the theory: steps may only use what is already
// known, rule steps must cite every premise and derive the unique surviving
// conclusion, elimination steps must exclude the whole rest of the domain and
// their supports must entail the binding (side constraints ambient), and the
// settled statement must match `expected` when given.
ChainCheck verify_chain(const Chain& chain, const NormalizedTheory& theory,
                        const GroundAtomTable& table,
                        const std::vector<GroundConstraint>& side,
                        const std::vector<Property>& extra_given,
                        const std::optional<ChainTarget>& expected,
                        const SolverConfig& config);

// End-to-end harness: normalize the restored theory (the facts soft solving
// kept), map the verdict to a target, and run both directions.
struct ChainSet {
  NormalizedTheory theory;
  QueryPlan plan;
  std::optional<ChainTarget> target;
  ChainResult forward;
  ChainResult backward;
};

ChainSet generate_chains(const Problem& problem, const Grounding& grounding,
                         const SoftOutcome& outcome, const SolverConfig& config);

// Step-tag multiset, e.g. "rule-application:5" or
// "elimination:1" — chains with equal signatures share a reasoning pattern.
std::string pattern_signature(const Chain& chain);

// Stable-field-order record of one direction's result.
nlohmann::ordered_json chain_to_json(const ChainResult& result, const GroundAtomTable& table,
                                     const NormalizedTheory& theory);

// One numbered line per step in plain logical syntax, e.g.
// "Wumpus(Fae) -> not Opaque(Fae)". Backward chains list the goal first.
std::string render_chain_symbolic(const Chain& chain, const GroundAtomTable& table,
                                  const NormalizedTheory& theory);

// Template prose: one numbered entry per step, "Since <supports>, <derived>."
// with predicate names de-mangled (underscores to spaces, folded arguments
// restored against the object list). Backward chains render leaves-first so
// the prose reads forward. Elimination steps lead with the excluded values.
std::string render_chain_text(const Chain& chain, const GroundAtomTable& table,
                              const NormalizedTheory& theory, const Problem& problem);

}  // namespace softlogic
