#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softlogic/ground.hpp"
#include "softlogic/retrieval.hpp"
#include "softlogic/sanitize.hpp"
#include "softlogic/solver.hpp"
#include "softlogic/trace.hpp"

namespace softlogic {

// Confidence weight for one fact: exp(-H), where H is the mean per-token
// Shannon entropy of the trace (full distribution when recorded, otherwise
// the surprisal -ln p of the chosen token). Lands in (0, 1]. Throws
// EmptyTrace.
double entropy_weight(const TokenTrace& trace);

// Overwrite fact weights from per-fact traces (empty trace: weight stays as
// sanitize left it). Placeholders keep weight 0 no matter what.
void apply_trace_weights(SanitizedFactSet& set, const std::vector<TokenTrace>& traces);

struct SubsetResult {
  std::vector<int> kept;     // positions into the fact list, ascending
  std::vector<int> dropped;  // complement, ascending
  double total_weight = 0.0;
};

// Exact maximum-weight satisfiable subset of `facts` under the mandatory
// `side` constraints. Best-first over drop sets: maximize kept weight, then
// keep more facts, then prefer the lexicographically smallest kept index set
// (i.e. drop later facts on ties). Throws SideUnsat when even the empty
// subset conflicts with `side`, and BudgetExceeded on pathological instances.
SubsetResult max_weight_sat_subset(const GroundAtomTable& table,
                                   const std::vector<FormulaPtr>& facts,
                                   const std::vector<double>& weights,
                                   const std::vector<FormulaPtr>& side,
                                   const SolverConfig& config);

struct Verdict {
  enum class Kind { True, False, Unknown, Option, ValueSet, Fallback };
  Kind kind = Kind::Unknown;
  std::string label;                 // Option
  std::vector<std::int64_t> values;  // ValueSet, ascending
  std::string reason;                // Fallback

  std::string text() const;
};

// Full account of one soft solve, for records and chain generation.
struct SoftOutcome {
  Verdict verdict;
  int case_taken = 0;  // 1: unique candidate, 2: none, 3: several
  std::vector<int> kept, dropped;  // restored theory (kept == all when consistent)
  std::vector<std::string> candidate_labels;
  std::vector<char> candidate_sat;  // aligned with candidate_labels
  std::optional<bool> sat_query, sat_not_query;  // Boolean queries only
  std::optional<RetrievalOutcome> retrieval;
};

// Everything resolve() needs when ambiguity retrieval kicks in. A null
// gateway means retrieval is skipped (Declined).
struct RetrievalContext {
  std::string context;
  std::string question;
  Gateway* gateway = nullptr;
};

// Algorithm: restore consistency if needed (max-weight subset), test each
// answer candidate for satisfiability against the restored theory, then:
// exactly one satisfiable -> that answer; none -> per-candidate max-weight
// subsets decide (ties are Unknown for Boolean queries, a fallback
// otherwise); several -> ambiguity retrieval, whose refusal leaves the
// cautious verdict (Unknown / feasible value set / fallback).
SoftOutcome soft_solve(const Problem& problem, const SanitizedFactSet& sanitized,
                       const Grounding& grounding, const SolverConfig& config,
                       const RetrievalContext& retrieval = {});

}  // namespace softlogic
