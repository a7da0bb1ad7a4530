#include "softlogic/soft.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace softlogic {

double entropy_weight(const TokenTrace& trace) {
  if (trace.empty()) throw EmptyTrace();
  double total = 0.0;
  for (const TokenRecord& tok : trace) {
    double h;
    if (tok.dist && !tok.dist->empty()) {
      h = 0.0;
      for (const auto& [t, p] : *tok.dist)
        if (p > 0.0) h -= p * std::log(p);
    } else {
      double p = std::min(1.0, std::max(1e-12, tok.prob));
      h = -std::log(p);
    }
    total += h;
  }
  return std::exp(-total / static_cast<double>(trace.size()));
}

void apply_trace_weights(SanitizedFactSet& set, const std::vector<TokenTrace>& traces) {
  for (std::size_t i = 0; i < set.facts.size() && i < traces.size(); ++i) {
    if (set.facts[i].placeholder) continue;  // stays at 0
    if (!traces[i].empty()) set.facts[i].weight = entropy_weight(traces[i]);
  }
}

namespace {

// Drop sets are explored best-first. Keys order by ascending dropped weight,
// then fewer drops, then lexicographically smallest *kept* set — the worked
// tie rule: facts earlier in the list survive ties.
struct DropState {
  double dropped_weight;
  std::vector<int> dropped;  // ascending
};

struct DropOrder {
  int n;
  bool operator()(const DropState& a, const DropState& b) const {
    // priority_queue pops the largest, so return "a is worse than b"
    if (a.dropped_weight != b.dropped_weight) return a.dropped_weight > b.dropped_weight;
    if (a.dropped.size() != b.dropped.size()) return a.dropped.size() > b.dropped.size();
    // compare kept sets lexicographically; smaller kept set wins
    std::size_t ia = 0, ib = 0;
    for (int i = 0; i < n; ++i) {
      bool ka = ia >= a.dropped.size() || a.dropped[ia] != i;
      bool kb = ib >= b.dropped.size() || b.dropped[ib] != i;
      if (!ka) ++ia;
      if (!kb) ++ib;
      if (ka != kb) return !ka;  // the set that still contains i is smaller
    }
    return false;
  }
};

}  // namespace

SubsetResult max_weight_sat_subset(const GroundAtomTable& table,
                                   const std::vector<FormulaPtr>& facts,
                                   const std::vector<double>& weights,
                                   const std::vector<FormulaPtr>& side,
                                   const SolverConfig& config) {
  const int n = static_cast<int>(facts.size());
  Solver solver(table, config);
  for (const auto& f : side) solver.add(f);

  if (!solver.check().sat) throw SideUnsat();

  auto kept_of = [&](const std::vector<int>& dropped) {
    std::vector<int> kept;
    kept.reserve(n - dropped.size());
    std::size_t j = 0;
    for (int i = 0; i < n; ++i) {
      if (j < dropped.size() && dropped[j] == i) { ++j; continue; }
      kept.push_back(i);
    }
    return kept;
  };

  auto satisfiable = [&](const std::vector<int>& kept) {
    std::vector<FormulaPtr> extra;
    extra.reserve(kept.size());
    for (int i : kept) extra.push_back(facts[i]);
    return solver.check(extra).sat;
  };

  std::priority_queue<DropState, std::vector<DropState>, DropOrder> pq(DropOrder{n});
  pq.push({0.0, {}});
  std::int64_t explored = 0;
  while (!pq.empty()) {
    DropState cur = pq.top();
    pq.pop();
    if (++explored > 1'000'000) throw BudgetExceeded();
    std::vector<int> kept = kept_of(cur.dropped);
    if (satisfiable(kept)) {
      SubsetResult out;
      out.kept = std::move(kept);
      out.dropped = cur.dropped;
      // canonical summation order keeps equal sets bit-identical
      for (int i : out.kept) out.total_weight += weights[i];
      return out;
    }
    int start = cur.dropped.empty() ? 0 : cur.dropped.back() + 1;
    for (int i = start; i < n; ++i) {
      DropState next = cur;
      next.dropped.push_back(i);
      next.dropped_weight += weights[i];
      pq.push(std::move(next));
    }
  }
  throw SideUnsat();  // unreachable: the empty kept set is always tested
}

std::string Verdict::text() const {
  switch (kind) {
    case Kind::True: return "True";
    case Kind::False: return "False";
    case Kind::Unknown: return "Unknown";
    case Kind::Option: return "Option " + label;
    case Kind::ValueSet: {
      std::string s = "{";
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(values[i]);
      }
      return s + "}";
    }
    case Kind::Fallback: return "Fallback(" + reason + ")";
  }
  return "?";
}

namespace {

Verdict verdict_for_candidate(const Problem& problem, const std::string& label,
                              std::int64_t numeric_value) {
  Verdict v;
  switch (problem.query.kind) {
    case QuerySpec::Kind::Boolean:
      v.kind = label == "true" ? Verdict::Kind::True : Verdict::Kind::False;
      break;
    case QuerySpec::Kind::Candidates:
      v.kind = Verdict::Kind::Option;
      v.label = label;
      break;
    case QuerySpec::Kind::FreeNumeric:
      v.kind = Verdict::Kind::ValueSet;
      v.values = {numeric_value};
      break;
  }
  return v;
}

}  // namespace

SoftOutcome soft_solve(const Problem& problem, const SanitizedFactSet& sanitized,
                       const Grounding& grounding, const SolverConfig& config,
                       const RetrievalContext& retrieval) {
  SoftOutcome out;
  const GroundAtomTable& table = grounding.table;

  std::vector<FormulaPtr> side;
  for (const auto& c : grounding.side) side.push_back(c.formula);
  std::vector<FormulaPtr> fact_forms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < grounding.facts.size(); ++i) {
    fact_forms.push_back(grounding.facts[i].formula);
    weights.push_back(sanitized.facts[i].weight);
  }

  // answer candidates
  struct Cand {
    std::string label;
    FormulaPtr formula;
    std::int64_t value = 0;  // FreeNumeric only
  };
  std::vector<Cand> cands;
  switch (problem.query.kind) {
    case QuerySpec::Kind::Boolean:
      cands.push_back({"true", grounding.query, 0});
      cands.push_back({"false", Formula::negate(grounding.query), 0});
      break;
    case QuerySpec::Kind::Candidates:
      for (const auto& [label, f] : grounding.candidates) cands.push_back({label, f, 0});
      break;
    case QuerySpec::Kind::FreeNumeric:
      for (std::int64_t v : table.domains[grounding.numeric_target])
        cands.push_back({std::to_string(v), num_assign(table, grounding.numeric_target, v), v});
      break;
  }

  // restore consistency if needed
  {
    Solver whole(table, config);
    for (const auto& f : side) whole.add(f);
    std::vector<FormulaPtr> all = fact_forms;
    if (whole.check(all).sat) {
      for (int i = 0; i < static_cast<int>(fact_forms.size()); ++i) out.kept.push_back(i);
    } else {
      SubsetResult sub = max_weight_sat_subset(table, fact_forms, weights, side, config);
      out.kept = sub.kept;
      out.dropped = sub.dropped;
    }
  }

  Solver star(table, config);  // restored theory
  for (const auto& f : side) star.add(f);
  for (int i : out.kept) star.add(fact_forms[i]);

  int sat_count = 0;
  int sat_index = -1;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    bool sat = star.check({cands[c].formula}).sat;
    out.candidate_labels.push_back(cands[c].label);
    out.candidate_sat.push_back(sat ? 1 : 0);
    if (sat) { ++sat_count; sat_index = static_cast<int>(c); }
  }
  if (problem.query.kind == QuerySpec::Kind::Boolean) {
    out.sat_query = out.candidate_sat[0] != 0;
    out.sat_not_query = out.candidate_sat[1] != 0;
  }

  if (sat_count == 1) {
    out.case_taken = 1;
    out.verdict =
        verdict_for_candidate(problem, cands[sat_index].label, cands[sat_index].value);
    return out;
  }

  if (sat_count == 0) {
    // No candidate fits the restored theory: let per-candidate repairs decide.
    out.case_taken = 2;
    std::vector<FormulaPtr> star_facts;
    std::vector<double> star_weights;
    for (int i : out.kept) {
      star_facts.push_back(fact_forms[i]);
      star_weights.push_back(weights[i]);
    }
    double best = -1.0;
    int best_index = -1;
    bool tie = false;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      std::vector<FormulaPtr> cand_side = side;
      cand_side.push_back(cands[c].formula);
      double w;
      try {
        w = max_weight_sat_subset(table, star_facts, star_weights, cand_side, config)
                .total_weight;
      } catch (const SideUnsat&) {
        continue;  // candidate contradicts the side constraints outright
      }
      if (w > best) { best = w; best_index = static_cast<int>(c); tie = false; }
      else if (w == best) tie = true;
    }
    if (best_index < 0 || tie) {
      if (problem.query.kind == QuerySpec::Kind::Boolean)
        out.verdict.kind = Verdict::Kind::Unknown;
      else {
        out.verdict.kind = Verdict::Kind::Fallback;
        out.verdict.reason = best_index < 0 ? "no candidate is repairable" : "soft tie";
      }
      return out;
    }
    out.verdict =
        verdict_for_candidate(problem, cands[best_index].label, cands[best_index].value);
    return out;
  }

  // Several candidates fit: ask for one discriminating premise.
  out.case_taken = 3;
  std::vector<std::pair<std::string, FormulaPtr>> cand_pairs;
  for (const auto& c : cands) cand_pairs.emplace_back(c.label, c.formula);
  RetrievalOutcome ro =
      resolve(star, cand_pairs, retrieval.context, retrieval.question, retrieval.gateway);
  out.retrieval = ro;
  if (ro.status == RetrievalOutcome::Status::Resolved) {
    for (const auto& c : cands) {
      if (c.label == ro.label) {
        out.verdict = verdict_for_candidate(problem, c.label, c.value);
        return out;
      }
    }
    throw InvariantViolation("retrieval resolved to an unknown candidate label");
  }

  // Declined: the cautious verdict stands.
  switch (problem.query.kind) {
    case QuerySpec::Kind::Boolean:
      out.verdict.kind = Verdict::Kind::Unknown;
      break;
    case QuerySpec::Kind::Candidates:
      out.verdict.kind = Verdict::Kind::Fallback;
      out.verdict.reason = "ambiguous options";
      break;
    case QuerySpec::Kind::FreeNumeric:
      out.verdict.kind = Verdict::Kind::ValueSet;
      for (std::size_t c = 0; c < cands.size(); ++c)
        if (out.candidate_sat[c]) out.verdict.values.push_back(cands[c].value);
      break;
  }
  return out;
}

}  // namespace softlogic
