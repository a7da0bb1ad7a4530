#include "softlogic/chain.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "softlogic/errors.hpp"

namespace softlogic {
namespace {

// Sign-aware identity for sets and maps.
using PropKey = std::tuple<int, int, int, std::int64_t>;

PropKey key_of(const Property& p) {
  int sign = p.is_boolean ? (p.truth ? 1 : 0) : (p.equal ? 1 : 0);
  return {p.is_boolean ? 0 : 1, p.atom, sign, p.is_boolean ? 0 : p.value};
}

Property complement_of(const Property& p) {
  Property c = p;
  if (p.is_boolean) c.truth = !p.truth;
  else c.equal = !p.equal;
  return c;
}

GroundAtom ground_of(const PredicateAtom& p) {
  return GroundAtom{p.name, p.args.empty() ? "" : p.args[0]};
}

// Signed literal extraction; nullopt for anything deeper than one atom or a
// =/!= binding of one numeric atom against a constant.
std::optional<Property> literal_of(const GroundAtomTable& table, const FormulaPtr& f,
                                   bool negated) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      int idx = table.boolean_index(ground_of(f->atom));
      if (idx < 0) return std::nullopt;
      return bool_property(idx, !negated);
    }
    case Formula::Kind::Not:
      return literal_of(table, f->kids[0], !negated);
    case Formula::Kind::Compare: {
      if (f->cmp != CompareOp::Eq && f->cmp != CompareOp::Ne) return std::nullopt;
      const NumExpr* atom_side = nullptr;
      const NumExpr* const_side = nullptr;
      if (f->lhs->kind == NumExpr::Kind::Atom && f->rhs->kind == NumExpr::Kind::Const) {
        atom_side = f->lhs.get();
        const_side = f->rhs.get();
      } else if (f->lhs->kind == NumExpr::Kind::Const && f->rhs->kind == NumExpr::Kind::Atom) {
        atom_side = f->rhs.get();
        const_side = f->lhs.get();
      } else {
        return std::nullopt;
      }
      int idx = table.numeric_index(ground_of(atom_side->atom));
      if (idx < 0) return std::nullopt;
      bool eq = (f->cmp == CompareOp::Eq) != negated;
      return num_property(idx, const_side->value, eq);
    }
    default:
      return std::nullopt;
  }
}

struct Clause {
  std::vector<Property> premises;
  std::vector<Property> conclusions;
};

// Clause extraction that keeps the stated orientation of implications. Both
// normal forms are literal matrices; nullopt bubbles up for anything the
// clause language cannot say (general comparisons, oversized distributions).
class Clausifier {
 public:
  explicit Clausifier(const GroundAtomTable& table) : table_(table) {}

  using Matrix = std::vector<std::vector<Property>>;  // cnf: and-of-ors; dnf: or-of-ands

  std::optional<std::vector<Clause>> clauses(const FormulaPtr& f, bool neg) {
    switch (f->kind) {
      case Formula::Kind::And: {
        if (neg) break;  // or-of-negations: handled by the matrix path
        std::vector<Clause> out;
        for (const auto& kid : f->kids) {
          auto part = clauses(kid, false);
          if (!part) return std::nullopt;
          out.insert(out.end(), part->begin(), part->end());
        }
        return out;
      }
      case Formula::Kind::Or: {
        if (!neg) break;
        std::vector<Clause> out;
        for (const auto& kid : f->kids) {
          auto part = clauses(kid, true);
          if (!part) return std::nullopt;
          out.insert(out.end(), part->begin(), part->end());
        }
        return out;
      }
      case Formula::Kind::Not:
        return clauses(f->kids[0], !neg);
      case Formula::Kind::Implies: {
        if (neg) {  // not (P -> Q) is P and not Q
          auto left = clauses(f->kids[0], false);
          if (!left) return std::nullopt;
          auto right = clauses(f->kids[1], true);
          if (!right) return std::nullopt;
          left->insert(left->end(), right->begin(), right->end());
          return left;
        }
        // Curry nested implications: P -> (A -> B) reads as premises P, A.
        std::vector<FormulaPtr> premise_parts{f->kids[0]};
        FormulaPtr head = f->kids[1];
        while (head->kind == Formula::Kind::Implies) {
          premise_parts.push_back(head->kids[0]);
          head = head->kids[1];
        }
        return implication(premise_parts, head);
      }
      case Formula::Kind::Iff: {
        FormulaPtr a = f->kids[0], b = neg ? Formula::negate(f->kids[1]) : f->kids[1];
        auto fwd = implication({a}, b);
        if (!fwd) return std::nullopt;
        auto bwd = implication({b}, a);
        if (!bwd) return std::nullopt;
        fwd->insert(fwd->end(), bwd->begin(), bwd->end());
        return fwd;
      }
      default:
        break;
    }
    auto matrix = cnf(f, neg);
    if (!matrix) return std::nullopt;
    std::vector<Clause> out;
    for (auto& disj : *matrix) out.push_back(Clause{{}, std::move(disj)});
    return out;
  }

 private:
  std::optional<std::vector<Clause>> implication(const std::vector<FormulaPtr>& premise_parts,
                                                 const FormulaPtr& head) {
    Matrix terms{{}};  // dnf of the conjoined premise parts
    for (const auto& part : premise_parts) {
      auto d = dnf(part, false);
      if (!d) return std::nullopt;
      Matrix crossed;
      for (const auto& a : terms)
        for (const auto& b : *d) {
          crossed.push_back(a);
          crossed.back().insert(crossed.back().end(), b.begin(), b.end());
        }
      if (crossed.size() > kMatrixCap) return std::nullopt;
      terms = std::move(crossed);
    }
    auto heads = cnf(head, false);
    if (!heads) return std::nullopt;
    std::vector<Clause> out;
    for (const auto& t : terms)
      for (const auto& h : *heads) out.push_back(Clause{t, h});
    return out;
  }

  // cnf(f) with `neg` folded in; inner rows are disjunctions.
  std::optional<Matrix> cnf(const FormulaPtr& f, bool neg) { return form(f, neg, true); }
  // dnf dual; inner rows are conjunctions.
  std::optional<Matrix> dnf(const FormulaPtr& f, bool neg) { return form(f, neg, false); }

  std::optional<Matrix> form(const FormulaPtr& f, bool neg, bool conjunctive) {
    switch (f->kind) {
      case Formula::Kind::BoolLit: {
        bool v = f->lit != neg;
        // Identity when the literal matches the outer connective, absorbing row
        // otherwise: cnf(true) = {}, cnf(false) = {{}}, dnf mirrored.
        if (v == conjunctive) return Matrix{};
        return Matrix{{}};
      }
      case Formula::Kind::Not:
        return form(f->kids[0], !neg, conjunctive);
      case Formula::Kind::And:
        return combine(f->kids, neg, conjunctive, /*conjunction=*/!neg);
      case Formula::Kind::Or:
        return combine(f->kids, neg, conjunctive, /*conjunction=*/neg);
      case Formula::Kind::Implies: {
        FormulaList kids{Formula::negate(f->kids[0]), f->kids[1]};
        return combine(kids, neg, conjunctive, /*conjunction=*/neg);
      }
      case Formula::Kind::Iff: {
        // (A -> B) and (B -> A), or its negation (A or B) and (not A or not B).
        FormulaPtr a = f->kids[0], b = f->kids[1];
        FormulaList kids;
        if (!neg) {
          kids = {Formula::implies(a, b), Formula::implies(b, a)};
        } else {
          kids = {Formula::disj({a, b}),
                  Formula::disj({Formula::negate(a), Formula::negate(b)})};
        }
        return combine(kids, false, conjunctive, /*conjunction=*/true);
      }
      default: {
        auto lit = literal_of(table_, f, neg);
        if (!lit) return std::nullopt;
        return Matrix{{*lit}};
      }
    }
  }

  // Rows of a connective: concatenate when it matches the target form,
  // distribute (cross rows) when it does not.
  std::optional<Matrix> combine(const FormulaList& kids, bool neg, bool conjunctive,
                                bool conjunction) {
    bool matches = conjunction == conjunctive;
    Matrix acc = matches ? Matrix{} : Matrix{{}};
    for (const auto& kid : kids) {
      auto part = form(kid, neg, conjunctive);
      if (!part) return std::nullopt;
      if (matches) {
        acc.insert(acc.end(), part->begin(), part->end());
      } else {
        Matrix crossed;
        for (const auto& a : acc)
          for (const auto& b : *part) {
            crossed.push_back(a);
            crossed.back().insert(crossed.back().end(), b.begin(), b.end());
          }
        acc = std::move(crossed);
      }
      if (acc.size() > kMatrixCap) return std::nullopt;
    }
    return acc;
  }

  static constexpr std::size_t kMatrixCap = 64;
  const GroundAtomTable& table_;
};

// Drop duplicate literals; report tautologies and vacuous clauses as nullopt.
std::optional<Clause> tidy(const Clause& c) {
  Clause out;
  std::set<PropKey> prem, concl;
  for (const auto& p : c.premises) {
    if (prem.count(key_of(complement_of(p)))) return std::nullopt;  // false premise
    if (prem.insert(key_of(p)).second) out.premises.push_back(p);
  }
  for (const auto& p : c.conclusions) {
    if (concl.count(key_of(complement_of(p)))) return std::nullopt;  // true conclusion
    if (prem.count(key_of(p))) return std::nullopt;                  // P -> P or ...
    if (concl.insert(key_of(p)).second) out.conclusions.push_back(p);
  }
  return out;
}

void collect_atoms(const NumExprPtr& e, const GroundAtomTable& table, std::vector<int>& nums) {
  switch (e->kind) {
    case NumExpr::Kind::Const:
      return;
    case NumExpr::Kind::Atom: {
      int idx = table.numeric_index(ground_of(e->atom));
      if (idx >= 0 && std::find(nums.begin(), nums.end(), idx) == nums.end())
        nums.push_back(idx);
      return;
    }
    case NumExpr::Kind::Arith:
      collect_atoms(e->lhs, table, nums);
      collect_atoms(e->rhs, table, nums);
      return;
  }
}

// Numeric atoms mentioned, in first-occurrence order. False if any boolean
// atom appears (such constraints sit out of domain pruning).
bool collect_atoms(const FormulaPtr& f, const GroundAtomTable& table, std::vector<int>& nums) {
  switch (f->kind) {
    case Formula::Kind::Atom:
      return false;
    case Formula::Kind::BoolLit:
      return true;
    case Formula::Kind::Compare:
      collect_atoms(f->lhs, table, nums);
      collect_atoms(f->rhs, table, nums);
      return true;
    default:
      for (const auto& kid : f->kids)
        if (!collect_atoms(kid, table, nums)) return false;
      return true;
  }
}

constexpr std::int64_t kJointCap = 200000;

// Every joint assignment of `atoms` over `doms`, early-exiting when `fn`
// returns true (found). Returns nullopt when the product exceeds the cap.
template <typename F>
std::optional<bool> any_joint(const std::vector<int>& atoms,
                              const std::vector<std::vector<std::int64_t>>& doms,
                              Model& scratch, F&& fn) {
  std::int64_t product = 1;
  for (int a : atoms) {
    if (doms[a].empty()) return false;
    product *= static_cast<std::int64_t>(doms[a].size());
    if (product > kJointCap) return std::nullopt;
  }
  std::vector<std::size_t> at(atoms.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < atoms.size(); ++i) scratch.nums[atoms[i]] = doms[atoms[i]][at[i]];
    if (fn(scratch)) return true;
    std::size_t i = 0;
    for (; i < atoms.size(); ++i) {
      if (++at[i] < doms[atoms[i]].size()) break;
      at[i] = 0;
    }
    if (i == atoms.size()) return false;
  }
}

// One constraint plus its numeric atom set, precomputed.
struct PrunableConstraint {
  FormulaPtr formula;
  std::vector<int> atoms;
  bool side = false;
  int residual_index = -1;  // index into NormalizedTheory::residual, -1 for side
};

std::vector<PrunableConstraint> prunable_constraints(const NormalizedTheory& theory,
                                                     const GroundAtomTable& table,
                                                     const std::vector<GroundConstraint>& side) {
  std::vector<PrunableConstraint> out;
  for (std::size_t i = 0; i < theory.residual.size(); ++i) {
    PrunableConstraint c{theory.residual[i].formula, {}, false, static_cast<int>(i)};
    if (!collect_atoms(c.formula, table, c.atoms)) continue;  // mentions booleans
    if (!c.atoms.empty()) out.push_back(std::move(c));
  }
  for (const auto& s : side) {
    PrunableConstraint c{s.formula, {}, true, -1};
    if (!collect_atoms(c.formula, table, c.atoms)) continue;
    if (!c.atoms.empty()) out.push_back(std::move(c));
  }
  return out;
}

Model make_scratch(const GroundAtomTable& table) {
  Model m;
  m.bools.assign(table.booleans.size(), 0);
  m.nums.resize(table.domains.size());
  for (std::size_t j = 0; j < table.domains.size(); ++j)
    m.nums[j] = table.domains[j].empty() ? 0 : table.domains[j][0];
  return m;
}

// Per-constraint sweep over `doms` until stable: drop any value of any
// mentioned atom with no support among the other atoms' current values.
void propagate(const std::vector<const PrunableConstraint*>& constraints,
               const GroundAtomTable& table, std::vector<std::vector<std::int64_t>>& doms,
               Model& scratch) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto* c : constraints) {
      for (int target : c->atoms) {
        std::vector<int> others;
        for (int a : c->atoms)
          if (a != target) others.push_back(a);
        std::vector<std::int64_t> keep;
        bool skip = false;
        for (std::int64_t v : doms[target]) {
          scratch.nums[target] = v;
          auto hit = any_joint(others, doms, scratch, [&](const Model& m) {
            // the odometer rewrites nums for `others`; target stays pinned
            return evaluate(table, m, c->formula);
          });
          if (!hit) {  // too large to enumerate; leave this constraint alone
            skip = true;
            break;
          }
          if (*hit) keep.push_back(v);
        }
        if (skip) continue;
        if (keep.size() != doms[target].size()) {
          doms[target] = std::move(keep);
          changed = true;
          if (doms[target].empty()) return;  // contradiction; caller's theory was unsat
        }
      }
    }
  }
}

// Narrow `doms` to the projection of the joint solution space of `active`
// (side constraints included by the caller). Exact when the joint space fits
// under the cap — this is what lets one elimination lean on several
// constraints at once — with the per-constraint sweep as the fallback.
void narrow(const std::vector<const PrunableConstraint*>& active, const GroundAtomTable& table,
            std::vector<std::vector<std::int64_t>>& doms, Model& scratch) {
  if (active.empty()) return;
  std::vector<int> atoms;
  for (const auto* c : active)
    for (int a : c->atoms)
      if (std::find(atoms.begin(), atoms.end(), a) == atoms.end()) atoms.push_back(a);
  std::int64_t product = 1;
  for (int a : atoms) {
    if (doms[a].empty()) return;
    product *= static_cast<std::int64_t>(doms[a].size());
    if (product > kJointCap) {
      propagate(active, table, doms, scratch);
      return;
    }
  }
  std::vector<std::set<std::int64_t>> supported(doms.size());
  any_joint(atoms, doms, scratch, [&](const Model& m) {
    for (const auto* c : active)
      if (!evaluate(table, m, c->formula)) return false;
    for (int a : atoms) supported[a].insert(m.nums[a]);
    return false;  // keep enumerating; we want every supported value
  });
  for (int a : atoms) doms[a].assign(supported[a].begin(), supported[a].end());
}

// Shared truth bookkeeping for the forward engine and the verifier. Domains
// here reflect explicit knowledge only (given or derived bindings), never
// speculative pruning.
struct Know {
  std::vector<int> bools;  // -1 unknown, 0 false, 1 true
  std::vector<std::vector<std::int64_t>> doms;
  std::set<std::pair<int, std::int64_t>> ne;  // explicit exclusions

  explicit Know(const GroundAtomTable& table)
      : bools(table.booleans.size(), -1), doms(table.domains) {}

  void apply(const Property& p) {
    if (p.is_boolean) {
      bools[p.atom] = p.truth ? 1 : 0;
    } else if (p.equal) {
      auto& d = doms[p.atom];
      if (std::find(d.begin(), d.end(), p.value) != d.end()) d = {p.value};
    } else {
      ne.insert({p.atom, p.value});
      auto& d = doms[p.atom];
      d.erase(std::remove(d.begin(), d.end(), p.value), d.end());
    }
  }

  bool holds(const Property& p) const {
    if (p.is_boolean) return bools[p.atom] == (p.truth ? 1 : 0);
    const auto& d = doms[p.atom];
    if (p.equal) return d.size() == 1 && d[0] == p.value;
    if (ne.count({p.atom, p.value})) return true;
    return d.size() == 1 && d[0] != p.value;
  }

  // The already-known property that contradicts p, if any.
  std::optional<Property> falsifier(const Property& p) const {
    if (p.is_boolean) {
      if (bools[p.atom] == (p.truth ? 0 : 1)) return bool_property(p.atom, !p.truth);
      return std::nullopt;
    }
    const auto& d = doms[p.atom];
    if (p.equal) {
      if (ne.count({p.atom, p.value})) return num_property(p.atom, p.value, false);
      if (d.size() == 1 && d[0] != p.value) return num_property(p.atom, d[0]);
      return std::nullopt;
    }
    if (d.size() == 1 && d[0] == p.value) return num_property(p.atom, p.value);
    return std::nullopt;
  }
};

// Three-valued formula evaluation against a Know plus (for the forward
// engine) pruned domains; `used` collects the known properties the verdict
// rests on. Comparisons count as determined only with every mentioned atom
// pinned, so the basis is always expressible as properties.
struct Determination {
  int state = -1;  // -1 unknown, 0 false, 1 true
  std::vector<Property> used;
};

Determination eval3(const FormulaPtr& f, const GroundAtomTable& table,
                    const std::vector<int>& bools,
                    const std::vector<std::vector<std::int64_t>>& doms, Model& scratch) {
  auto lift = [](int state, std::vector<Property> used) {
    Determination d;
    d.state = state;
    d.used = std::move(used);
    return d;
  };
  switch (f->kind) {
    case Formula::Kind::Atom: {
      int idx = table.boolean_index(ground_of(f->atom));
      if (idx < 0 || bools[idx] < 0) return {};
      return lift(bools[idx], {bool_property(idx, bools[idx] == 1)});
    }
    case Formula::Kind::BoolLit:
      return lift(f->lit ? 1 : 0, {});
    case Formula::Kind::Not: {
      auto d = eval3(f->kids[0], table, bools, doms, scratch);
      if (d.state >= 0) d.state = 1 - d.state;
      return d;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      int absorbing = f->kind == Formula::Kind::And ? 0 : 1;
      std::vector<Property> used;
      bool all_known = true;
      for (const auto& kid : f->kids) {
        auto d = eval3(kid, table, bools, doms, scratch);
        if (d.state == absorbing) return d;
        if (d.state < 0) all_known = false;
        else used.insert(used.end(), d.used.begin(), d.used.end());
      }
      if (!all_known) return {};
      return lift(1 - absorbing, std::move(used));
    }
    case Formula::Kind::Implies: {
      auto a = eval3(f->kids[0], table, bools, doms, scratch);
      auto b = eval3(f->kids[1], table, bools, doms, scratch);
      if (a.state == 0) return lift(1, a.used);
      if (b.state == 1) return lift(1, b.used);
      if (a.state == 1 && b.state == 0) {
        a.used.insert(a.used.end(), b.used.begin(), b.used.end());
        return lift(0, a.used);
      }
      return {};
    }
    case Formula::Kind::Iff: {
      auto a = eval3(f->kids[0], table, bools, doms, scratch);
      auto b = eval3(f->kids[1], table, bools, doms, scratch);
      if (a.state < 0 || b.state < 0) return {};
      a.used.insert(a.used.end(), b.used.begin(), b.used.end());
      return lift(a.state == b.state ? 1 : 0, a.used);
    }
    case Formula::Kind::Compare: {
      std::vector<int> atoms;
      collect_atoms(f->lhs, table, atoms);
      collect_atoms(f->rhs, table, atoms);
      std::vector<Property> used;
      for (int a : atoms) {
        if (doms[a].size() != 1) return {};
        scratch.nums[a] = doms[a][0];
        used.push_back(num_property(a, doms[a][0]));
      }
      return lift(evaluate(table, scratch, f) ? 1 : 0, std::move(used));
    }
    default:
      return {};
  }
}

constexpr int kGivenSource = -2;

// Forward saturation. Owns the pruned-domain view next to the explicit Know.
class ForwardEngine {
 public:
  ForwardEngine(const NormalizedTheory& theory, const GroundAtomTable& table,
                const std::vector<GroundConstraint>& side,
                const std::optional<ChainTarget>& target,
                const std::vector<Property>& extra_given, const SolverConfig& config)
      : theory_(theory),
        table_(table),
        target_(target),
        config_(config),
        know_(table),
        scratch_(make_scratch(table)),
        bool_src_(table.booleans.size(), -3),
        num_src_(table.domains.size(), -3),
        constraints_(prunable_constraints(theory, table, side)) {
    (void)config_;
    for (const auto& p : theory.properties) give(p);
    for (const auto& p : extra_given) give(p);
  }

  ChainResult run() {
    // Domains already down to one value count as known from the start.
    for (std::size_t a = 0; a < know_.doms.size(); ++a)
      if (know_.doms[a].size() == 1 && num_src_[a] == -3 && table_.domains[a].size() == 1)
        num_src_[a] = kGivenSource;
    if (settle_initial_collapses()) return finish();
    if (check_target()) return finish();
    bool progressed = true;
    while (progressed) {
      progressed = false;
      // First fireable rule each pass keeps the derivation order canonical.
      for (std::size_t r = 0; r < theory_.rules.size(); ++r) {
        if (fire(static_cast<int>(r))) {
          progressed = true;
          if (determined_) return finish();
          break;
        }
      }
      if (progressed) continue;
      progressed = prune();
      if (determined_) return finish();
    }
    ChainResult out;
    out.outcome = ChainOutcome::Fixpoint;
    return out;
  }

 private:
  void give(const Property& p) {
    know_.apply(p);
    if (p.is_boolean) {
      bool_src_[p.atom] = kGivenSource;
      return;
    }
    pruned_[p.atom] = know_.doms[p.atom];
    numeric_pool_.push_back(p);
    if (p.equal) num_src_[p.atom] = kGivenSource;
    else ne_src_[{p.atom, p.value}] = kGivenSource;
  }

  // Given exclusions can pin a domain before any step runs.
  bool settle_initial_collapses() {
    for (std::size_t a = 0; a < know_.doms.size(); ++a) {
      if (know_.doms[a].size() == 1 && num_src_[a] == -3) {
        emit_elimination(static_cast<int>(a));
        if (check_target()) return true;
      }
    }
    return false;
  }

  // The known property to cite for p, if p is actually established.
  std::optional<Property> cite(const Property& p) const {
    if (p.is_boolean)
      return know_.bools[p.atom] == (p.truth ? 1 : 0) ? std::optional<Property>(p)
                                                      : std::nullopt;
    const auto& d = know_.doms[p.atom];
    if (p.equal) return d.size() == 1 && d[0] == p.value ? std::optional<Property>(p) : std::nullopt;
    if (ne_src_.count({p.atom, p.value})) return p;
    if (d.size() == 1 && d[0] != p.value) return num_property(p.atom, d[0]);
    return std::nullopt;
  }

  bool fire(int rule_index) {
    const Rule& rule = theory_.rules[rule_index];
    std::vector<Property> supports;
    for (const auto& premise : rule.premises) {
      auto c = cite(premise);
      if (!c) return false;
      supports.push_back(premise);  // the premise itself must be listed
      if (!(*c == premise)) supports.push_back(*c);
    }
    const Property* survivor = nullptr;
    std::vector<Property> falsifiers;
    for (const auto& conclusion : rule.conclusions) {
      if (know_.holds(conclusion)) return false;  // already satisfied
      auto f = know_.falsifier(conclusion);
      if (f) {
        falsifiers.push_back(*f);
      } else {
        if (survivor) return false;  // two live conclusions
        survivor = &conclusion;
      }
    }
    if (!survivor) return false;  // all conclusions dead: theory was unsat
    supports.insert(supports.end(), falsifiers.begin(), falsifiers.end());
    ChainStep step;
    step.via = ChainStep::Via::Rule;
    step.rule = rule_index;
    step.derived = *survivor;
    step.supports = dedupe(supports);
    int index = static_cast<int>(steps_.size());
    steps_.push_back(std::move(step));
    derive(steps_[static_cast<std::size_t>(index)].derived, index);
    check_target();
    return true;
  }

  static std::vector<Property> dedupe(const std::vector<Property>& props) {
    std::vector<Property> out;
    std::set<PropKey> seen;
    for (const auto& p : props)
      if (seen.insert(key_of(p)).second) out.push_back(p);
    return out;
  }

  void derive(const Property& p, int step_index) {
    if (p.is_boolean) {
      know_.bools[p.atom] = p.truth ? 1 : 0;
      bool_src_[p.atom] = step_index;
      return;
    }
    know_.apply(p);
    numeric_pool_.push_back(p);
    if (p.equal) {
      num_src_[p.atom] = step_index;
      pruned_[p.atom] = {p.value};
      return;
    }
    ne_src_[{p.atom, p.value}] = step_index;
    auto& d = pruned_[p.atom];
    d.erase(std::remove(d.begin(), d.end(), p.value), d.end());
    if (know_.doms[p.atom].size() == 1 && num_src_[p.atom] == -3) {
      emit_elimination(p.atom);
      check_target();
    }
  }

  bool prune() {
    std::vector<const PrunableConstraint*> all;
    for (const auto& c : constraints_) all.push_back(&c);
    auto before = pruned_;
    narrow(all, table_, pruned_, scratch_);
    bool emitted = false;
    for (std::size_t atom = 0; atom < pruned_.size(); ++atom) {
      if (pruned_[atom].size() != 1 || num_src_[atom] != -3) continue;
      emit_elimination(static_cast<int>(atom));
      emitted = true;
      if (check_target()) return true;
    }
    return emitted || pruned_ != before;
  }

  // A domain collapsed to one value without a given or rule behind it: record
  // the elimination with a minimal support set.
  void emit_elimination(int atom) {
    std::int64_t v = pruned_[atom].size() == 1 ? pruned_[atom][0] : know_.doms[atom][0];
    std::vector<Property> pool_props = numeric_pool_;
    std::vector<int> pool_res;
    for (const auto& c : constraints_)
      if (!c.side) pool_res.push_back(c.residual_index);
    // Greedy: drop anything whose absence still collapses the domain.
    for (std::size_t i = 0; i < pool_props.size();) {
      auto trial = pool_props;
      trial.erase(trial.begin() + static_cast<long>(i));
      if (collapses(atom, v, trial, pool_res)) pool_props = std::move(trial);
      else ++i;
    }
    for (std::size_t i = 0; i < pool_res.size();) {
      auto trial = pool_res;
      trial.erase(trial.begin() + static_cast<long>(i));
      if (collapses(atom, v, pool_props, trial)) pool_res = std::move(trial);
      else ++i;
    }
    ChainStep step;
    step.via = ChainStep::Via::Elimination;
    step.derived = num_property(atom, v);
    for (std::int64_t w : table_.domains[atom])
      if (w != v) step.excluded.push_back(num_property(atom, w));
    step.supports = pool_props;
    step.residual_supports = pool_res;
    int index = static_cast<int>(steps_.size());
    num_src_[atom] = index;
    know_.apply(step.derived);
    numeric_pool_.push_back(step.derived);
    steps_.push_back(std::move(step));
  }

  // Would these supports alone (side constraints ambient) still pin atom=v?
  bool collapses(int atom, std::int64_t v, const std::vector<Property>& props,
                 const std::vector<int>& residuals) {
    std::vector<std::vector<std::int64_t>> doms = table_.domains;
    for (const auto& p : props) {
      if (p.equal) {
        if (std::find(doms[p.atom].begin(), doms[p.atom].end(), p.value) == doms[p.atom].end())
          return false;
        doms[p.atom] = {p.value};
      } else {
        auto& d = doms[p.atom];
        d.erase(std::remove(d.begin(), d.end(), p.value), d.end());
      }
    }
    std::vector<const PrunableConstraint*> active;
    for (const auto& c : constraints_) {
      if (c.side || std::find(residuals.begin(), residuals.end(), c.residual_index) !=
                        residuals.end())
        active.push_back(&c);
    }
    narrow(active, table_, doms, scratch_);
    return doms[atom].size() == 1 && doms[atom][0] == v;
  }

  // Target evaluation sees only established knowledge — a pruned-but-unemitted
  // collapse must not settle the verdict before its step exists.
  bool check_target() {
    if (!target_ || determined_) return determined_;
    auto det = eval3(target_->formula, table_, know_.bools, know_.doms, scratch_);
    if (det.state < 0) return false;
    determined_ = true;
    settled_value_ = det.state == 1;
    basis_ = std::move(det.used);
    return true;
  }

  ChainResult finish() {
    Chain chain;
    chain.direction = Chain::Direction::Forward;
    chain.target = target_->formula;
    chain.target_value = settled_value_;
    chain.basis = basis_;
    // Keep only steps on a support path from the basis.
    std::vector<char> needed(steps_.size(), 0);
    std::vector<Property> work = basis_;
    while (!work.empty()) {
      Property p = work.back();
      work.pop_back();
      int src = source_of(p);
      if (src < 0 || needed[src]) continue;
      needed[src] = 1;
      for (const auto& s : steps_[src].supports) work.push_back(s);
    }
    for (std::size_t i = 0; i < steps_.size(); ++i)
      if (needed[i]) chain.steps.push_back(steps_[i]);
    ChainResult out;
    out.outcome = ChainOutcome::Found;
    out.chain = std::move(chain);
    return out;
  }

  int source_of(const Property& p) const {
    if (p.is_boolean) return bool_src_[p.atom];
    if (p.equal) return num_src_[p.atom];
    auto it = ne_src_.find({p.atom, p.value});
    return it == ne_src_.end() ? -3 : it->second;
  }

  const NormalizedTheory& theory_;
  const GroundAtomTable& table_;
  std::optional<ChainTarget> target_;
  const SolverConfig& config_;
  Know know_;
  Model scratch_;
  std::vector<int> bool_src_;  // -3 unknown, -2 given, else step index
  std::vector<int> num_src_;
  std::map<std::pair<int, std::int64_t>, int> ne_src_;
  std::vector<PrunableConstraint> constraints_;
  std::vector<std::vector<std::int64_t>> pruned_{table_.domains};
  std::vector<Property> numeric_pool_;  // known numeric properties, oldest first
  std::vector<ChainStep> steps_;
  bool determined_ = false;
  bool settled_value_ = false;
  std::vector<Property> basis_;
};

// Backward goal search with iterative deepening.
class BackwardEngine {
 public:
  BackwardEngine(const NormalizedTheory& theory, const GroundAtomTable& table,
                 const std::vector<GroundConstraint>& side,
                 const std::vector<Property>& extra_given, const SolverConfig& config)
      : theory_(theory),
        table_(table),
        config_(config),
        scratch_(make_scratch(table)),
        given_(table),
        constraints_(prunable_constraints(theory, table, side)) {
    for (const auto& p : theory.properties) record_given(p);
    for (const auto& p : extra_given) record_given(p);
  }

  ChainResult run(const ChainTarget& target) {
    for (int depth = 1; depth <= config_.backward_depth_limit; ++depth) {
      cycle_seen_ = depth_seen_ = false;
      std::vector<Property> path;
      auto proof = prove_formula(target.formula, target.value, depth, path);
      if (proof) {
        Chain chain;
        chain.direction = Chain::Direction::Backward;
        chain.target = target.formula;
        chain.target_value = target.value;
        chain.basis = proof->second;
        chain.steps = dedupe_steps(proof->first);
        ChainResult out;
        out.outcome = ChainOutcome::Found;
        out.chain = std::move(chain);
        return out;
      }
      if (!depth_seen_) break;  // deeper searches would retrace exactly
    }
    ChainResult out;
    out.outcome = cycle_seen_   ? ChainOutcome::Cycle
                  : depth_seen_ ? ChainOutcome::DepthLimit
                                : ChainOutcome::DeadEnd;
    return out;
  }

 private:
  using Proof = std::pair<std::vector<ChainStep>, std::vector<Property>>;  // steps, basis

  void record_given(const Property& p) {
    given_.apply(p);
    given_props_.insert(key_of(p));
  }

  // Decompose a compound target structurally; no depth is spent here.
  std::optional<Proof> prove_formula(const FormulaPtr& f, bool value, int depth,
                                     std::vector<Property>& path) {
    if (auto lit = literal_of(table_, f, !value)) {
      // Top-level goals that are simply given still show up as a step.
      if (given_.holds(*lit)) {
        ChainStep step;
        step.via = ChainStep::Via::Given;
        step.derived = *lit;
        return Proof{{step}, {*lit}};
      }
      auto steps = prove(*lit, depth, path);
      if (!steps) return std::nullopt;
      return Proof{std::move(*steps), {*lit}};
    }
    switch (f->kind) {
      case Formula::Kind::BoolLit:
        if (f->lit == value) return Proof{{}, {}};
        return std::nullopt;
      case Formula::Kind::Not:
        return prove_formula(f->kids[0], !value, depth, path);
      case Formula::Kind::And:
      case Formula::Kind::Or: {
        bool conjunctive = (f->kind == Formula::Kind::And) == value;
        if (conjunctive) {
          Proof all;
          for (const auto& kid : f->kids) {
            auto part = prove_formula(kid, value, depth, path);
            if (!part) return std::nullopt;
            append(all, *part);
          }
          return all;
        }
        for (const auto& kid : f->kids)
          if (auto part = prove_formula(kid, value, depth, path)) return part;
        return std::nullopt;
      }
      case Formula::Kind::Implies: {
        if (value) {
          if (auto part = prove_formula(f->kids[0], false, depth, path)) return part;
          return prove_formula(f->kids[1], true, depth, path);
        }
        auto a = prove_formula(f->kids[0], true, depth, path);
        if (!a) return std::nullopt;
        auto b = prove_formula(f->kids[1], false, depth, path);
        if (!b) return std::nullopt;
        append(*a, *b);
        return a;
      }
      case Formula::Kind::Iff: {
        for (bool left : {true, false}) {
          auto a = prove_formula(f->kids[0], left, depth, path);
          if (!a) continue;
          auto b = prove_formula(f->kids[1], left == value, depth, path);
          if (!b) continue;
          append(*a, *b);
          return a;
        }
        return std::nullopt;
      }
      default:
        return std::nullopt;  // unsupported goal shape
    }
  }

  static void append(Proof& into, const Proof& from) {
    into.first.insert(into.first.end(), from.first.begin(), from.first.end());
    into.second.insert(into.second.end(), from.second.begin(), from.second.end());
  }

  // Prove one literal goal. Steps come back goal-first; given premises close
  // branches without a step of their own.
  std::optional<std::vector<ChainStep>> prove(const Property& goal, int depth,
                                              std::vector<Property>& path) {
    if (given_.holds(goal)) return std::vector<ChainStep>{};
    for (const auto& p : path)
      if (p == goal) {
        cycle_seen_ = true;
        return std::nullopt;
      }
    if (depth <= 0) {
      depth_seen_ = true;
      return std::nullopt;
    }
    path.push_back(goal);
    for (std::size_t r = 0; r < theory_.rules.size(); ++r) {
      const Rule& rule = theory_.rules[r];
      if (rule.conclusions.size() != 1 || !(rule.conclusions[0] == goal)) continue;
      std::vector<ChainStep> steps;
      ChainStep head;
      head.via = ChainStep::Via::Rule;
      head.rule = static_cast<int>(r);
      head.derived = goal;
      head.supports = rule.premises;
      steps.push_back(std::move(head));
      bool ok = true;
      for (const auto& premise : rule.premises) {
        auto sub = prove(premise, depth - 1, path);
        if (!sub) {
          ok = false;
          break;
        }
        steps.insert(steps.end(), sub->begin(), sub->end());
      }
      if (ok) {
        path.pop_back();
        return steps;
      }
    }
    if (!goal.is_boolean && goal.equal)
      if (auto step = eliminate(goal)) {
        path.pop_back();
        return std::vector<ChainStep>{*step};
      }
    path.pop_back();
    return std::nullopt;
  }

  // Refute every alternative value with a single constraint plus given
  // bindings — the shallow elimination branch.
  std::optional<ChainStep> eliminate(const Property& goal) {
    const auto& full = table_.domains[goal.atom];
    if (full.size() < 2) return std::nullopt;
    std::vector<Property> supports;
    std::vector<int> residuals;
    std::set<PropKey> seen_props;
    std::set<int> seen_res;
    auto cite_prop = [&](const Property& p) {
      if (seen_props.insert(key_of(p)).second) supports.push_back(p);
    };
    ChainStep step;
    step.via = ChainStep::Via::Elimination;
    step.derived = goal;
    for (std::int64_t w : full) {
      if (w == goal.value) continue;
      step.excluded.push_back(num_property(goal.atom, w));
      if (given_props_.count(key_of(num_property(goal.atom, w, false)))) {
        cite_prop(num_property(goal.atom, w, false));
        continue;
      }
      bool refuted = false;
      for (const auto& c : constraints_) {
        if (std::find(c.atoms.begin(), c.atoms.end(), goal.atom) == c.atoms.end()) continue;
        auto outcome = refutes(c, goal.atom, w);
        if (!outcome) continue;
        refuted = true;
        if (!c.side && seen_res.insert(c.residual_index).second)
          residuals.push_back(c.residual_index);
        for (const auto& b : *outcome) cite_prop(b);
        break;
      }
      if (!refuted) return std::nullopt;
    }
    std::sort(residuals.begin(), residuals.end());
    step.supports = std::move(supports);
    step.residual_supports = std::move(residuals);
    return step;
  }

  // Does `c` alone rule out atom=w? First over full domains, then with the
  // given bindings pinned (citing only what the refutation needed).
  std::optional<std::vector<Property>> refutes(const PrunableConstraint& c, int atom,
                                               std::int64_t w) {
    auto doms = table_.domains;
    doms[atom] = {w};
    auto sat = [&]() -> std::optional<bool> {
      std::vector<int> others;
      for (int a : c.atoms)
        if (a != atom) others.push_back(a);
      scratch_.nums[atom] = w;
      return any_joint(others, doms, scratch_,
                       [&](const Model& m) { return evaluate(table_, m, c.formula); });
    };
    auto unconstrained = sat();
    if (unconstrained && !*unconstrained) return std::vector<Property>{};
    std::vector<Property> cited;
    for (int a : c.atoms) {
      if (a == atom) continue;
      if (given_.doms[a].size() == 1) {
        doms[a] = given_.doms[a];
        cited.push_back(num_property(a, doms[a][0]));
      }
    }
    if (cited.empty()) return std::nullopt;
    auto pinned = sat();
    if (pinned && !*pinned) return cited;
    return std::nullopt;
  }

  // Sibling goals can prove the same property twice; keep the copy that
  // verifies first (the last one emitted) so supports precede their steps in
  // dependency order.
  static std::vector<ChainStep> dedupe_steps(const std::vector<ChainStep>& steps) {
    std::set<PropKey> seen;
    std::vector<ChainStep> reversed;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it)
      if (seen.insert(key_of(it->derived)).second) reversed.push_back(*it);
    return {reversed.rbegin(), reversed.rend()};
  }

  const NormalizedTheory& theory_;
  const GroundAtomTable& table_;
  const SolverConfig& config_;
  Model scratch_;
  Know given_;
  std::set<PropKey> given_props_;
  std::vector<PrunableConstraint> constraints_;
  bool cycle_seen_ = false;
  bool depth_seen_ = false;
};

}  // namespace

Property bool_property(int atom, bool truth) {
  Property p;
  p.is_boolean = true;
  p.atom = atom;
  p.truth = truth;
  return p;
}

Property num_property(int atom, std::int64_t value, bool equal) {
  Property p;
  p.is_boolean = false;
  p.atom = atom;
  p.value = value;
  p.equal = equal;
  return p;
}

bool operator==(const Property& a, const Property& b) { return key_of(a) == key_of(b); }

FormulaPtr Property::formula(const GroundAtomTable& table) const {
  if (is_boolean) return bool_assign(table, atom, truth);
  return num_assign(table, atom, value, equal);
}

std::string Property::text(const GroundAtomTable& table) const {
  if (is_boolean) {
    const std::string body = table.booleans[atom].text();
    return truth ? body : "not " + body;
  }
  return table.numerics[atom].text() + (equal ? " = " : " != ") + std::to_string(value);
}

std::string Rule::text(const GroundAtomTable& table) const {
  std::string out;
  for (std::size_t i = 0; i < premises.size(); ++i) {
    if (i) out += " and ";
    out += premises[i].text(table);
  }
  if (!premises.empty()) out += " -> ";
  for (std::size_t i = 0; i < conclusions.size(); ++i) {
    if (i) out += " or ";
    out += conclusions[i].text(table);
  }
  return out;
}

const char* chain_outcome_text(ChainOutcome outcome) {
  switch (outcome) {
    case ChainOutcome::Found: return "found";
    case ChainOutcome::Fixpoint: return "fixpoint";
    case ChainOutcome::Cycle: return "cycle";
    case ChainOutcome::DepthLimit: return "depth-limit";
    case ChainOutcome::DeadEnd: return "dead-end";
  }
  return "dead-end";
}

NormalizedTheory normalize(const GroundAtomTable& table,
                           const std::vector<GroundConstraint>& facts) {
  NormalizedTheory out;
  Clausifier clausifier(table);
  std::set<PropKey> seen_props;
  for (const auto& fact : facts) {
    if (fact.formula->kind == Formula::Kind::BoolLit && fact.formula->lit)
      continue;  // placeholder truths carry nothing
    auto clauses = clausifier.clauses(fact.formula, false);
    bool residual = !clauses.has_value();
    std::vector<Clause> tidied;
    if (clauses) {
      for (const auto& c : *clauses) {
        auto t = tidy(c);
        if (!t) continue;  // tautology or vacuous
        if (t->premises.empty() && t->conclusions.empty()) {
          residual = true;  // the clause form degenerated; let the solver own it
          break;
        }
        tidied.push_back(std::move(*t));
      }
    }
    if (residual) {
      out.residual.push_back(fact);
      continue;
    }
    for (auto& c : tidied) {
      if (c.premises.empty() && c.conclusions.size() == 1) {
        if (seen_props.insert(key_of(c.conclusions[0])).second) {
          out.properties.push_back(c.conclusions[0]);
          out.property_origins.push_back(fact.origin);
        }
        continue;
      }
      Rule rule;
      rule.premises = std::move(c.premises);
      rule.conclusions = std::move(c.conclusions);
      rule.origin = fact.origin;
      out.rules.push_back(std::move(rule));
    }
  }
  return out;
}

QueryPlan query_as_rule(const FormulaPtr& query, const GroundAtomTable& table) {
  QueryPlan plan;
  plan.target = query;
  if (!query) return plan;
  while (plan.target->kind == Formula::Kind::Implies) {
    // Antecedents must decompose into literals; otherwise leave the query be.
    std::vector<Property> extras;
    std::vector<FormulaPtr> work{plan.target->kids[0]};
    bool ok = true;
    while (!work.empty() && ok) {
      FormulaPtr f = work.back();
      work.pop_back();
      if (f->kind == Formula::Kind::And) {
        // push right-to-left so conjuncts pop in reading order
        for (auto it = f->kids.rbegin(); it != f->kids.rend(); ++it) work.push_back(*it);
        continue;
      }
      auto lit = literal_of(table, f, false);
      if (!lit) ok = false;
      else extras.push_back(*lit);
    }
    if (!ok) break;
    plan.extra_given.insert(plan.extra_given.end(), extras.begin(), extras.end());
    plan.target = plan.target->kids[1];
  }
  return plan;
}

ChainResult forward_chain(const NormalizedTheory& theory, const GroundAtomTable& table,
                          const std::vector<GroundConstraint>& side,
                          const std::optional<ChainTarget>& target,
                          const std::vector<Property>& extra_given,
                          const SolverConfig& config) {
  ForwardEngine engine(theory, table, side, target, extra_given, config);
  return engine.run();
}

ChainResult backward_chain(const NormalizedTheory& theory, const GroundAtomTable& table,
                           const std::vector<GroundConstraint>& side,
                           const std::optional<ChainTarget>& target,
                           const std::vector<Property>& extra_given,
                           const SolverConfig& config) {
  if (!target || !target->formula) {
    ChainResult out;
    out.outcome = ChainOutcome::DeadEnd;
    return out;
  }
  BackwardEngine engine(theory, table, side, extra_given, config);
  return engine.run(*target);
}

ChainCheck verify_chain(const Chain& chain, const NormalizedTheory& theory,
                        const GroundAtomTable& table,
                        const std::vector<GroundConstraint>& side,
                        const std::vector<Property>& extra_given,
                        const std::optional<ChainTarget>& expected,
                        const SolverConfig& config) {
  auto fail = [](int step, std::string why) {
    ChainCheck c;
    c.pass = false;
    c.step = step;
    c.why = std::move(why);
    return c;
  };
  Know know(table);
  std::set<PropKey> given;
  for (const auto& p : theory.properties) {
    know.apply(p);
    given.insert(key_of(p));
  }
  for (const auto& p : extra_given) {
    know.apply(p);
    given.insert(key_of(p));
  }
  Solver checker(table, config);
  for (const auto& s : side) checker.add(s.formula);

  // Backward chains list the goal first; replay them leaves-first.
  std::vector<int> order(chain.steps.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = chain.direction == Chain::Direction::Forward
                   ? static_cast<int>(i)
                   : static_cast<int>(order.size() - 1 - i);

  for (int index : order) {
    const ChainStep& step = chain.steps[static_cast<std::size_t>(index)];
    for (const auto& s : step.supports)
      if (!know.holds(s)) return fail(index, "support not yet known: " + s.text(table));
    switch (step.via) {
      case ChainStep::Via::Given:
        if (!given.count(key_of(step.derived)))
          return fail(index, "claimed as given: " + step.derived.text(table));
        break;
      case ChainStep::Via::Rule: {
        if (step.rule < 0 || step.rule >= static_cast<int>(theory.rules.size()))
          return fail(index, "no such rule");
        const Rule& rule = theory.rules[static_cast<std::size_t>(step.rule)];
        std::set<PropKey> supports;
        for (const auto& s : step.supports) supports.insert(key_of(s));
        bool concluded = false;
        for (const auto& c : rule.conclusions) {
          if (c == step.derived) {
            concluded = true;
            continue;
          }
          if (!know.falsifier(c))
            return fail(index, "conclusion still live: " + c.text(table));
        }
        if (!concluded) return fail(index, "rule does not conclude the derived property");
        for (const auto& p : rule.premises) {
          if (!supports.count(key_of(p)))
            return fail(index, "premise missing from supports: " + p.text(table));
          if (!know.holds(p)) return fail(index, "premise not known: " + p.text(table));
        }
        break;
      }
      case ChainStep::Via::Elimination: {
        if (step.derived.is_boolean || !step.derived.equal)
          return fail(index, "elimination must derive a numeric binding");
        std::set<std::int64_t> excluded;
        for (const auto& e : step.excluded) {
          if (e.is_boolean || e.atom != step.derived.atom || !e.equal)
            return fail(index, "excluded entry off the derived atom");
          excluded.insert(e.value);
        }
        std::set<std::int64_t> rest(table.domains[step.derived.atom].begin(),
                                    table.domains[step.derived.atom].end());
        rest.erase(step.derived.value);
        if (excluded != rest) return fail(index, "excluded set does not cover the domain");
        std::vector<FormulaPtr> extras;
        for (const auto& s : step.supports) extras.push_back(s.formula(table));
        for (int r : step.residual_supports) {
          if (r < 0 || r >= static_cast<int>(theory.residual.size()))
            return fail(index, "no such residual constraint");
          extras.push_back(theory.residual[static_cast<std::size_t>(r)].formula);
        }
        extras.push_back(num_assign(table, step.derived.atom, step.derived.value, false));
        if (checker.check(extras).sat)
          return fail(index, "supports do not entail the binding");
        extras.back() = num_assign(table, step.derived.atom, step.derived.value, true);
        if (!checker.check(extras).sat)
          return fail(index, "supports contradict the binding");
        break;
      }
    }
    know.apply(step.derived);
  }

  // Connectivity: every derivation must feed a later step or the conclusion.
  std::set<PropKey> consumers;
  for (const auto& p : chain.basis) consumers.insert(key_of(p));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const ChainStep& step = chain.steps[static_cast<std::size_t>(*it)];
    if (!consumers.count(key_of(step.derived)))
      return fail(*it, "derived property is never used");
    for (const auto& s : step.supports) consumers.insert(key_of(s));
  }
  for (const auto& p : chain.basis)
    if (!know.holds(p)) return fail(-1, "conclusion basis not established: " + p.text(table));
  if (chain.target) {
    Model scratch = make_scratch(table);
    auto det = eval3(chain.target, table, know.bools, know.doms, scratch);
    if (det.state < 0 || (det.state == 1) != chain.target_value)
      return fail(-1, "steps do not settle the target as claimed");
  }
  if (expected) {
    if (!equal(chain.target, expected->formula) || chain.target_value != expected->value)
      return fail(-1, "conclusion differs from the verdict");
  }
  return {};
}

ChainSet generate_chains(const Problem& problem, const Grounding& grounding,
                         const SoftOutcome& outcome, const SolverConfig& config) {
  ChainSet set;
  std::vector<GroundConstraint> kept;
  for (int i : outcome.kept) kept.push_back(grounding.facts[static_cast<std::size_t>(i)]);
  set.theory = normalize(grounding.table, kept);
  if (problem.query.kind == QuerySpec::Kind::Boolean)
    set.plan = query_as_rule(grounding.query, grounding.table);

  using VK = Verdict::Kind;
  switch (outcome.verdict.kind) {
    case VK::True:
      set.target = ChainTarget{set.plan.target, true};
      break;
    case VK::False:
      set.target = ChainTarget{set.plan.target, false};
      break;
    case VK::Option:
      // A repair verdict names an option the restored theory itself refutes;
      // chains would only contradict it, so none are attempted.
      if (outcome.case_taken != 2) {
        for (const auto& [label, formula] : grounding.candidates)
          if (label == outcome.verdict.label) set.target = ChainTarget{formula, true};
      }
      break;
    case VK::ValueSet:
      if (outcome.verdict.values.size() == 1 && grounding.numeric_target >= 0)
        set.target = ChainTarget{
            num_assign(grounding.table, grounding.numeric_target, outcome.verdict.values[0]),
            true};
      break;
    case VK::Unknown:
    case VK::Fallback:
      break;
  }

  set.forward = forward_chain(set.theory, grounding.table, grounding.side, set.target,
                              set.plan.extra_given, config);
  if (set.target) {
    set.backward = backward_chain(set.theory, grounding.table, grounding.side, set.target,
                                  set.plan.extra_given, config);
  } else if (outcome.verdict.kind == VK::Unknown && set.plan.target) {
    // Nothing is provable, but the search still reports how it failed.
    auto merge = [](ChainOutcome a, ChainOutcome b) {
      auto rank = [](ChainOutcome o) {
        switch (o) {
          case ChainOutcome::Cycle: return 3;
          case ChainOutcome::DepthLimit: return 2;
          default: return 1;
        }
      };
      return rank(a) >= rank(b) ? a : b;
    };
    auto pro = backward_chain(set.theory, grounding.table, grounding.side,
                              ChainTarget{set.plan.target, true}, set.plan.extra_given, config);
    auto con = backward_chain(set.theory, grounding.table, grounding.side,
                              ChainTarget{set.plan.target, false}, set.plan.extra_given, config);
    if (pro.outcome == ChainOutcome::Found) set.backward = std::move(pro);
    else if (con.outcome == ChainOutcome::Found) set.backward = std::move(con);
    else set.backward.outcome = merge(pro.outcome, con.outcome);
  } else {
    set.backward.outcome = ChainOutcome::DeadEnd;
  }
  return set;
}

}  // namespace softlogic
