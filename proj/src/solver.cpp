#include "softlogic/solver.hpp"

#include <algorithm>
#include <numeric>

namespace softlogic {

namespace detail {

// --- exact rational arithmetic -------------------------------------------
//
// Comparisons are decided exactly: / is rational division, // floors, ** needs
// a nonnegative integer exponent. Anything undefined or overflowing makes the
// enclosing comparison false rather than poisoning the search.

struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;  // > 0
};

enum class NumState { Val, Unknown, Undef };

struct NumResult {
  NumState state = NumState::Undef;
  Rat v;
  static NumResult unknown() { return {NumState::Unknown, {}}; }
  static NumResult undef() { return {NumState::Undef, {}}; }
  static NumResult val(Rat r) { return {NumState::Val, r}; }
};

constexpr std::int64_t kLimit = (std::int64_t{1} << 62);

bool reduce(Rat& r) {
  if (r.den == 0) return false;
  if (r.den < 0) { r.num = -r.num; r.den = -r.den; }
  std::int64_t g = std::gcd(r.num < 0 ? -r.num : r.num, r.den);
  if (g > 1) { r.num /= g; r.den /= g; }
  return std::abs(r.num) < kLimit && r.den < kLimit;
}

bool make(__int128 num, __int128 den, Rat& out) {
  if (den == 0) return false;
  if (num > -kLimit && num < kLimit && den > -kLimit && den < kLimit) {
    out.num = static_cast<std::int64_t>(num);
    out.den = static_cast<std::int64_t>(den);
    return reduce(out);
  }
  // try reducing in 128 bits before giving up
  __int128 a = num < 0 ? -num : num, b = den < 0 ? -den : den;
  while (b) { __int128 t = a % b; a = b; b = t; }
  if (a > 1) { num /= a; den /= a; }
  if (num <= -kLimit || num >= kLimit || den <= -kLimit || den >= kLimit) return false;
  out.num = static_cast<std::int64_t>(num);
  out.den = static_cast<std::int64_t>(den);
  return reduce(out);
}

NumResult rat_op(ArithOp op, const Rat& a, const Rat& b) {
  Rat out;
  switch (op) {
    case ArithOp::Add:
      if (!make(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                static_cast<__int128>(a.den) * b.den, out))
        return NumResult::undef();
      return NumResult::val(out);
    case ArithOp::Sub:
      if (!make(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                static_cast<__int128>(a.den) * b.den, out))
        return NumResult::undef();
      return NumResult::val(out);
    case ArithOp::Mul:
      if (!make(static_cast<__int128>(a.num) * b.num,
                static_cast<__int128>(a.den) * b.den, out))
        return NumResult::undef();
      return NumResult::val(out);
    case ArithOp::Div:
      if (b.num == 0) return NumResult::undef();
      if (!make(static_cast<__int128>(a.num) * b.den,
                static_cast<__int128>(a.den) * b.num, out))
        return NumResult::undef();
      return NumResult::val(out);
    case ArithOp::FloorDiv: {
      if (b.num == 0) return NumResult::undef();
      __int128 num = static_cast<__int128>(a.num) * b.den;
      __int128 den = static_cast<__int128>(a.den) * b.num;
      if (den < 0) { num = -num; den = -den; }
      __int128 q = num / den;
      if (num % den != 0 && num < 0) --q;
      if (!make(q, 1, out)) return NumResult::undef();
      return NumResult::val(out);
    }
    case ArithOp::Pow: {
      if (b.den != 1 || b.num < 0 || b.num > 63) return NumResult::undef();
      __int128 pn = 1, pd = 1;
      for (std::int64_t i = 0; i < b.num; ++i) {
        pn *= a.num;
        pd *= a.den;
        if (pn <= -static_cast<__int128>(kLimit) || pn >= static_cast<__int128>(kLimit) ||
            pd >= static_cast<__int128>(kLimit))
          return NumResult::undef();
      }
      if (!make(pn, pd, out)) return NumResult::undef();
      return NumResult::val(out);
    }
  }
  return NumResult::undef();
}

int rat_compare(const Rat& a, const Rat& b) {
  __int128 l = static_cast<__int128>(a.num) * b.den;
  __int128 r = static_cast<__int128>(b.num) * a.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

bool compare_holds(CompareOp op, const Rat& a, const Rat& b) {
  int c = rat_compare(a, b);
  switch (op) {
    case CompareOp::Lt: return c < 0;
    case CompareOp::Gt: return c > 0;
    case CompareOp::Le: return c <= 0;
    case CompareOp::Ge: return c >= 0;
    case CompareOp::Eq: return c == 0;
    case CompareOp::Ne: return c != 0;
  }
  return false;
}

// --- compiled constraints --------------------------------------------------

struct CNum {
  NumExpr::Kind kind;
  std::int64_t value = 0;  // Const
  int atom = -1;           // Atom: numeric table index
  ArithOp op{};
  std::unique_ptr<CNum> lhs, rhs;
};

struct CF {
  Formula::Kind kind;
  int atom = -1;  // Atom: boolean table index
  bool lit = false;
  CompareOp cmp{};
  std::unique_ptr<CNum> lhs, rhs;
  std::vector<CF> kids;
};

struct CompiledConstraint {
  CF root;
  std::vector<int> bool_atoms;  // mentioned atoms, deduplicated
  std::vector<int> num_atoms;
};

struct CompileCtx {
  const GroundAtomTable& table;
  std::vector<int>* bools;
  std::vector<int>* nums;
};

std::unique_ptr<CNum> compile_num(const NumExprPtr& e, CompileCtx& ctx) {
  auto out = std::make_unique<CNum>();
  out->kind = e->kind;
  switch (e->kind) {
    case NumExpr::Kind::Const:
      out->value = e->value;
      break;
    case NumExpr::Kind::Atom: {
      GroundAtom ga{e->atom.name, e->atom.args.empty() ? "" : e->atom.args[0]};
      out->atom = ctx.table.numeric_index(ga);
      if (out->atom < 0) throw MissingAtom(ga.text());
      if (ctx.nums) ctx.nums->push_back(out->atom);
      break;
    }
    case NumExpr::Kind::Arith:
      out->op = e->op;
      out->lhs = compile_num(e->lhs, ctx);
      out->rhs = compile_num(e->rhs, ctx);
      break;
  }
  return out;
}

CF compile_formula(const FormulaPtr& f, CompileCtx& ctx) {
  CF out;
  out.kind = f->kind;
  switch (f->kind) {
    case Formula::Kind::Atom: {
      GroundAtom ga{f->atom.name, f->atom.args.empty() ? "" : f->atom.args[0]};
      out.atom = ctx.table.boolean_index(ga);
      if (out.atom < 0) {
        // an atom the sort map sent to the numeric side cannot appear here
        throw MissingAtom(ga.text());
      }
      if (ctx.bools) ctx.bools->push_back(out.atom);
      break;
    }
    case Formula::Kind::BoolLit:
      out.lit = f->lit;
      break;
    case Formula::Kind::Compare:
      out.cmp = f->cmp;
      out.lhs = compile_num(f->lhs, ctx);
      out.rhs = compile_num(f->rhs, ctx);
      break;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      throw InvariantViolation("quantifier reached the solver ungrounded");
    default:
      out.kids.reserve(f->kids.size());
      for (auto& k : f->kids) out.kids.push_back(compile_formula(k, ctx));
      break;
  }
  return out;
}

std::unique_ptr<CompiledConstraint> compile(const FormulaPtr& f, const GroundAtomTable& table) {
  auto cc = std::make_unique<CompiledConstraint>();
  CompileCtx ctx{table, &cc->bool_atoms, &cc->num_atoms};
  cc->root = compile_formula(f, ctx);
  auto dedupe = [](std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedupe(cc->bool_atoms);
  dedupe(cc->num_atoms);
  return cc;
}

// --- three-valued evaluation ------------------------------------------------

constexpr int kFalse = 0, kTrue = 1, kUnknown = 2;

struct Partial {
  std::vector<signed char> bools;        // -1 unassigned
  std::vector<std::int64_t> nums;        // meaningful when assigned
  std::vector<signed char> num_assigned;
};

NumResult eval_num(const CNum& e, const Partial& p) {
  switch (e.kind) {
    case NumExpr::Kind::Const:
      return NumResult::val({e.value, 1});
    case NumExpr::Kind::Atom:
      if (!p.num_assigned[e.atom]) return NumResult::unknown();
      return NumResult::val({p.nums[e.atom], 1});
    case NumExpr::Kind::Arith: {
      NumResult l = eval_num(*e.lhs, p);
      if (l.state == NumState::Unknown) return l;
      NumResult r = eval_num(*e.rhs, p);
      if (r.state == NumState::Unknown) return r;
      if (l.state == NumState::Undef || r.state == NumState::Undef)
        return NumResult::undef();
      return rat_op(e.op, l.v, r.v);
    }
  }
  return NumResult::undef();
}

int eval3(const CF& f, const Partial& p) {
  switch (f.kind) {
    case Formula::Kind::Atom: {
      signed char b = p.bools[f.atom];
      return b < 0 ? kUnknown : b;
    }
    case Formula::Kind::BoolLit:
      return f.lit ? kTrue : kFalse;
    case Formula::Kind::Not: {
      int v = eval3(f.kids[0], p);
      return v == kUnknown ? kUnknown : 1 - v;
    }
    case Formula::Kind::And: {
      int acc = kTrue;
      for (const auto& k : f.kids) {
        int v = eval3(k, p);
        if (v == kFalse) return kFalse;
        if (v == kUnknown) acc = kUnknown;
      }
      return acc;
    }
    case Formula::Kind::Or: {
      int acc = kFalse;
      for (const auto& k : f.kids) {
        int v = eval3(k, p);
        if (v == kTrue) return kTrue;
        if (v == kUnknown) acc = kUnknown;
      }
      return acc;
    }
    case Formula::Kind::Implies: {
      int a = eval3(f.kids[0], p);
      if (a == kFalse) return kTrue;
      int b = eval3(f.kids[1], p);
      if (b == kTrue) return kTrue;
      if (a == kUnknown || b == kUnknown) return kUnknown;
      return kFalse;
    }
    case Formula::Kind::Iff: {
      int a = eval3(f.kids[0], p);
      int b = eval3(f.kids[1], p);
      if (a == kUnknown || b == kUnknown) return kUnknown;
      return a == b ? kTrue : kFalse;
    }
    case Formula::Kind::Compare: {
      NumResult l = eval_num(*f.lhs, p);
      if (l.state == NumState::Unknown) return kUnknown;
      NumResult r = eval_num(*f.rhs, p);
      if (r.state == NumState::Unknown) return kUnknown;
      if (l.state == NumState::Undef || r.state == NumState::Undef) return kFalse;
      return compare_holds(f.cmp, l.v, r.v) ? kTrue : kFalse;
    }
    default:
      return kUnknown;
  }
}

}  // namespace detail

using detail::CompiledConstraint;

Solver::Solver(const GroundAtomTable& table, const SolverConfig& config)
    : table_(&table), config_(config) {}
Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;

void Solver::add(const FormulaPtr& constraint) {
  permanent_.push_back(detail::compile(constraint, *table_));
}

namespace {

struct Search {
  const GroundAtomTable& table;
  std::vector<const CompiledConstraint*> all;
  // per atom: constraints to re-check when it gets assigned
  std::vector<std::vector<int>> bool_watch;
  std::vector<std::vector<int>> num_watch;
  detail::Partial partial;
  std::int64_t nodes = 0;
  std::int64_t budget;

  Search(const GroundAtomTable& t, std::int64_t b) : table(t), budget(b) {
    bool_watch.resize(t.booleans.size());
    num_watch.resize(t.numerics.size());
    partial.bools.assign(t.booleans.size(), -1);
    partial.nums.assign(t.numerics.size(), 0);
    partial.num_assigned.assign(t.numerics.size(), 0);
  }

  void wire(const CompiledConstraint* cc) {
    int id = static_cast<int>(all.size());
    all.push_back(cc);
    for (int a : cc->bool_atoms) bool_watch[a].push_back(id);
    for (int a : cc->num_atoms) num_watch[a].push_back(id);
  }

  bool consistent_after(const std::vector<int>& watched) {
    for (int id : watched)
      if (detail::eval3(all[id]->root, partial) == detail::kFalse) return false;
    return true;
  }

  // Assign atoms in canonical order; first full model found is the least one.
  bool dfs(std::size_t var) {
    std::size_t nb = table.booleans.size();
    if (var == nb + table.numerics.size()) return true;
    if (var < nb) {
      for (int v = 0; v <= 1; ++v) {
        if (++nodes > budget) throw BudgetExceeded();
        partial.bools[var] = static_cast<signed char>(v);
        if (consistent_after(bool_watch[var]) && dfs(var + 1)) return true;
      }
      partial.bools[var] = -1;
      return false;
    }
    std::size_t ni = var - nb;
    for (std::int64_t v : table.domains[ni]) {
      if (++nodes > budget) throw BudgetExceeded();
      partial.nums[ni] = v;
      partial.num_assigned[ni] = 1;
      if (consistent_after(num_watch[ni]) && dfs(var + 1)) return true;
    }
    partial.num_assigned[ni] = 0;
    return false;
  }
};

}  // namespace

SatResult Solver::check(const std::vector<FormulaPtr>& extra) const {
  Search search(*table_, config_.node_budget);
  for (const auto& cc : permanent_) search.wire(cc.get());
  std::vector<std::unique_ptr<CompiledConstraint>> extras;
  extras.reserve(extra.size());
  for (const auto& f : extra) {
    extras.push_back(detail::compile(f, *table_));
    search.wire(extras.back().get());
  }

  // constraints false with nothing assigned (constant contradictions)
  for (const auto* cc : search.all)
    if (detail::eval3(cc->root, search.partial) == detail::kFalse) return {false, {}};

  if (!search.dfs(0)) return {false, {}};

  SatResult out;
  out.sat = true;
  out.model.bools.assign(search.partial.bools.begin(), search.partial.bools.end());
  out.model.nums = search.partial.nums;

  // self-check: the model must satisfy every constraint it was built from
  for (const auto* cc : search.all)
    if (detail::eval3(cc->root, search.partial) != detail::kTrue)
      throw InvariantViolation("model fails its own constraints");
  return out;
}

Entailment Solver::entail_boolean(const FormulaPtr& q,
                                  const std::vector<FormulaPtr>& extra) const {
  std::vector<FormulaPtr> with_q = extra;
  with_q.push_back(q);
  bool sat_q = check(with_q).sat;
  std::vector<FormulaPtr> with_nq = extra;
  with_nq.push_back(Formula::negate(q));
  bool sat_nq = check(with_nq).sat;
  if (sat_q && sat_nq) return Entailment::Unknown;
  if (sat_q) return Entailment::True;
  if (sat_nq) return Entailment::False;
  throw InvariantViolation("query and its negation both unsatisfiable");
}

std::vector<std::int64_t> Solver::solve_numeric(int num_index,
                                                const std::vector<FormulaPtr>& extra) const {
  std::vector<std::int64_t> out;
  for (std::int64_t v : table_->domains[num_index]) {
    std::vector<FormulaPtr> with_v = extra;
    with_v.push_back(num_assign(*table_, num_index, v));
    if (check(with_v).sat) out.push_back(v);
  }
  return out;
}

bool evaluate(const GroundAtomTable& table, const Model& model, const FormulaPtr& f) {
  auto cc = detail::compile(f, table);
  detail::Partial p;
  p.bools.assign(model.bools.begin(), model.bools.end());
  p.nums = model.nums;
  p.num_assigned.assign(model.nums.size(), 1);
  int v = detail::eval3(cc->root, p);
  if (v == detail::kUnknown)
    throw InvariantViolation("total model evaluated to unknown");
  return v == detail::kTrue;
}

FormulaPtr bool_assign(const GroundAtomTable& table, int bool_index, bool value) {
  const GroundAtom& ga = table.booleans[bool_index];
  PredicateAtom a{ga.name, {}, false, Sort::Boolean};
  if (!ga.arg.empty()) a.args.push_back(ga.arg);
  FormulaPtr f = Formula::make_atom(std::move(a));
  return value ? f : Formula::negate(f);
}

FormulaPtr num_assign(const GroundAtomTable& table, int num_index, std::int64_t value,
                      bool equal) {
  const GroundAtom& ga = table.numerics[num_index];
  PredicateAtom a{ga.name, {}, false, Sort::Numeric};
  if (!ga.arg.empty()) a.args.push_back(ga.arg);
  return Formula::compare(equal ? CompareOp::Eq : CompareOp::Ne,
                          NumExpr::make_atom(std::move(a)), NumExpr::constant(value));
}

}  // namespace softlogic
