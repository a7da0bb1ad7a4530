#include "softlogic/ground.hpp"

#include <algorithm>
#include <set>

namespace softlogic {

namespace {

std::string atom_key(const std::string& name, const std::string& arg) {
  return name + "\x1f" + arg;
}

NumExprPtr subst_num(const NumExprPtr& e, const std::string& var, const std::string& obj) {
  switch (e->kind) {
    case NumExpr::Kind::Const:
      return e;
    case NumExpr::Kind::Atom: {
      if (!e->atom.arg_is_var || e->atom.args.empty() || e->atom.args[0] != var) return e;
      PredicateAtom a = e->atom;
      a.args[0] = obj;
      a.arg_is_var = false;
      return NumExpr::make_atom(std::move(a));
    }
    case NumExpr::Kind::Arith:
      return NumExpr::arith(e->op, subst_num(e->lhs, var, obj), subst_num(e->rhs, var, obj));
  }
  return e;
}

FormulaPtr subst(const FormulaPtr& f, const std::string& var, const std::string& obj) {
  switch (f->kind) {
    case Formula::Kind::Atom: {
      if (!f->atom.arg_is_var || f->atom.args.empty() || f->atom.args[0] != var) return f;
      PredicateAtom a = f->atom;
      a.args[0] = obj;
      a.arg_is_var = false;
      return Formula::make_atom(std::move(a));
    }
    case Formula::Kind::BoolLit:
      return f;
    case Formula::Kind::Compare:
      return Formula::compare(f->cmp, subst_num(f->lhs, var, obj), subst_num(f->rhs, var, obj));
    case Formula::Kind::Not:
      return Formula::negate(subst(f->kids[0], var, obj));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      FormulaList kids;
      kids.reserve(f->kids.size());
      for (auto& k : f->kids) kids.push_back(subst(k, var, obj));
      return f->kind == Formula::Kind::And ? Formula::conj(std::move(kids))
                                           : Formula::disj(std::move(kids));
    }
    case Formula::Kind::Implies:
      return Formula::implies(subst(f->kids[0], var, obj), subst(f->kids[1], var, obj));
    case Formula::Kind::Iff:
      return Formula::iff(subst(f->kids[0], var, obj), subst(f->kids[1], var, obj));
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      // parser rejects nested quantifiers; shadowing cannot happen
      return f;
  }
  return f;
}

struct TableBuilder {
  GroundAtomTable table;
  const std::map<std::string, Sort>& sorts;

  explicit TableBuilder(const std::map<std::string, Sort>& s) : sorts(s) {}

  void add_atom(const PredicateAtom& atom) {
    GroundAtom ga{atom.name, atom.args.empty() ? "" : atom.args[0]};
    std::string key = atom_key(ga.name, ga.arg);
    auto it = sorts.find(atom.name);
    Sort sort = it != sorts.end() ? it->second : atom.sort;
    if (sort == Sort::Numeric) {
      if (table.num_ids.emplace(key, static_cast<int>(table.numerics.size())).second)
        table.numerics.push_back(ga);
    } else {
      if (table.bool_ids.emplace(key, static_cast<int>(table.booleans.size())).second)
        table.booleans.push_back(ga);
    }
  }

  void scan_num(const NumExprPtr& e) {
    switch (e->kind) {
      case NumExpr::Kind::Atom: add_atom(e->atom); break;
      case NumExpr::Kind::Arith: scan_num(e->lhs); scan_num(e->rhs); break;
      default: break;
    }
  }

  void scan(const FormulaPtr& f) {
    if (!f) return;
    switch (f->kind) {
      case Formula::Kind::Atom: add_atom(f->atom); break;
      case Formula::Kind::Compare: scan_num(f->lhs); scan_num(f->rhs); break;
      default:
        for (auto& k : f->kids) scan(k);
        break;
    }
  }
};

void collect_constants(const NumExprPtr& e, std::set<std::int64_t>& out) {
  switch (e->kind) {
    case NumExpr::Kind::Const: out.insert(e->value); break;
    case NumExpr::Kind::Arith:
      collect_constants(e->lhs, out);
      collect_constants(e->rhs, out);
      break;
    default: break;
  }
}

void collect_constants(const FormulaPtr& f, std::set<std::int64_t>& out) {
  if (!f) return;
  if (f->kind == Formula::Kind::Compare) {
    collect_constants(f->lhs, out);
    collect_constants(f->rhs, out);
    return;
  }
  for (auto& k : f->kids) collect_constants(k, out);
}

// Integer-valued results of one arithmetic step over the constant pool.
void one_step_closure(const std::set<std::int64_t>& base, std::set<std::int64_t>& out) {
  for (std::int64_t a : base) {
    for (std::int64_t b : base) {
      out.insert(a + b);
      out.insert(a - b);
      if (a == 0 || (std::abs(a) <= (1LL << 31) && std::abs(b) <= (1LL << 31)))
        out.insert(a * b);
      if (b != 0) {
        // floor division
        std::int64_t q = a / b;
        if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
        out.insert(q);
        if (a % b == 0) out.insert(a / b);  // exact division
      }
      if (b >= 0 && b <= 12 && std::abs(a) <= 1000) {
        std::int64_t p = 1;
        bool ok = true;
        for (std::int64_t i = 0; i < b; ++i) {
          p *= a;
          if (std::abs(p) > (1LL << 40)) { ok = false; break; }
        }
        if (ok) out.insert(p);
      }
    }
  }
}

}  // namespace

int GroundAtomTable::boolean_index(const GroundAtom& a) const {
  auto it = bool_ids.find(atom_key(a.name, a.arg));
  return it == bool_ids.end() ? -1 : it->second;
}

int GroundAtomTable::numeric_index(const GroundAtom& a) const {
  auto it = num_ids.find(atom_key(a.name, a.arg));
  return it == num_ids.end() ? -1 : it->second;
}

FormulaPtr ground_formula(const FormulaPtr& f, const std::vector<std::string>& objects) {
  switch (f->kind) {
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      bool universal = f->kind == Formula::Kind::Forall;
      if (objects.empty()) return Formula::bool_lit(universal);
      FormulaList parts;
      parts.reserve(objects.size());
      for (const auto& obj : objects)
        parts.push_back(ground_formula(subst(f->kids[0], f->var, obj), objects));
      return universal ? Formula::conj(std::move(parts)) : Formula::disj(std::move(parts));
    }
    case Formula::Kind::Not:
      return Formula::negate(ground_formula(f->kids[0], objects));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      FormulaList kids;
      kids.reserve(f->kids.size());
      for (auto& k : f->kids) kids.push_back(ground_formula(k, objects));
      return f->kind == Formula::Kind::And ? Formula::conj(std::move(kids))
                                           : Formula::disj(std::move(kids));
    }
    case Formula::Kind::Implies:
      return Formula::implies(ground_formula(f->kids[0], objects),
                              ground_formula(f->kids[1], objects));
    case Formula::Kind::Iff:
      return Formula::iff(ground_formula(f->kids[0], objects),
                          ground_formula(f->kids[1], objects));
    default:
      return f;
  }
}

Grounding ground(const Problem& problem, const SanitizedFactSet& sanitized,
                 const SolverConfig& config) {
  if (!problem.sort_conflicts.empty()) throw SortConflict(problem.sort_conflicts.front());

  Grounding g;
  g.facts.reserve(sanitized.facts.size());
  for (const auto& wf : sanitized.facts)
    g.facts.push_back({ground_formula(wf.formula, problem.objects), wf.index});

  switch (problem.query.kind) {
    case QuerySpec::Kind::Boolean:
      if (problem.query.boolean_query)
        g.query = ground_formula(problem.query.boolean_query, problem.objects);
      break;
    case QuerySpec::Kind::Candidates:
      for (const auto& [label, f] : problem.query.candidates)
        g.candidates.emplace_back(label, ground_formula(f, problem.objects));
      break;
    case QuerySpec::Kind::FreeNumeric:
      break;  // resolved to an index below
  }

  TableBuilder builder(problem.sorts);
  for (const auto& c : g.facts) builder.scan(c.formula);
  if (g.query) builder.scan(g.query);
  for (const auto& [label, f] : g.candidates) builder.scan(f);
  if (problem.query.kind == QuerySpec::Kind::FreeNumeric)
    builder.add_atom(problem.query.numeric_target);
  g.table = std::move(builder.table);

  if (problem.query.kind == QuerySpec::Kind::FreeNumeric) {
    const auto& atom = problem.query.numeric_target;
    g.numeric_target = g.table.numeric_index(
        GroundAtom{atom.name, atom.args.empty() ? "" : atom.args[0]});
  }

  // Numeric domains. Pos atoms (the ordering schema) live on 1..n; everything
  // else gets the problem's integer constants closed under one arithmetic
  // step, clamped to the configured range.
  std::set<std::int64_t> constants;
  for (const auto& c : g.facts) collect_constants(c.formula, constants);
  if (g.query) collect_constants(g.query, constants);
  for (const auto& [label, f] : g.candidates) collect_constants(f, constants);

  std::set<std::int64_t> derived = constants;
  one_step_closure(constants, derived);

  std::int64_t n = static_cast<std::int64_t>(problem.objects.size());
  g.table.domains.resize(g.table.numerics.size());
  for (std::size_t i = 0; i < g.table.numerics.size(); ++i) {
    const GroundAtom& atom = g.table.numerics[i];
    auto it = config.domain_override.find(atom.text());
    std::vector<std::int64_t> dom;
    if (it != config.domain_override.end()) {
      dom = it->second;
      std::sort(dom.begin(), dom.end());
      dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
    } else if (atom.name == "Pos") {
      for (std::int64_t v = 1; v <= n; ++v) dom.push_back(v);
    } else {
      for (std::int64_t v : derived)
        if (v >= config.domain_clamp_lo && v <= config.domain_clamp_hi) dom.push_back(v);
    }
    if (dom.empty()) throw DomainEmpty(atom.text());
    g.table.domains[i] = std::move(dom);
  }

  if (problem.schema == SchemaKind::Ordering) {
    std::vector<int> pos_atoms;
    for (std::size_t i = 0; i < g.table.numerics.size(); ++i)
      if (g.table.numerics[i].name == "Pos") pos_atoms.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < pos_atoms.size(); ++i) {
      for (std::size_t j = i + 1; j < pos_atoms.size(); ++j) {
        PredicateAtom a{g.table.numerics[pos_atoms[i]].name,
                        {g.table.numerics[pos_atoms[i]].arg}, false, Sort::Numeric};
        PredicateAtom b{g.table.numerics[pos_atoms[j]].name,
                        {g.table.numerics[pos_atoms[j]].arg}, false, Sort::Numeric};
        if (a.args.front().empty()) a.args.clear();
        if (b.args.front().empty()) b.args.clear();
        g.side.push_back({Formula::compare(CompareOp::Ne, NumExpr::make_atom(a),
                                           NumExpr::make_atom(b)),
                          kSideOrigin});
      }
    }
    // pigeonhole sanity: more distinct Pos atoms than slots cannot be satisfied
    if (!pos_atoms.empty() &&
        static_cast<std::int64_t>(pos_atoms.size()) >
            static_cast<std::int64_t>(g.table.domains[pos_atoms[0]].size()))
      throw SideUnsat();
  }

  return g;
}

}  // namespace softlogic
