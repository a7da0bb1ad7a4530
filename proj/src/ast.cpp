#include "softlogic/ast.hpp"

#include <sstream>

namespace softlogic {

std::string PredicateAtom::text() const {
  std::string out = name;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += args[i];
  }
  out += ')';
  return out;
}

bool operator==(const PredicateAtom& a, const PredicateAtom& b) {
  return a.name == b.name && a.args == b.args && a.arg_is_var == b.arg_is_var;
}

const char* compare_op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
  }
  return "?";
}

const char* arith_op_text(ArithOp op) {
  switch (op) {
    case ArithOp::Pow: return "**";
    case ArithOp::Mul: return "*";
    case ArithOp::FloorDiv: return "//";
    case ArithOp::Div: return "/";
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
  }
  return "?";
}

NumExprPtr NumExpr::constant(std::int64_t v) {
  auto e = std::make_shared<NumExpr>();
  e->kind = Kind::Const;
  e->value = v;
  return e;
}

NumExprPtr NumExpr::make_atom(PredicateAtom a) {
  auto e = std::make_shared<NumExpr>();
  e->kind = Kind::Atom;
  e->atom = std::move(a);
  return e;
}

NumExprPtr NumExpr::arith(ArithOp op, NumExprPtr l, NumExprPtr r) {
  auto e = std::make_shared<NumExpr>();
  e->kind = Kind::Arith;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

FormulaPtr Formula::make_atom(PredicateAtom a) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Atom;
  f->atom = std::move(a);
  return f;
}

FormulaPtr Formula::bool_lit(bool v) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::BoolLit;
  f->lit = v;
  return f;
}

FormulaPtr Formula::negate(FormulaPtr x) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Not;
  f->kids.push_back(std::move(x));
  return f;
}

static FormulaPtr nary(Formula::Kind kind, FormulaList fs) {
  if (fs.size() == 1) return fs.front();
  FormulaList flat;
  flat.reserve(fs.size());
  for (auto& f : fs) {
    if (f->kind == kind) {
      for (auto& k : f->kids) flat.push_back(k);
    } else {
      flat.push_back(std::move(f));
    }
  }
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->kids = std::move(flat);
  return f;
}

FormulaPtr Formula::conj(FormulaList fs) { return nary(Kind::And, std::move(fs)); }
FormulaPtr Formula::disj(FormulaList fs) { return nary(Kind::Or, std::move(fs)); }

FormulaPtr Formula::implies(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Implies;
  f->kids = {std::move(a), std::move(b)};
  return f;
}

FormulaPtr Formula::iff(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Iff;
  f->kids = {std::move(a), std::move(b)};
  return f;
}

static FormulaPtr quantifier(Formula::Kind kind, std::string v, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->var = std::move(v);
  f->kids.push_back(std::move(body));
  return f;
}

FormulaPtr Formula::forall(std::string v, FormulaPtr body) {
  return quantifier(Kind::Forall, std::move(v), std::move(body));
}

FormulaPtr Formula::exists(std::string v, FormulaPtr body) {
  return quantifier(Kind::Exists, std::move(v), std::move(body));
}

FormulaPtr Formula::compare(CompareOp op, NumExprPtr l, NumExprPtr r) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Compare;
  f->cmp = op;
  f->lhs = std::move(l);
  f->rhs = std::move(r);
  return f;
}

bool equal(const NumExprPtr& a, const NumExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NumExpr::Kind::Const: return a->value == b->value;
    case NumExpr::Kind::Atom: return a->atom == b->atom;
    case NumExpr::Kind::Arith:
      return a->op == b->op && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
  return false;
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Formula::Kind::Atom: return a->atom == b->atom;
    case Formula::Kind::BoolLit: return a->lit == b->lit;
    case Formula::Kind::Compare:
      return a->cmp == b->cmp && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return a->var == b->var && equal(a->kids[0], b->kids[0]);
    default: break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!equal(a->kids[i], b->kids[i])) return false;
  return true;
}

// --- printing ----------------------------------------------------------
//
// Binding strength, loose to tight: quantifier < iff < implies < or < and
// < not < compare. Arithmetic inside comparisons: + - < * // / < ** < unary
// minus. Parentheses are emitted only when a child binds looser than its
// context requires.

namespace {

int formula_level(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: return 0;
    case Formula::Kind::Iff: return 1;
    case Formula::Kind::Implies: return 2;
    case Formula::Kind::Or: return 3;
    case Formula::Kind::And: return 4;
    case Formula::Kind::Not: return 5;
    default: return 6;  // atoms, literals, comparisons
  }
}

int arith_level(const NumExpr& e) {
  if (e.kind != NumExpr::Kind::Arith) return 4;
  switch (e.op) {
    case ArithOp::Add:
    case ArithOp::Sub: return 1;
    case ArithOp::Mul:
    case ArithOp::FloorDiv:
    case ArithOp::Div: return 2;
    case ArithOp::Pow: return 3;
  }
  return 4;
}

void print_num(std::ostringstream& out, const NumExprPtr& e, int min_level) {
  int lvl = arith_level(*e);
  bool parens = lvl < min_level;
  if (parens) out << '(';
  switch (e->kind) {
    case NumExpr::Kind::Const:
      if (e->value < 0) {
        // negative literals print as unary minus and bind tightest
        out << '-' << -e->value;
      } else {
        out << e->value;
      }
      break;
    case NumExpr::Kind::Atom:
      out << e->atom.text();
      break;
    case NumExpr::Kind::Arith: {
      // left-assoc except **: left child may match the level, right must bind
      // tighter (reversed for **)
      bool right_assoc = e->op == ArithOp::Pow;
      print_num(out, e->lhs, right_assoc ? lvl + 1 : lvl);
      out << ' ' << arith_op_text(e->op) << ' ';
      print_num(out, e->rhs, right_assoc ? lvl : lvl + 1);
      break;
    }
  }
  if (parens) out << ')';
}

void print_formula(std::ostringstream& out, const FormulaPtr& f, int min_level) {
  int lvl = formula_level(*f);
  bool parens = lvl < min_level;
  if (parens) out << '(';
  switch (f->kind) {
    case Formula::Kind::Atom:
      out << f->atom.text();
      break;
    case Formula::Kind::BoolLit:
      out << (f->lit ? "BoolVal(True)" : "BoolVal(False)");
      break;
    case Formula::Kind::Not:
      out << "not ";
      print_formula(out, f->kids[0], lvl + 1);
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      const char* sep = f->kind == Formula::Kind::And ? " and " : " or ";
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) out << sep;
        print_formula(out, f->kids[i], lvl + 1);
      }
      break;
    }
    case Formula::Kind::Implies:
    case Formula::Kind::Iff: {
      const char* sep = f->kind == Formula::Kind::Implies ? " -> " : " <-> ";
      // right-associative
      print_formula(out, f->kids[0], lvl + 1);
      out << sep;
      print_formula(out, f->kids[1], lvl);
      break;
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      out << (f->kind == Formula::Kind::Forall ? "forall " : "exists ") << f->var << ". ";
      print_formula(out, f->kids[0], 0);
      break;
    case Formula::Kind::Compare:
      print_num(out, f->lhs, 1);
      out << ' ' << compare_op_text(f->cmp) << ' ';
      print_num(out, f->rhs, 1);
      break;
  }
  if (parens) out << ')';
}

}  // namespace

std::string to_text(const FormulaPtr& f) {
  std::ostringstream out;
  print_formula(out, f, 0);
  return out.str();
}

std::string to_text(const NumExprPtr& e) {
  std::ostringstream out;
  print_num(out, e, 0);
  return out.str();
}

PredicateAtom canonicalize_atom(const PredicateAtom& raw) {
  if (raw.args.size() <= 1) return raw;
  PredicateAtom out;
  out.name = raw.name;
  for (std::size_t i = 1; i < raw.args.size(); ++i) out.name += "_" + raw.args[i];
  out.args = {raw.args.front()};
  out.arg_is_var = raw.arg_is_var;
  out.sort = raw.sort;
  return out;
}

}  // namespace softlogic
