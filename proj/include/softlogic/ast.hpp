#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace softlogic {

enum class Sort { Boolean, Numeric };

// A predicate application. After canonicalization every atom has at most one
// argument: extra arguments are folded into the name, P(a,b,c) -> P_b_c(a).
// Inside a quantifier body the single argument may be the bound variable.
struct PredicateAtom {
  std::string name;
  std::vector<std::string> args;  // 0 or 1 entries once canonical
  bool arg_is_var = false;        // args[0] is a quantified variable
  Sort sort = Sort::Boolean;      // resolved per problem, see infer_sorts

  bool nullary() const { return args.empty(); }
  const std::string& arg() const { return args.front(); }
  // Render as surface text, e.g. "Pos(raven)" or "Raining()".
  std::string text() const;
};

bool operator==(const PredicateAtom& a, const PredicateAtom& b);

enum class CompareOp { Lt, Gt, Le, Ge, Eq, Ne };
enum class ArithOp { Pow, Mul, FloorDiv, Div, Add, Sub };

const char* compare_op_text(CompareOp op);
const char* arith_op_text(ArithOp op);

class NumExpr;
using NumExprPtr = std::shared_ptr<const NumExpr>;

// Numeric expression: integer literal, numeric-sorted atom, or a binary
// arithmetic node. Immutable and shared; cheap to copy around.
class NumExpr {
 public:
  enum class Kind { Const, Atom, Arith };

  Kind kind;
  std::int64_t value = 0;  // Const
  PredicateAtom atom;      // Atom
  ArithOp op{};            // Arith
  NumExprPtr lhs, rhs;     // Arith

  static NumExprPtr constant(std::int64_t v);
  static NumExprPtr make_atom(PredicateAtom a);
  static NumExprPtr arith(ArithOp op, NumExprPtr l, NumExprPtr r);
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;
using FormulaList = std::vector<FormulaPtr>;

// Formula over the restricted language. And/Or are n-ary with at least two
// members; Not/quantifiers have one child; Implies/Iff have two.
class Formula {
 public:
  enum class Kind { Atom, BoolLit, Not, And, Or, Implies, Iff, Forall, Exists, Compare };

  Kind kind;
  PredicateAtom atom;   // Atom
  bool lit = false;     // BoolLit
  FormulaList kids;
  std::string var;      // Forall/Exists; body is kids[0]
  CompareOp cmp{};      // Compare
  NumExprPtr lhs, rhs;  // Compare

  static FormulaPtr make_atom(PredicateAtom a);
  static FormulaPtr bool_lit(bool v);
  static FormulaPtr negate(FormulaPtr f);
  static FormulaPtr conj(FormulaList fs);  // flattens nested And; singleton passes through
  static FormulaPtr disj(FormulaList fs);  // likewise for Or
  static FormulaPtr implies(FormulaPtr a, FormulaPtr b);
  static FormulaPtr iff(FormulaPtr a, FormulaPtr b);
  static FormulaPtr forall(std::string v, FormulaPtr body);
  static FormulaPtr exists(std::string v, FormulaPtr body);
  static FormulaPtr compare(CompareOp op, NumExprPtr l, NumExprPtr r);
};

bool equal(const FormulaPtr& a, const FormulaPtr& b);
bool equal(const NumExprPtr& a, const NumExprPtr& b);

// Surface-syntax rendering with minimal parentheses; to_text(parse(s)) and
// parse(to_text(f)) are inverse up to whitespace.
std::string to_text(const FormulaPtr& f);
std::string to_text(const NumExprPtr& e);

// Fold extra predicate arguments into the name. Idempotent.
PredicateAtom canonicalize_atom(const PredicateAtom& raw);

// Why a fact was kept without a usable formula.
struct ParseIssue {
  std::size_t column = 0;
  std::string message;
};

// One translated fact. `formula` is null when the surface form was rejected;
// the raw text and the issue are retained for reporting.
struct FactEntry {
  std::string sentence;  // source sentence (defaults to the raw form)
  std::string raw_form;  // logical form as emitted by the translator
  FormulaPtr formula;    // null if malformed
  std::optional<ParseIssue> issue;
};

enum class SchemaKind { Deduction, Ordering };

// What the problem asks. Boolean: prove/refute one formula. Candidates:
// labeled options, exactly one intended. FreeNumeric: report the feasible
// values of one numeric atom.
struct QuerySpec {
  enum class Kind { Boolean, Candidates, FreeNumeric };
  Kind kind = Kind::Boolean;
  FormulaPtr boolean_query;
  std::vector<std::pair<std::string, FormulaPtr>> candidates;  // label-ascending
  PredicateAtom numeric_target;
  bool ok = false;       // every relevant part parsed
  std::string raw_text;  // original query text (or joined option forms)
};

struct Problem {
  std::vector<std::string> objects;
  std::vector<FactEntry> facts;
  QuerySpec query;
  SchemaKind schema = SchemaKind::Deduction;
  std::optional<std::string> larger_direction;
  std::map<std::string, Sort> sorts;  // canonical predicate name -> sort
  // Predicates used both ways; nonempty makes grounding fail with SortConflict.
  std::vector<std::string> sort_conflicts;
};

}  // namespace softlogic
