#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "softlogic/parser.hpp"

#include <sstream>

#include "support/testutil.hpp"

using namespace softlogic;

namespace {

FormulaPtr parse(const std::string& s) { return parse_formula_text(s); }

// print with parentheses around every composite node, to check the printer's
// minimal parenthesization against a fully explicit rendering
std::string overparen_num(const NumExprPtr& e) {
  switch (e->kind) {
    case NumExpr::Kind::Const:
      return e->value < 0 ? "(-" + std::to_string(-e->value) + ")" : std::to_string(e->value);
    case NumExpr::Kind::Atom:
      return e->atom.text();
    case NumExpr::Kind::Arith:
      return "(" + overparen_num(e->lhs) + " " + arith_op_text(e->op) + " " +
             overparen_num(e->rhs) + ")";
  }
  return "?";
}

std::string overparen(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Atom: return f->atom.text();
    case Formula::Kind::BoolLit: return f->lit ? "BoolVal(True)" : "BoolVal(False)";
    case Formula::Kind::Not: return "(not " + overparen(f->kids[0]) + ")";
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string sep = f->kind == Formula::Kind::And ? " and " : " or ";
      std::string out = "(";
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) out += sep;
        out += overparen(f->kids[i]);
      }
      return out + ")";
    }
    case Formula::Kind::Implies:
      return "(" + overparen(f->kids[0]) + " -> " + overparen(f->kids[1]) + ")";
    case Formula::Kind::Iff:
      return "(" + overparen(f->kids[0]) + " <-> " + overparen(f->kids[1]) + ")";
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return std::string(f->kind == Formula::Kind::Forall ? "(forall " : "(exists ") +
             f->var + ". " + overparen(f->kids[0]) + ")";
    case Formula::Kind::Compare:
      return "(" + overparen_num(f->lhs) + " " + compare_op_text(f->cmp) + " " +
             overparen_num(f->rhs) + ")";
  }
  return "?";
}

}  // namespace

TEST_CASE("quantified implication parses with variable binding") {
  FormulaPtr f = parse("forall x. (Jompus(x) -> Zumpus(x))");
  REQUIRE(f->kind == Formula::Kind::Forall);
  CHECK(f->var == "x");
  const FormulaPtr& body = f->kids[0];
  REQUIRE(body->kind == Formula::Kind::Implies);
  CHECK(body->kids[0]->atom.name == "Jompus");
  CHECK(body->kids[0]->atom.arg_is_var);
  CHECK(body->kids[1]->atom.name == "Zumpus");
}

TEST_CASE("comparison over numeric atoms") {
  FormulaPtr f = parse("Pos(robin) > Pos(raven)");
  REQUIRE(f->kind == Formula::Kind::Compare);
  CHECK(f->cmp == CompareOp::Gt);
  CHECK(f->lhs->atom.name == "Pos");
  CHECK(f->lhs->atom.arg() == "robin");
  CHECK(f->rhs->atom.arg() == "raven");
}

TEST_CASE("negated conjunction") {
  FormulaPtr f = parse("not (Wild_turkey(Tom) and Opaque(Tom))");
  REQUIRE(f->kind == Formula::Kind::Not);
  REQUIRE(f->kids[0]->kind == Formula::Kind::And);
  CHECK(f->kids[0]->kids.size() == 2);
}

TEST_CASE("unbalanced atom reports its column") {
  try {
    parse("Happy(Anne");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.column == 11);
  }
}

TEST_CASE("multi-argument predicates fold into the name") {
  FormulaPtr f = parse("Eats(bear, tiger)");
  CHECK(f->atom.name == "Eats_tiger");
  REQUIRE(f->atom.args.size() == 1);
  CHECK(f->atom.arg() == "bear");

  PredicateAtom raw;
  raw.name = "P";
  raw.args = {"a", "b", "c"};
  PredicateAtom canon = canonicalize_atom(raw);
  CHECK(canon.name == "P_b_c");
  CHECK(canon.args == std::vector<std::string>{"a"});
  // idempotent
  PredicateAtom again = canonicalize_atom(canon);
  CHECK(again == canon);

  PredicateAtom nullary;
  nullary.name = "Raining";
  CHECK(canonicalize_atom(nullary) == nullary);
}

TEST_CASE("folding applies under quantifiers too") {
  FormulaPtr f = parse("forall x. (Likes(x, bear) -> Visits(x, mouse))");
  const FormulaPtr& body = f->kids[0];
  CHECK(body->kids[0]->atom.name == "Likes_bear");
  CHECK(body->kids[0]->atom.arg() == "x");
  CHECK(body->kids[0]->atom.arg_is_var);
  CHECK(body->kids[1]->atom.name == "Visits_mouse");
  // a variable in a trailing slot would vanish into the name; reject it
  CHECK_THROWS_AS(parse("forall x. Visits(bear, x)"), ParseError);
}

TEST_CASE("precedence ladder") {
  CHECK(equal(parse("not A() and B()"),
              Formula::conj({Formula::negate(parse("A()")), parse("B()")})));
  CHECK(equal(parse("A() and B() or C()"),
              Formula::disj({Formula::conj({parse("A()"), parse("B()")}), parse("C()")})));
  CHECK(equal(parse("A() -> B() -> C()"),
              Formula::implies(parse("A()"), Formula::implies(parse("B()"), parse("C()")))));
  CHECK(equal(parse("A() <-> B() -> C()"),
              Formula::iff(parse("A()"), Formula::implies(parse("B()"), parse("C()")))));
  CHECK(equal(parse("not Pos(a) > 3"), Formula::negate(parse("Pos(a) > 3"))));
  // quantifier body extends as far right as possible
  FormulaPtr q = parse("forall x. P(x) -> Q(x)");
  REQUIRE(q->kind == Formula::Kind::Forall);
  CHECK(q->kids[0]->kind == Formula::Kind::Implies);
}

TEST_CASE("arithmetic precedence and associativity") {
  FormulaPtr f = parse("Pos(a) + 2 * 3 > 4");
  REQUIRE(f->kind == Formula::Kind::Compare);
  REQUIRE(f->lhs->kind == NumExpr::Kind::Arith);
  CHECK(f->lhs->op == ArithOp::Add);
  CHECK(f->lhs->rhs->op == ArithOp::Mul);

  FormulaPtr p = parse("2 ** 3 ** 2 = 512");
  CHECK(p->lhs->op == ArithOp::Pow);
  CHECK(p->lhs->lhs->kind == NumExpr::Kind::Const);  // right-assoc: 2 ** (3 ** 2)
  CHECK(p->lhs->rhs->op == ArithOp::Pow);

  FormulaPtr d = parse("10 // 3 - 2 = 1");
  CHECK(d->lhs->op == ArithOp::Sub);
  CHECK(d->lhs->lhs->op == ArithOp::FloorDiv);
}

TEST_CASE("keywords are case-insensitive, names are not") {
  FormulaPtr f = parse("FORALL x. NOT P(x) AND Q(x)");
  REQUIRE(f->kind == Formula::Kind::Forall);
  CHECK(f->kids[0]->kind == Formula::Kind::And);
  CHECK(equal(parse("BOOLVAL(TRUE)"), Formula::bool_lit(true)));
  CHECK(equal(parse("boolval(False)"), Formula::bool_lit(false)));
  CHECK_FALSE(equal(parse("pos(a) > 1"), parse("Pos(a) > 1")));
  CHECK(equal(parse("exist y. P(y)"), parse("exists y. P(y)")));
}

TEST_CASE("rejected inputs") {
  CHECK_THROWS_AS(parse("forall x. forall y. P(x)"), ParseError);  // nested quantifiers
  CHECK_THROWS_AS(parse("Pos(a) / 0 > 1"), ParseError);            // constant zero divisor
  CHECK_THROWS_AS(parse("Pos(a) < Pos(b) < Pos(c)"), ParseError);  // chained comparison
  CHECK_THROWS_AS(parse("P(a) Q(b)"), ParseError);                 // trailing input
  CHECK_THROWS_AS(parse("P(a) + 1"), ParseError);   // numeric expression outside comparison
  CHECK_THROWS_AS(parse("Small_dog"), ParseError);  // bare identifier, no parentheses
  CHECK_THROWS_AS(parse("P(a)?"), ParseError);      // garbled character
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("round trip: print then parse is identity") {
  int quantified_seen = 0;
  for (std::uint64_t seed = 1; seed <= 400; ++seed) {
    testutil::Rng rng(seed);
    testutil::FormulaGen gen{rng};
    FormulaPtr f = gen.formula();
    if (f->kind == Formula::Kind::Forall || f->kind == Formula::Kind::Exists)
      ++quantified_seen;
    std::string text = to_text(f);
    CAPTURE(text);
    FormulaPtr back = parse(text);
    CHECK(equal(f, back));
    // and a fully parenthesized rendering parses to the same tree
    FormulaPtr over = parse(overparen(f));
    CHECK(equal(f, over));
  }
  CHECK(quantified_seen > 30);  // the generator exercises quantifiers too
}

TEST_CASE("problem assembly from an ordering envelope") {
  nlohmann::json env = {
      {"objects", {"robin", "quail", "cardinal", "raven", "blue_jay"}},
      {"facts",
       {"Pos(robin) > Pos(raven)", "Pos(cardinal) = 1", "Pos(raven) > Pos(blue_jay)",
        "Pos(blue_jay) = 3"}},
      {"query",
       {{"A", "Pos(cardinal) = 4"},
        {"B", "Pos(robin) = 4"},
        {"C", "Pos(blue_jay) = 4"},
        {"D", "Pos(quail) = 4"},
        {"E", "Pos(raven) = 4"}}},
      {"larger_direction", "right"}};
  Problem p = parse_problem(env);
  CHECK(p.objects.size() == 5);
  CHECK(p.facts.size() == 4);
  REQUIRE(p.query.kind == QuerySpec::Kind::Candidates);
  CHECK(p.query.ok);
  REQUIRE(p.query.candidates.size() == 5);
  CHECK(p.query.candidates[0].first == "A");
  CHECK(p.query.candidates[4].first == "E");
  CHECK(p.schema == SchemaKind::Ordering);
  CHECK(p.sorts.at("Pos") == Sort::Numeric);
}

TEST_CASE("query lists normalize to plain queries or lettered options") {
  nlohmann::json env = {{"objects", {"Fae"}},
                        {"facts", {"Jompus(Fae)"}},
                        {"query", {"Opaque(Fae)"}}};
  Problem p = parse_problem(env);
  CHECK(p.query.kind == QuerySpec::Kind::Boolean);
  CHECK(p.query.raw_text == "Opaque(Fae)");

  nlohmann::json env2 = {
      {"objects", {"a", "b", "c"}},
      {"facts", {"Pos(a) = 1"}},
      {"query", {"Pos(a) = 2", "Pos(b) = 2", "Pos(c) = 2"}}};
  Problem p2 = parse_problem(env2);
  REQUIRE(p2.query.kind == QuerySpec::Kind::Candidates);
  REQUIRE(p2.query.candidates.size() == 3);
  CHECK(p2.query.candidates[0].first == "A");
  CHECK(p2.query.candidates[1].first == "B");
  CHECK(p2.query.candidates[2].first == "C");
  CHECK(to_text(p2.query.candidates[1].second) == "Pos(b) = 2");

  CHECK_THROWS_AS(parse_problem(nlohmann::json{{"objects", {"a"}},
                                               {"facts", {"P(a)"}},
                                               {"query", nlohmann::json::array()}}),
                  MalformedEnvelope);
}

TEST_CASE("malformed facts are retained, not dropped") {
  nlohmann::json env = {
      {"objects", {"a"}},
      {"facts", {"Ok(a)", "Logical_reasoning_tasks_may_vary_in_difficulty."}},
      {"query", "Ok(a)"}};
  Problem p = parse_problem(env);
  REQUIRE(p.facts.size() == 2);
  CHECK(p.facts[0].formula != nullptr);
  CHECK(p.facts[1].formula == nullptr);
  REQUIRE(p.facts[1].issue.has_value());
  CHECK(p.facts[1].sentence == "Logical_reasoning_tasks_may_vary_in_difficulty.");
}

TEST_CASE("sentence-form fact pairs keep both halves") {
  nlohmann::json env;
  env["objects"] = {"Fae"};
  env["facts"] = nlohmann::json::array(
      {nlohmann::json::array({"Fae is a jompus.", "Jompus(Fae)"})});
  env["query"] = "Jompus(Fae)";
  Problem p = parse_problem(env);
  CHECK(p.facts[0].sentence == "Fae is a jompus.");
  CHECK(p.facts[0].raw_form == "Jompus(Fae)");
  CHECK(p.facts[0].formula != nullptr);
  CHECK(p.schema == SchemaKind::Deduction);
}

TEST_CASE("structural envelope failures throw") {
  CHECK_THROWS_AS(parse_problem(nlohmann::json{{"objects", {"a"}}, {"facts", {"P(a)"}}}),
                  MalformedEnvelope);  // no query
  CHECK_THROWS_AS(parse_problem(nlohmann::json{{"facts", {"P(a)"}}, {"query", "P(a)"}}),
                  MalformedEnvelope);  // no objects
  CHECK_THROWS_AS(
      parse_problem(nlohmann::json{
          {"objects", {"a"}}, {"facts", {"P(a)"}}, {"query", 7}}),
      MalformedEnvelope);  // query wrong type
  CHECK_THROWS_AS(parse_problem_text("{not json"), MalformedEnvelope);
}

TEST_CASE("unparseable query leaves the problem gated, not thrown") {
  nlohmann::json env = {{"objects", {"a"}}, {"facts", {"P(a)"}}, {"query", "???"}};
  Problem p = parse_problem(env);
  CHECK_FALSE(p.query.ok);
  CHECK(p.query.raw_text == "???");
}

TEST_CASE("free numeric query is recognized via the sort map") {
  nlohmann::json env = {{"objects", {"a", "b"}},
                        {"facts", {"Pos(a) = 1", "Pos(b) > Pos(a)"}},
                        {"query", "Pos(b)"},
                        {"larger_direction", "right"}};
  Problem p = parse_problem(env);
  REQUIRE(p.query.kind == QuerySpec::Kind::FreeNumeric);
  CHECK(p.query.numeric_target.name == "Pos");
  CHECK(p.query.numeric_target.arg() == "b");
  // boolean atom query stays boolean
  nlohmann::json env2 = {{"objects", {"a"}}, {"facts", {"P(a)"}}, {"query", "P(a)"}};
  CHECK(parse_problem(env2).query.kind == QuerySpec::Kind::Boolean);
}

TEST_CASE("sort conflicts are recorded for grounding to reject") {
  nlohmann::json env = {{"objects", {"a"}},
                        {"facts", {"P(a)", "P(a) > 1"}},
                        {"query", "P(a)"}};
  Problem p = parse_problem(env);
  REQUIRE(p.sort_conflicts.size() == 1);
  CHECK(p.sort_conflicts[0] == "P");
}
