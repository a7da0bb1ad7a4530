#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "softlogic/ground.hpp"
#include "softlogic/parser.hpp"
#include "softlogic/sanitize.hpp"
#include "softlogic/solver.hpp"

#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace softlogic;
using fixtures::Fixture;
using fixtures::kFaeEnvelope;
using fixtures::kRavenEnvelope;
using fixtures::make_fixture;

TEST_CASE("ontology chain refutes the query") {
  Fixture fx = make_fixture(kFaeEnvelope);
  REQUIRE(fx.grounding().query != nullptr);
  CHECK_FALSE(fx.solver().check({fx.grounding().query}).sat);
  CHECK(fx.solver().check({Formula::negate(fx.grounding().query)}).sat);
  CHECK(fx.solver().entail_boolean(fx.grounding().query) == Entailment::False);
}

TEST_CASE("direct membership entails true") {
  Fixture fx = make_fixture(R"json({
    "objects": ["Anne"], "facts": ["Happy(Anne)"], "query": ["Happy(Anne)"]
  })json");
  CHECK(fx.solver().entail_boolean(fx.grounding().query) == Entailment::True);
}

TEST_CASE("unconstrained atoms are unknown both ways") {
  Fixture fx = make_fixture(R"json({
    "objects": ["Gary"], "facts": ["Rough(Gary)"], "query": ["not White(Gary)"]
  })json");
  CHECK(fx.solver().entail_boolean(fx.grounding().query) == Entailment::Unknown);
}

TEST_CASE("ordering problems pin the full permutation") {
  Fixture fx = make_fixture(kRavenEnvelope);
  // five birds, pairwise-distinct side constraints
  CHECK(fx.grounding().table.numerics.size() == 5);
  CHECK(fx.grounding().side.size() == 10);
  for (const auto& d : fx.grounding().table.domains)
    CHECK(d == std::vector<std::int64_t>{1, 2, 3, 4, 5});

  int raven = fx.grounding().table.numeric_index(GroundAtom{"Pos", "raven"});
  REQUIRE(raven >= 0);
  CHECK(fx.solver().solve_numeric(raven) == std::vector<std::int64_t>{4});

  // the model is unique; spell it out
  SatResult r = fx.solver().check();
  REQUIRE(r.sat);
  auto value = [&](const char* bird) {
    int i = fx.grounding().table.numeric_index(GroundAtom{"Pos", bird});
    REQUIRE(i >= 0);
    return r.model.nums[static_cast<std::size_t>(i)];
  };
  CHECK(value("cardinal") == 1);
  CHECK(value("quail") == 2);
  CHECK(value("blue_jay") == 3);
  CHECK(value("raven") == 4);
  CHECK(value("robin") == 5);
}

TEST_CASE("age equations solve exactly under a widened domain") {
  SolverConfig config;
  std::vector<std::int64_t> wide;
  for (std::int64_t v = 0; v <= 50; ++v) wide.push_back(v);
  config.domain_override["Age(Peter)"] = wide;
  config.domain_override["Age(David)"] = wide;
  Fixture fx = make_fixture(R"json({
    "objects": ["David", "Peter"],
    "facts": ["Age(David) = Age(Peter) + 3", "Age(David) - 10 = 2 * (Age(Peter) - 10)"],
    "query": ["Age(Peter)"]
  })json", config);
  REQUIRE(fx.problem.query.kind == QuerySpec::Kind::FreeNumeric);
  REQUIRE(fx.grounding().numeric_target >= 0);
  CHECK(fx.solver().solve_numeric(fx.grounding().numeric_target) ==
        std::vector<std::int64_t>{13});
  int david = fx.grounding().table.numeric_index(GroundAtom{"Age", "David"});
  REQUIRE(david >= 0);
  CHECK(fx.solver().solve_numeric(david) == std::vector<std::int64_t>{16});

  // without the override the derived constant pool misses 16 entirely
  Fixture bare = make_fixture(R"json({
    "objects": ["David", "Peter"],
    "facts": ["Age(David) = Age(Peter) + 3", "Age(David) - 10 = 2 * (Age(Peter) - 10)"],
    "query": ["Age(Peter)"]
  })json");
  CHECK_FALSE(bare.solver().check().sat);
}

TEST_CASE("empty constraint set yields the all-least model") {
  Fixture fx = make_fixture(kRavenEnvelope);
  Solver empty(fx.grounding().table, SolverConfig{});
  SatResult r = empty.check();
  REQUIRE(r.sat);
  for (std::int64_t v : r.model.nums) CHECK(v == 1);
}

TEST_CASE("contradictory theories blow the entailment invariant") {
  Fixture fx = make_fixture(R"json({
    "objects": ["a"], "facts": ["P(a)", "not P(a)"], "query": ["P(a)"]
  })json");
  CHECK_FALSE(fx.solver().check().sat);
  CHECK_THROWS_AS(fx.solver().entail_boolean(fx.grounding().query), InvariantViolation);
}

TEST_CASE("node budget cuts off instead of timing out") {
  SolverConfig tiny;
  tiny.node_budget = 10;
  Problem p = parse_problem_text(kRavenEnvelope);
  SanitizedFactSet s = sanitize(p);
  Grounding g = ground(p, s, tiny);
  Solver solver(g.table, tiny);
  for (const auto& c : g.facts) solver.add(c.formula);
  for (const auto& c : g.side) solver.add(c.formula);
  CHECK_THROWS_AS(solver.check(), BudgetExceeded);
}

TEST_CASE("identical checks return identical models") {
  Fixture fx = make_fixture(kRavenEnvelope);
  SatResult a = fx.solver().check();
  SatResult b = fx.solver().check();
  REQUIRE(a.sat);
  REQUIRE(b.sat);
  CHECK(a.model.bools == b.model.bools);
  CHECK(a.model.nums == b.model.nums);
}

TEST_CASE("evaluation rejects atoms missing from the table") {
  Fixture fx = make_fixture(kRavenEnvelope);
  SatResult r = fx.solver().check();
  REQUIRE(r.sat);
  CHECK_THROWS_AS(evaluate(fx.grounding().table, r.model, parse_formula_text("Pos(eagle) = 1")),
                  MissingAtom);
  CHECK_THROWS_AS(evaluate(fx.grounding().table, r.model, parse_formula_text("Eagle(branch)")),
                  MissingAtom);
}

TEST_CASE("sat results satisfy their constraints by independent evaluation") {
  Fixture fx = make_fixture(kRavenEnvelope);
  SatResult r = fx.solver().check();
  REQUIRE(r.sat);
  for (const auto& c : fx.grounding().facts)
    CHECK(oracle::eval(c.formula, fx.grounding().table, r.model));
  for (const auto& c : fx.grounding().side)
    CHECK(oracle::eval(c.formula, fx.grounding().table, r.model));
}

TEST_CASE("search agrees with brute-force enumeration") {
  int sat_cases = 0, unsat_cases = 0, entail_spread[3] = {0, 0, 0};
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    testutil::Rng rng(seed * 0x5bd1e995ULL);
    oracle::TheoryGen gen(rng);
    std::vector<FormulaPtr> theory = gen.constraints();
    FormulaPtr q = gen.formula(1);
    int target = gen.table.numerics.empty() ? -1 : 0;
    oracle::Sweep expected = oracle::sweep(gen.table, theory, q, target);

    Solver solver(gen.table, SolverConfig{});
    for (const auto& c : theory) solver.add(c);

    CAPTURE(seed);
    SatResult got = solver.check();
    REQUIRE(got.sat == expected.any);
    if (expected.any) {
      ++sat_cases;
      CHECK(got.model.bools == expected.first->bools);
      CHECK(got.model.nums == expected.first->nums);

      Entailment e = solver.entail_boolean(q);
      Entailment want = expected.q_true
                            ? (expected.q_false ? Entailment::Unknown : Entailment::True)
                            : Entailment::False;
      CHECK(e == want);
      ++entail_spread[static_cast<int>(want)];
    } else {
      ++unsat_cases;
    }
    if (target >= 0)
      CHECK(solver.solve_numeric(target) == expected.target_values);

    // the two evaluators must agree pointwise on small spaces
    if (gen.space <= 512) {
      oracle::for_each_model(gen.table, [&](const Model& m) {
        for (const auto& c : theory)
          CHECK(oracle::eval(c, gen.table, m) == evaluate(gen.table, m, c));
        return true;
      });
    }
  }
  // the generator must actually exercise both outcomes and all three verdicts
  CHECK(sat_cases > 100);
  CHECK(unsat_cases > 20);
  CHECK(entail_spread[0] > 5);
  CHECK(entail_spread[1] > 5);
  CHECK(entail_spread[2] > 5);
}

TEST_CASE("adding constraints never revives an unsatisfiable theory") {
  for (std::uint64_t seed = 1; seed <= 120; ++seed) {
    testutil::Rng rng(seed * 0x9e3779b9ULL + 7);
    oracle::TheoryGen gen(rng);
    std::vector<FormulaPtr> theory = gen.constraints();
    Solver solver(gen.table, SolverConfig{});
    for (const auto& c : theory) solver.add(c);
    if (solver.check().sat) continue;
    Solver more(gen.table, SolverConfig{});
    for (const auto& c : theory) more.add(c);
    more.add(gen.formula(2));
    CHECK_FALSE(more.check().sat);
  }
}
