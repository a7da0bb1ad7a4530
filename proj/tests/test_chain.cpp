#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <string>
#include <vector>

#include "softlogic/chain.hpp"
#include "softlogic/parser.hpp"
#include "softlogic/soft.hpp"

#include "support/fixtures.hpp"
#include "support/oracle.hpp"
#include "support/testutil.hpp"

using namespace softlogic;
using fixtures::kFaeEnvelope;
using fixtures::kRavenEnvelope;
using fixtures::make_fixture;

namespace {

struct Pipeline {
  fixtures::Fixture fx;
  SoftOutcome outcome;
  ChainSet chains;

  const GroundAtomTable& table() { return fx.grounding().table; }
};

Pipeline run(const std::string& envelope, SolverConfig config = {}) {
  Pipeline p;
  p.fx = make_fixture(envelope, config);
  p.outcome = soft_solve(p.fx.problem, p.fx.sanitized, p.fx.grounding(), config);
  p.chains = generate_chains(p.fx.problem, p.fx.grounding(), p.outcome, config);
  return p;
}

std::vector<std::string> derived_texts(const Chain& c, const GroundAtomTable& t) {
  std::vector<std::string> out;
  for (const auto& s : c.steps) out.push_back(s.derived.text(t));
  return out;
}

std::vector<std::string> support_texts(const ChainStep& s, const GroundAtomTable& t) {
  std::vector<std::string> out;
  for (const auto& p : s.supports) out.push_back(p.text(t));
  return out;
}

}  // namespace

TEST_CASE("unit facts become properties and placeholders vanish") {
  auto fx = make_fixture(R"json({
    "objects": ["a"],
    "facts": ["P(a)", "not Q(a)", ["half a sentence", "Jompus(("]],
    "query": ["P(a)"]
  })json");
  auto theory = normalize(fx.grounding().table, fx.grounding().facts);
  REQUIRE(theory.properties.size() == 2);
  CHECK(theory.properties[0].text(fx.grounding().table) == "P(a)");
  CHECK(theory.properties[1].text(fx.grounding().table) == "not Q(a)");
  CHECK(theory.property_origins == std::vector<int>{0, 1});
  CHECK(theory.rules.empty());
  CHECK(theory.residual.empty());
}

TEST_CASE("clause extraction keeps the stated orientation") {
  auto fx = make_fixture(R"json({
    "objects": ["a", "b"],
    "facts": [
      "P(a) <-> Q(a)",
      "not (P(a) and Q(a))",
      "(P(a) or Q(a)) -> R(a)",
      "P(a) -> (Q(a) and R(a))",
      "P(a) -> (Q(a) -> R(a))",
      "P(a) or not P(a)",
      "P(a) -> Pos(a) = 2",
      "Pos(a) > Pos(b)"
    ],
    "query": ["R(a)"]
  })json");
  const auto& table = fx.grounding().table;
  auto theory = normalize(table, fx.grounding().facts);
  // fact 5 is a tautology and contributes nothing; fact 7 has no clause form
  REQUIRE(theory.residual.size() == 1);
  CHECK(theory.residual[0].origin == 7);
  CHECK(theory.properties.empty());

  std::vector<std::string> texts;
  for (const auto& r : theory.rules) texts.push_back(r.text(table));
  REQUIRE(texts.size() == 9);
  CHECK(texts[0] == "P(a) -> Q(a)");  // iff, forward half
  CHECK(texts[1] == "Q(a) -> P(a)");  // iff, backward half
  CHECK(texts[2] == "not P(a) or not Q(a)");
  CHECK(texts[3] == "P(a) -> R(a)");  // disjunctive premise splits
  CHECK(texts[4] == "Q(a) -> R(a)");
  CHECK(texts[5] == "P(a) -> Q(a)");  // conjunctive conclusion splits
  CHECK(texts[6] == "P(a) -> R(a)");
  CHECK(texts[7] == "P(a) and Q(a) -> R(a)");  // curried
  CHECK(texts[8] == "P(a) -> Pos(a) = 2");     // binding conclusion stays a rule
  CHECK(theory.rules[2].premises.empty());
  CHECK(theory.rules[8].origin == 6);
}

TEST_CASE("the ontology fixture normalizes to one property and twelve rules") {
  auto fx = make_fixture(kFaeEnvelope);
  const auto& table = fx.grounding().table;
  auto theory = normalize(table, fx.grounding().facts);
  REQUIRE(theory.properties.size() == 1);
  CHECK(theory.properties[0].text(table) == "Jompus(Fae)");
  CHECK(theory.property_origins == std::vector<int>{12});
  REQUIRE(theory.rules.size() == 12);
  CHECK(theory.residual.empty());
  CHECK(theory.rules[0].text(table) == "Jompus(Fae) -> Large(Fae)");
  CHECK(theory.rules[7].premises.size() == 2);
  CHECK(theory.rules[7].conclusions.size() == 2);
  CHECK(theory.rules[10].text(table) == "Wumpus(Fae) -> not Opaque(Fae)");
  // orientation survives: every premise in this ontology appears positively,
  // so a negated premise would mean a contrapositive was synthesized
  for (const auto& r : theory.rules)
    for (const auto& p : r.premises) CHECK(p.truth);
}

TEST_CASE("an implication query donates its antecedents") {
  auto fx = make_fixture(R"json({
    "objects": ["a"],
    "facts": ["forall x. Q(x) -> R(x)"],
    "query": ["(P(a) and Q(a)) -> R(a)"]
  })json");
  const auto& table = fx.grounding().table;
  auto plan = query_as_rule(fx.grounding().query, table);
  REQUIRE(plan.extra_given.size() == 2);
  CHECK(plan.extra_given[0].text(table) == "P(a)");
  CHECK(plan.extra_given[1].text(table) == "Q(a)");
  CHECK(to_text(plan.target) == "R(a)");

  // nested implications curry
  auto fx2 = make_fixture(R"json({
    "objects": ["a"],
    "facts": ["R(a)"],
    "query": ["P(a) -> (Q(a) -> R(a))"]
  })json");
  auto plan2 = query_as_rule(fx2.grounding().query, fx2.grounding().table);
  CHECK(plan2.extra_given.size() == 2);
  CHECK(to_text(plan2.target) == "R(a)");

  // a non-literal antecedent leaves the query untouched
  auto fx3 = make_fixture(R"json({
    "objects": ["a"],
    "facts": ["R(a)"],
    "query": ["(P(a) or Q(a)) -> R(a)"]
  })json");
  auto plan3 = query_as_rule(fx3.grounding().query, fx3.grounding().table);
  CHECK(plan3.extra_given.empty());
  CHECK(equal(plan3.target, fx3.grounding().query));
}

TEST_CASE("the implication query plan flows through chain generation") {
  auto p = run(R"json({
    "objects": ["a"],
    "facts": ["forall x. Q(x) -> R(x)"],
    "query": ["Q(a) -> R(a)"]
  })json");
  REQUIRE(p.outcome.verdict.kind == Verdict::Kind::True);
  REQUIRE(p.chains.forward.outcome == ChainOutcome::Found);
  const Chain& c = *p.chains.forward.chain;
  REQUIRE(c.steps.size() == 1);
  CHECK(c.steps[0].derived.text(p.table()) == "R(a)");
  CHECK(to_text(c.target) == "R(a)");
  auto check = verify_chain(c, p.chains.theory, p.table(), p.fx.grounding().side,
                            p.chains.plan.extra_given, p.chains.target, {});
  CHECK(check.pass);
  REQUIRE(p.chains.backward.outcome == ChainOutcome::Found);
}

TEST_CASE("forward chaining keeps only the live path") {
  auto p = run(kFaeEnvelope);
  REQUIRE(p.outcome.verdict.kind == Verdict::Kind::False);
  REQUIRE(p.chains.forward.outcome == ChainOutcome::Found);
  const Chain& c = *p.chains.forward.chain;
  CHECK(c.direction == Chain::Direction::Forward);
  CHECK_FALSE(c.target_value);
  CHECK(derived_texts(c, p.table()) ==
        std::vector<std::string>{"Zumpus(Fae)", "Numpus(Fae)", "Yumpus(Fae)", "Wumpus(Fae)",
                                 "not Opaque(Fae)"});
  std::vector<int> rules;
  for (const auto& s : c.steps) rules.push_back(s.rule);
  CHECK(rules == std::vector<int>{1, 3, 6, 9, 10});
  for (const auto& s : c.steps) {
    CHECK(s.via == ChainStep::Via::Rule);
    CHECK(s.supports.size() == 1);
  }
  CHECK(pattern_signature(c) == "rule-application:5");
  auto check = verify_chain(c, p.chains.theory, p.table(), p.fx.grounding().side, {},
                            p.chains.target, {});
  CHECK(check.pass);
}

TEST_CASE("backward chaining regresses the goal to the given fact") {
  auto p = run(kFaeEnvelope);
  REQUIRE(p.chains.backward.outcome == ChainOutcome::Found);
  const Chain& c = *p.chains.backward.chain;
  CHECK(c.direction == Chain::Direction::Backward);
  CHECK(derived_texts(c, p.table()) ==
        std::vector<std::string>{"not Opaque(Fae)", "Wumpus(Fae)", "Yumpus(Fae)",
                                 "Numpus(Fae)", "Zumpus(Fae)"});
  auto check = verify_chain(c, p.chains.theory, p.table(), p.fx.grounding().side, {},
                            p.chains.target, {});
  CHECK(check.pass);
}

TEST_CASE("the ontology chain renders as template prose") {
  auto p = run(kFaeEnvelope);
  std::string forward = render_chain_text(*p.chains.forward.chain, p.table(),
                                          p.chains.theory, p.fx.problem);
  CHECK(forward ==
        "1. Since Fae is a jompus, Fae is a zumpus.\n"
        "2. Since Fae is a zumpus, Fae is a numpus.\n"
        "3. Since Fae is a numpus, Fae is a yumpus.\n"
        "4. Since Fae is a yumpus, Fae is a wumpus.\n"
        "5. Since Fae is a wumpus, Fae is not opaque.");
  // leaves-first, so both directions read the same here
  std::string backward = render_chain_text(*p.chains.backward.chain, p.table(),
                                           p.chains.theory, p.fx.problem);
  CHECK(backward == forward);
  std::string symbolic = render_chain_symbolic(*p.chains.forward.chain, p.table(),
                                               p.chains.theory);
  CHECK(symbolic ==
        "1. Jompus(Fae) -> Zumpus(Fae)\n"
        "2. Zumpus(Fae) -> Numpus(Fae)\n"
        "3. Numpus(Fae) -> Yumpus(Fae)\n"
        "4. Yumpus(Fae) -> Wumpus(Fae)\n"
        "5. Wumpus(Fae) -> not Opaque(Fae)");
}

TEST_CASE("an ordering option is settled by one elimination") {
  auto p = run(kRavenEnvelope);
  REQUIRE(p.outcome.verdict.kind == Verdict::Kind::Option);
  REQUIRE(p.outcome.verdict.label == "E");
  const auto& table = p.table();

  REQUIRE(p.chains.forward.outcome == ChainOutcome::Found);
  const Chain& fwd = *p.chains.forward.chain;
  REQUIRE(fwd.steps.size() == 1);
  const ChainStep& step = fwd.steps[0];
  CHECK(step.via == ChainStep::Via::Elimination);
  CHECK(step.derived.text(table) == "Pos(raven) = 4");
  std::vector<std::string> excluded;
  for (const auto& e : step.excluded) excluded.push_back(e.text(table));
  CHECK(excluded == std::vector<std::string>{"Pos(raven) = 1", "Pos(raven) = 2",
                                             "Pos(raven) = 3", "Pos(raven) = 5"});
  CHECK(support_texts(step, table) == std::vector<std::string>{"Pos(blue_jay) = 3"});
  CHECK(step.residual_supports == std::vector<int>{0, 1});
  CHECK(to_text(p.chains.theory.residual[0].formula) == "Pos(robin) > Pos(raven)");
  CHECK(to_text(p.chains.theory.residual[1].formula) == "Pos(raven) > Pos(blue_jay)");
  CHECK(pattern_signature(fwd) == "elimination:1");

  REQUIRE(p.chains.backward.outcome == ChainOutcome::Found);
  const Chain& bwd = *p.chains.backward.chain;
  REQUIRE(bwd.steps.size() == 1);
  CHECK(bwd.steps[0].via == ChainStep::Via::Elimination);
  CHECK(support_texts(bwd.steps[0], table) ==
        std::vector<std::string>{"Pos(blue_jay) = 3"});
  CHECK(bwd.steps[0].residual_supports == std::vector<int>{0, 1});

  for (const auto* chain : {&fwd, &bwd}) {
    auto check = verify_chain(*chain, p.chains.theory, table, p.fx.grounding().side, {},
                              p.chains.target, {});
    CHECK(check.pass);
  }
}

TEST_CASE("elimination prose leads with the excluded positions") {
  auto p = run(kRavenEnvelope);
  std::string expected =
      "1. The raven cannot be in position 1, 2, 3, or 5. "
      "Since the blue jay is in position 3, the robin is to the right of the raven, "
      "and the raven is to the right of the blue jay, the raven is in position 4.";
  CHECK(render_chain_text(*p.chains.forward.chain, p.table(), p.chains.theory,
                          p.fx.problem) == expected);
  CHECK(render_chain_text(*p.chains.backward.chain, p.table(), p.chains.theory,
                          p.fx.problem) == expected);
}

TEST_CASE("one elimination can lean on several constraints jointly") {
  auto p = run(R"json({
    "objects": ["ant", "bee", "cat"],
    "facts": ["Pos(ant) < Pos(bee)", "Pos(bee) < Pos(cat)"],
    "query": ["Pos(ant) = 1", "Pos(ant) = 2", "Pos(ant) = 3"],
    "larger_direction": "right"
  })json");
  REQUIRE(p.outcome.verdict.kind == Verdict::Kind::Option);
  CHECK(p.outcome.verdict.label == "A");
  REQUIRE(p.chains.forward.outcome == ChainOutcome::Found);
  const Chain& c = *p.chains.forward.chain;
  REQUIRE(c.steps.size() == 1);
  CHECK(c.steps[0].derived.text(p.table()) == "Pos(ant) = 1");
  CHECK(c.steps[0].supports.empty());
  CHECK(c.steps[0].residual_supports == std::vector<int>{0, 1});
  auto check = verify_chain(c, p.chains.theory, p.table(), p.fx.grounding().side, {},
                            p.chains.target, {});
  CHECK(check.pass);
  // no single constraint refutes the alternatives, so goal-directed search fails
  CHECK(p.chains.backward.outcome == ChainOutcome::DeadEnd);
}

TEST_CASE("a given exclusion pins the domain before any step runs") {
  auto p = run(R"json({
    "objects": ["a", "b"],
    "facts": ["Pos(a) != 1"],
    "query": ["Pos(a) = 1", "Pos(a) = 2"]
  })json");
  REQUIRE(p.outcome.verdict.kind == Verdict::Kind::Option);
  CHECK(p.outcome.verdict.label == "B");
  REQUIRE(p.chains.forward.outcome == ChainOutcome::Found);
  const Chain& c = *p.chains.forward.chain;
  REQUIRE(c.steps.size() == 1);
  CHECK(c.steps[0].via == ChainStep::Via::Elimination);
  CHECK(support_texts(c.steps[0], p.table()) == std::vector<std::string>{"Pos(a) != 1"});
  auto check = verify_chain(c, p.chains.theory, p.table(), p.fx.grounding().side, {},
                            p.chains.target, {});
  CHECK(check.pass);
}

TEST_CASE("a disjunctive rule fires once the other conclusions are dead") {
  auto p = run(R"json({
    "objects": ["Tom"],
    "facts": [
      "Wild_turkey(Tom)",
      "forall x. Wild_turkey(x) -> (Eastern(x) or Osceola(x) or Ocellated(x))",
      "not Eastern(Tom)",
      "not Osceola(Tom)"
    ],
    "query": ["Wild_turkey(Tom) and Ocellated(Tom)"]
  })json");
  REQUIRE(p.outcome.verdict.kind == Verdict::Kind::True);
  REQUIRE(p.chains.forward.outcome == ChainOutcome::Found);
  const Chain& c = *p.chains.forward.chain;
  REQUIRE(c.steps.size() == 1);
  CHECK(c.steps[0].derived.text(p.table()) == "Ocellated(Tom)");
  CHECK(support_texts(c.steps[0], p.table()) ==
        std::vector<std::string>{"Wild_turkey(Tom)", "not Eastern(Tom)",
                                 "not Osceola(Tom)"});
  CHECK(c.basis.size() == 2);
  CHECK(pattern_signature(c) == "rule-application:1");
  auto check = verify_chain(c, p.chains.theory, p.table(), p.fx.grounding().side, {},
                            p.chains.target, {});
  CHECK(check.pass);
  // the disjunction never shrinks to a single-conclusion rule for the goal
  CHECK(p.chains.backward.outcome == ChainOutcome::DeadEnd);
}

TEST_CASE("an unknown verdict reports how the goal search failed") {
  auto p = run(R"json({
    "objects": ["a"],
    "facts": [
      "forall x. A(x) -> B(x)",
      "forall x. B(x) -> C(x)",
      "forall x. C(x) -> A(x)"
    ],
    "query": ["A(a)"]
  })json");
  REQUIRE(p.outcome.verdict.kind == Verdict::Kind::Unknown);
  CHECK(p.chains.forward.outcome == ChainOutcome::Fixpoint);
  CHECK_FALSE(p.chains.target.has_value());
  // proving A loops A <- C <- B <- A; refuting it dead-ends; cycle wins
  CHECK(p.chains.backward.outcome == ChainOutcome::Cycle);
}

TEST_CASE("the depth limit is reported when it cuts the search") {
  SolverConfig config;
  config.backward_depth_limit = 3;
  auto fx = make_fixture(kFaeEnvelope, config);
  auto outcome = soft_solve(fx.problem, fx.sanitized, fx.grounding(), config);
  auto chains = generate_chains(fx.problem, fx.grounding(), outcome, config);
  CHECK(chains.backward.outcome == ChainOutcome::DepthLimit);
}

TEST_CASE("a value-set verdict of one settles with the given binding") {
  auto p = run(R"json({
    "objects": ["Peter"],
    "facts": ["Age(Peter) = 13"],
    "query": "Age(Peter)"
  })json");
  REQUIRE(p.outcome.verdict.kind == Verdict::Kind::ValueSet);
  REQUIRE(p.outcome.verdict.values == std::vector<std::int64_t>{13});
  REQUIRE(p.chains.forward.outcome == ChainOutcome::Found);
  CHECK(p.chains.forward.chain->steps.empty());
  CHECK(p.chains.forward.chain->basis.size() == 1);
  CHECK(pattern_signature(*p.chains.forward.chain) == "empty");
  REQUIRE(p.chains.backward.outcome == ChainOutcome::Found);
  const Chain& bwd = *p.chains.backward.chain;
  REQUIRE(bwd.steps.size() == 1);
  CHECK(bwd.steps[0].via == ChainStep::Via::Given);
  CHECK(bwd.steps[0].derived.text(p.table()) == "Age(Peter) = 13");
  CHECK(pattern_signature(bwd) == "given:1");
  for (const auto* r : {&p.chains.forward, &p.chains.backward}) {
    auto check = verify_chain(*r->chain, p.chains.theory, p.table(),
                              p.fx.grounding().side, {}, p.chains.target, {});
    CHECK(check.pass);
  }
  CHECK(render_chain_text(bwd, p.table(), p.chains.theory, p.fx.problem) ==
        "1. It is given that the age of Peter is 13.");
}

TEST_CASE("negated relational predicates render with the verb uninflected") {
  auto p = run(R"json({
    "objects": ["tiger", "squirrel"],
    "facts": ["forall x. Red(x) -> not Likes_squirrel(x)", "Red(tiger)"],
    "query": ["Likes_squirrel(tiger)"]
  })json");
  REQUIRE(p.outcome.verdict.kind == Verdict::Kind::False);
  REQUIRE(p.chains.forward.outcome == ChainOutcome::Found);
  CHECK(render_chain_text(*p.chains.forward.chain, p.table(), p.chains.theory,
                          p.fx.problem) ==
        "1. Since tiger is red, tiger does not like squirrel.");
}

TEST_CASE("verification rejects tampered chains") {
  auto p = run(kFaeEnvelope);
  const auto& side = p.fx.grounding().side;

  Chain wrong_sign = *p.chains.forward.chain;
  wrong_sign.steps[1].derived.truth = !wrong_sign.steps[1].derived.truth;
  auto r1 = verify_chain(wrong_sign, p.chains.theory, p.table(), side, {}, p.chains.target, {});
  CHECK_FALSE(r1.pass);
  CHECK(r1.step == 1);

  Chain missing_support = *p.chains.forward.chain;
  missing_support.steps[3].supports.clear();
  auto r2 = verify_chain(missing_support, p.chains.theory, p.table(), side, {},
                         p.chains.target, {});
  CHECK_FALSE(r2.pass);
  CHECK(r2.step == 3);

  Chain wrong_rule = *p.chains.forward.chain;
  wrong_rule.steps[0].rule = 0;  // concludes Large, not Zumpus
  auto r3 = verify_chain(wrong_rule, p.chains.theory, p.table(), side, {}, p.chains.target, {});
  CHECK_FALSE(r3.pass);
  CHECK(r3.step == 0);

  Chain flipped = *p.chains.forward.chain;
  flipped.target_value = true;
  auto r4 = verify_chain(flipped, p.chains.theory, p.table(), side, {}, p.chains.target, {});
  CHECK_FALSE(r4.pass);

  auto rv = run(kRavenEnvelope);
  Chain short_exclusion = *rv.chains.forward.chain;
  short_exclusion.steps[0].excluded.pop_back();
  auto r5 = verify_chain(short_exclusion, rv.chains.theory, rv.table(),
                         rv.fx.grounding().side, {}, rv.chains.target, {});
  CHECK_FALSE(r5.pass);
  CHECK(r5.why == "excluded set does not cover the domain");

  Chain weak_supports = *rv.chains.forward.chain;
  weak_supports.steps[0].supports.clear();  // keeps the two comparisons only
  auto r6 = verify_chain(weak_supports, rv.chains.theory, rv.table(),
                         rv.fx.grounding().side, {}, rv.chains.target, {});
  CHECK_FALSE(r6.pass);
  CHECK(r6.why == "supports do not entail the binding");
}

TEST_CASE("serialized chains carry steps, conclusion, and tree") {
  auto p = run(kRavenEnvelope);
  auto j = chain_to_json(p.chains.forward, p.table(), p.chains.theory);
  CHECK(j["direction"] == "forward");
  CHECK(j["outcome"] == "found");
  REQUIRE(j["steps"].size() == 1);
  CHECK(j["steps"][0]["via"] == "elimination");
  CHECK(j["steps"][0]["derived"] == "Pos(raven) = 4");
  CHECK(j["steps"][0]["supports"].size() == 3);
  CHECK(j["conclusion"]["holds"] == true);
  CHECK(j["pattern"] == "elimination:1");
  REQUIRE(j["tree"]["children"].size() == 1);
  auto node = j["tree"]["children"][0];
  CHECK(node["via"] == "elimination");
  REQUIRE(node["children"].size() == 3);
  CHECK(node["children"][1]["constraint"] == "Pos(robin) > Pos(raven)");

  auto fail = run(R"json({
    "objects": ["a"],
    "facts": ["forall x. A(x) -> B(x)", "forall x. B(x) -> A(x)"],
    "query": ["A(a)"]
  })json");
  auto nj = chain_to_json(fail.chains.backward, fail.table(), fail.chains.theory);
  CHECK(nj["outcome"] == "cycle");
  CHECK(nj["steps"].empty());
  CHECK(nj["direction"].is_null());
}

TEST_CASE("found chains on random theories are sound and verified") {
  testutil::Rng rng(0x5eed'c4a1'9e3fULL);
  int found_forward = 0, found_backward = 0;
  for (int iter = 0; iter < 300; ++iter) {
    oracle::TheoryGen gen(rng);
    auto formulas = gen.constraints();
    std::vector<GroundConstraint> facts;
    for (std::size_t i = 0; i < formulas.size(); ++i)
      facts.push_back({formulas[i], static_cast<int>(i)});
    FormulaPtr query = gen.formula(2);
    auto sw = oracle::sweep(gen.table, formulas, query);
    if (!sw.any) continue;  // chains only ever see satisfiable theories

    auto theory = normalize(gen.table, facts);
    SolverConfig config;

    // saturation alone never claims a result
    auto silent = forward_chain(theory, gen.table, {}, std::nullopt, {}, config);
    CHECK(silent.outcome == ChainOutcome::Fixpoint);

    if (sw.q_true == sw.q_false) {
      // undetermined queries must not be settled by either engine or polarity
      for (bool v : {true, false}) {
        ChainTarget t{query, v};
        CHECK(forward_chain(theory, gen.table, {}, t, {}, config).outcome !=
              ChainOutcome::Found);
        CHECK(backward_chain(theory, gen.table, {}, t, {}, config).outcome !=
              ChainOutcome::Found);
      }
      continue;
    }
    bool value = sw.q_true;
    ChainTarget target{query, value};
    auto fwd = forward_chain(theory, gen.table, {}, target, {}, config);
    auto bwd = backward_chain(theory, gen.table, {}, target, {}, config);
    for (const auto* result : {&fwd, &bwd}) {
      if (result->outcome != ChainOutcome::Found) continue;
      (result == &fwd ? found_forward : found_backward)++;
      const Chain& chain = *result->chain;
      CHECK(chain.target_value == value);
      auto check = verify_chain(chain, theory, gen.table, {}, {}, target, config);
      CHECK(check.pass);
      if (!check.pass) {
        CAPTURE(iter);
        CAPTURE(check.step);
        CAPTURE(check.why);
      }
      // every derived property is entailed by the theory
      for (const auto& step : chain.steps) {
        FormulaPtr derived = step.derived.formula(gen.table);
        bool entailed = true;
        oracle::for_each_model(gen.table, [&](const Model& m) {
          if (oracle::satisfies_all(gen.table, m, formulas) &&
              !oracle::eval(derived, gen.table, m))
            entailed = false;
          return entailed;
        });
        CHECK(entailed);
      }
    }
  }
  // the engines are incomplete but must not be vacuous on this corpus
  MESSAGE("found forward=", found_forward, " backward=", found_backward);
  CHECK(found_forward > 5);
  CHECK(found_backward > 5);
}
