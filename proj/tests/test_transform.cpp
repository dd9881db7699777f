#include <algorithm>
#include <functional>

#include "doctest.h"
#include "dcplp/error.hpp"
#include "dcplp/infer.hpp"
#include "dcplp/transform.hpp"
#include "testutil.hpp"

using namespace dcplp;

namespace {

GroundProgram ground(const std::string& text) { return full_ground_program(parse_program(text)); }

std::vector<std::string> lines(const AdFreeProgram& p) {
  std::vector<std::string> out;
  for (const auto& s : p.statements) out.push_back(to_string(s));
  return out;
}

std::vector<std::string> lines(const std::vector<CoreClause>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(to_string(c));
  return out;
}

Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return Errc::Usage;
}

std::string desugared(const std::string& fixture) {
  Program p = testutil::fixture(fixture);
  return to_string(desugar(relevant_ground_program(p, p.task)).core);
}

}  // namespace

TEST_CASE("probabilistic facts become flips") {
  auto out = lines(eliminate_ads(ground("0.4::burglary. alarm :- burglary.")));
  CHECK(out == std::vector<std::string>{"pf_1 ~ flip(0.4).", "burglary :- pf_1=:=1.", "alarm :- burglary."});
}

TEST_CASE("annotated disjunctions become finite distributions") {
  auto out = lines(eliminate_ads(ground("a. 3/10::m(wood); 7/10::m(metal) :- a.")));
  CHECK(out == std::vector<std::string>{"a.", "ad_1 ~ finite([3/10:1,7/10:2]).", "m(wood) :- a, ad_1=:=1.",
                                        "m(metal) :- a, ad_1=:=2."});
}

TEST_CASE("fresh names avoid program symbols") {
  auto out = lines(eliminate_ads(ground("pf_1. 0.5::b. c :- pf_1, b.")));
  CHECK(out.at(1) == "pf_1_ ~ flip(0.5).");
  CHECK(out.at(2) == "b :- pf_1_=:=1.");
}

TEST_CASE("invalid probabilities are rejected") {
  CHECK(error_of([] { eliminate_ads(ground("1.5::a.")); }) == Errc::InvalidProbability);
  CHECK(error_of([] { eliminate_ads(ground("0.6::a; 0.6::b.")); }) == Errc::InvalidProbability);
  CHECK(error_of([] { eliminate_ads(ground("-0.1::a.")); }) == Errc::InvalidProbability);
}

TEST_CASE("distributional clauses get one variable per parent combination") {
  AdFreeProgram a = eliminate_ads(ground(testutil::fixture_text("dc_contexts.pl")));
  DcEliminated d = eliminate_dcs(a);
  std::vector<std::string> facts;
  for (const auto& f : d.facts) facts.push_back(f.name + " ~ " + to_string(f.dist));
  CHECK(facts == std::vector<std::string>{"v1 ~ beta(1,1)", "v2 ~ flip(v1)", "v3 ~ normal(3,1)", "v4 ~ normal(10,1)",
                                          "v5 ~ normal(v3,5)", "v6 ~ normal(v4,5)",
                                          "v7 ~ finite([0.2:1,0.5:2,0.3:3])"});
  auto ctx = lines(d.context_rules);
  CHECK(std::find(ctx.begin(), ctx.end(), "rv(c,v5) :- rv(b,v3).") != ctx.end());
  CHECK(std::find(ctx.begin(), ctx.end(), "rv(b,v4) :- not a.") != ctx.end());
  CHECK(d.vars_per_term.at("c") == std::vector<std::string>{"v5", "v6"});
}

TEST_CASE("a single normal needs no context") {
  DcEliminated d = eliminate_dcs(eliminate_ads(ground("x ~ normal(0,1). q :- x > 0.")));
  REQUIRE(d.facts.size() == 1);
  CHECK(lines(d.context_rules) == std::vector<std::string>{"rv(x,v1)."});
}

TEST_CASE("guarded temperatures share a term") {
  DcEliminated d =
      eliminate_dcs(eliminate_ads(ground("0.2::hot. t ~ normal(27,5) :- hot. t ~ normal(20,5) :- not hot.")));
  CHECK(d.vars_per_term.at("t").size() == 2);
  CHECK(lines(d.context_rules) ==
        std::vector<std::string>{"rv(pf_1,v1).", "rv(t,v2) :- hot.", "rv(t,v3) :- not hot."});
}

TEST_CASE("cyclic random terms") {
  auto f = [] { eliminate_dcs(eliminate_ads(ground("x ~ normal(y,1). y ~ normal(x,1)."))); };
  CHECK(error_of(f) == Errc::CyclicRandomTermDependency);
}

TEST_CASE("expansion cap") {
  std::string text = "a ~ normal(0,1) :- g1. a ~ normal(1,1) :- not g1. 0.5::g1. 0.5::g2.\n"
                     "b ~ normal(a,1) :- g2. b ~ normal(a,2) :- not g2.\n"
                     "c ~ normal(b,1).\n";
  TransformConfig cfg;
  cfg.expansion_cap = 5;
  auto f = [&] { eliminate_dcs(eliminate_ads(ground(text)), cfg); };
  CHECK(error_of(f) == Errc::UnboundedExpansion);
  cfg.expansion_cap = 100;
  CHECK(eliminate_dcs(eliminate_ads(ground(text)), cfg).facts.size() == 2 + 2 + 4 + 4);
}

TEST_CASE("contextualization splits a rule per variable combination") {
  AdFreeProgram a = eliminate_ads(ground(testutil::fixture_text("dc_contexts.pl")));
  DcEliminated d = eliminate_dcs(a);
  auto rules = lines(contextualize(d.logic_rules, d.vars_per_term, build_intern_table(a.statements)));
  CHECK(std::count_if(rules.begin(), rules.end(), [](const std::string& s) { return s.rfind("g :-", 0) == 0; }) == 4);
  CHECK(std::find(rules.begin(), rules.end(), "a :- rv(pf_1,v2), v2=:=1.") != rules.end());
  CHECK(std::find(rules.begin(), rules.end(), "g :- rv(b,v4), rv(c,v6), a, not f, v4+v6<15.") != rules.end());
}

TEST_CASE("contextualized single term") {
  AdFreeProgram a = eliminate_ads(ground("x ~ flip(0.3). a :- x =:= 1."));
  DcEliminated d = eliminate_dcs(a);
  CHECK(lines(contextualize(d.logic_rules, d.vars_per_term, build_intern_table(a.statements))) ==
        std::vector<std::string>{"a :- rv(x,v1), v1=:=1."});
}

TEST_CASE("desugared example with inconsistent contexts pruned") {
  CHECK(desugared("dc_contexts.pl") ==
        "v1 ~ beta(1,1).\n"
        "v2 ~ flip(v1).\n"
        "v3 ~ normal(3,1).\n"
        "v4 ~ normal(10,1).\n"
        "v5 ~ normal(v3,5).\n"
        "v6 ~ normal(v4,5).\n"
        "v7 ~ finite([0.2:1,0.5:2,0.3:3]).\n"
        "\n"
        "a :- v2=:=1.\n"
        "d :- a, not v3<5, v3<10, v7=:=1.\n"
        "d :- not a, not v4<5, v4<10, v7=:=1.\n"
        "e :- a, not v3<5, v3<10, v7=:=2.\n"
        "e :- not a, not v4<5, v4<10, v7=:=2.\n"
        "f :- a, not v3<5, v3<10, v7=:=3.\n"
        "f :- not a, not v4<5, v4<10, v7=:=3.\n"
        "g :- a, not f, v3+v5<15.\n");
}

TEST_CASE("desugared color program with a user-defined sample space") {
  CHECK(desugared("color.pl") ==
        "v1 ~ uniform([1,2,3]).\n"
        "v2 ~ uniform([red,green,blue]).\n"
        "\n"
        "not_red :- 2=<v1, not v2=:=red.\n"
        "not_red_either :- 2=<v1, v2=\\=red.\n");
}

TEST_CASE("intern table numbers constants in order of appearance") {
  InternTable t = build_intern_table(parse_program("c ~ uniform([red,green,blue]). d ~ uniform([green,teal]).").statements);
  REQUIRE(t.lookup("red"));
  CHECK(*t.lookup("red") < *t.lookup("green"));
  CHECK(*t.lookup("green") < *t.lookup("blue"));
  CHECK(*t.lookup("blue") < *t.lookup("teal"));
  CHECK_FALSE(t.lookup("purple"));
  CHECK(t.name_of(*t.lookup("teal")) == "teal");
}

TEST_CASE("dependency graph of a chain") {
  Desugared d = desugar(ground("x ~ normal(0,1). y ~ normal(x,1). z ~ normal(y,1). q :- z > 0."));
  const DependencyGraph& g = d.graph;
  REQUIRE(g.nodes.size() == 3);
  CHECK(g.parents[0].empty());
  CHECK(g.parents[1] == std::vector<int>{0});
  CHECK(g.parents[2] == std::vector<int>{1});
  CHECK(g.children[0] == std::vector<int>{1});
  CHECK(g.topo == std::vector<int>{0, 1, 2});
  CHECK(d.diagnostics.empty());
}

TEST_CASE("domain warning for a continuous parent of a count parameter") {
  Desugared d = desugar(ground("x ~ normal(3,1). n ~ poisson(x). q :- n > 2."));
  REQUIRE(d.diagnostics.size() == 1);
  CHECK(d.diagnostics[0].kind == DiagKind::DomainWarning);
}

TEST_CASE("empty program has an empty graph") {
  Desugared d = desugar(ground("a. b :- a."));
  CHECK(d.graph.nodes.empty());
  CHECK(d.core.vars.empty());
  CHECK(d.core.clauses.size() == 2);
}

TEST_CASE("overlapping contexts are reported") {
  Program p = testutil::fixture("gpa.pl");
  Desugared clean = desugar(full_ground_program(p));
  CHECK(check_dc1(clean.core, clean.graph).empty());

  Desugared bad = desugar(ground("0.5::a. 0.5::b. x ~ normal(0,1) :- a. x ~ normal(5,1) :- b. q :- x > 1."));
  auto ds = check_dc1(bad.core, bad.graph);
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].kind == DiagKind::Dc1Violation);
  CHECK(ds[0].message.find("x") != std::string::npos);
}
