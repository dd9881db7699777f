#include <functional>

#include "doctest.h"
#include "dcplp/error.hpp"
#include "dcplp/formula.hpp"
#include "dcplp/infer.hpp"
#include "testutil.hpp"

using namespace dcplp;

namespace {

CoreProgram core_of(const std::string& text) { return desugar(full_ground_program(parse_program(text))).core; }

CoreProgram core_for(const Program& p) { return desugar(relevant_ground_program(p, p.task)).core; }

// Least model of an acyclic core program for fixed comparison outcomes.
std::vector<bool> program_model(const CoreProgram& core, const VarTable& tab, std::vector<bool> world) {
  for (std::size_t round = 0; round <= tab.size(); ++round) {
    std::vector<bool> next = world;
    for (std::size_t v = 0; v < tab.size(); ++v)
      if (tab.vars[v].kind == VarKind::Derived) next[v] = false;
    for (const auto& c : core.clauses) {
      bool body = true;
      for (const auto& l : c.body) {
        int id = tab.find(to_string(l.atom));
        bool t = id >= 0 && world[id];
        if (t == l.negated) {
          body = false;
          break;
        }
      }
      if (body) next[tab.find(to_string(c.head))] = true;
    }
    world = next;
  }
  return world;
}

}  // namespace

TEST_CASE("completion of the machines program") {
  Program p = testutil::with_query(testutil::fixture("machines_rv.pl"), "works(1)");
  PropFormula f = clark_completion(core_for(p));
  CHECK(to_text(f) ==
        "p dcplp 7 3\n"
        "c 1 atom hot\n"
        "c 2 atom cool(1)\n"
        "c 3 atom works(1)\n"
        "c 4 cmp v1=:=1\n"
        "c 5 cmp v2=:=1\n"
        "c 6 cmp v3<25.0\n"
        "c 7 cmp v4<25.0\n"
        "1 <-> 4\n"
        "2 <-> 5\n"
        "3 <-> (2 | (1 & 6) | (-1 & 7))\n");
}

TEST_CASE("a fact is true") {
  PropFormula f = clark_completion(core_of("a."));
  REQUIRE(f.definitions.size() == 1);
  CHECK(f.definitions[0].second->op == FNode::Op::True);
  CHECK(to_text(f).find("1 <-> T") != std::string::npos);
}

TEST_CASE("negation of a derived atom over comparisons") {
  PropFormula f =
      clark_completion(core_of("x ~ normal(0,1). y ~ normal(0,1). z ~ normal(0,1). a :- abs(x-y)=<1. b :- not a, z>10."));
  std::string t = to_text(f);
  CHECK(t.find("c 1 atom a") != std::string::npos);
  CHECK(t.find("c 2 atom b") != std::string::npos);
  CHECK(t.find("cmp abs(v1-v2)=<1") != std::string::npos);
  CHECK(t.find("cmp v3>10") != std::string::npos);
  CHECK(t.find("1 <-> 3\n") != std::string::npos);
  CHECK(t.find("2 <-> (-1 & 4)\n") != std::string::npos);
}

TEST_CASE("undefined atoms are false") {
  PropFormula f = clark_completion(core_of("0.5::x. a :- x, not b."));
  int b = f.table->find("b");
  REQUIRE(b >= 0);
  for (const auto& [v, def] : f.definitions)
    if (v == b) CHECK(def->op == FNode::Op::False);
  std::vector<bool> w(f.table->size(), false);
  CHECK_FALSE(evaluate(atom_literal(f, parse_term("nowhere")), w));
  CHECK(evaluate(atom_literal(f, parse_term("nowhere"), false), w));
}

TEST_CASE("cyclic rules are rejected") {
  try {
    clark_completion(core_of("0.5::x. a :- x, not b. b :- a."));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CyclicRuleDependency);
  }
  try {
    clark_completion(core_of("a :- not a."));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CyclicRuleDependency);
  }
}

TEST_CASE("evidence is conjoined") {
  PropFormula f = clark_completion(core_of(testutil::fixture_text("machines.pl")));
  CHECK(to_text(assert_evidence(f, QueryTask{})) == to_text(f));

  QueryTask t;
  t.evidence.emplace_back(parse_term("works(2)"), true);
  PropFormula g = assert_evidence(f, t);
  REQUIRE(g.asserted.size() == f.asserted.size() + 1);
  int w2 = f.table->find("works(2)");
  REQUIRE(w2 >= 0);
  CHECK(g.asserted.back()->op == FNode::Op::Var);
  CHECK(g.asserted.back()->var == w2);

  QueryTask bad;
  bad.evidence.emplace_back(parse_term("broken(7)"), true);
  try {
    assert_evidence(f, bad);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownEvidenceAtom);
  }
}

TEST_CASE("complementary comparisons stay distinct variables") {
  PropFormula f1 = clark_completion(core_of("v ~ uniform([1,2,3]). q :- not v<2."));
  PropFormula f2 = clark_completion(core_of("v ~ uniform([1,2,3]). q :- v>=2."));
  // One leaf each; the completions agree once the leaves are identified as complements.
  REQUIRE(f1.table->size() == 2);
  REQUIRE(f2.table->size() == 2);
  for (bool leaf : {false, true}) {
    int q1 = f1.table->find("q"), q2 = f2.table->find("q");
    std::vector<bool> a1(2), a2(2);
    a1[1 - q1] = leaf;
    a2[1 - q2] = !leaf;
    a1[q1] = !leaf;
    a2[q2] = !leaf;
    CHECK(evaluate(f1.root, a1));
    CHECK(evaluate(f2.root, a2));
  }
}

TEST_CASE("models of the completion are the models of the program") {
  for (std::uint32_t seed = 1; seed <= 40; ++seed) {
    std::string text = testutil::random_discrete_program(seed * 104729u);
    CAPTURE(text);
    CoreProgram core = core_for(parse_program(text));
    PropFormula f = clark_completion(core);
    const VarTable& tab = *f.table;
    std::vector<int> leaves, derived;
    for (std::size_t v = 0; v < tab.size(); ++v)
      (tab.vars[v].kind == VarKind::Derived ? derived : leaves).push_back(static_cast<int>(v));
    REQUIRE(tab.size() <= 20);
    std::size_t models = 0;
    for (std::uint32_t bits = 0; bits < (1u << tab.size()); ++bits) {
      std::vector<bool> a(tab.size());
      for (std::size_t v = 0; v < tab.size(); ++v) a[v] = (bits >> v) & 1u;
      if (!evaluate(f.root, a)) continue;
      ++models;
      CHECK(program_model(core, tab, a) == a);
    }
    // Exactly one model per assignment of the comparison leaves.
    CHECK(models == (std::size_t{1} << leaves.size()));
  }
}
