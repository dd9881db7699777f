#include <algorithm>

#include "doctest.h"
#include "dcplp/error.hpp"
#include "dcplp/ground.hpp"
#include "dcplp/infer.hpp"
#include "testutil.hpp"

using namespace dcplp;

namespace {

std::vector<std::string> lines(const GroundProgram& gp) {
  std::vector<std::string> out;
  for (const auto& s : gp.statements) out.push_back(to_string(s));
  return out;
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST_CASE("relevant grounding of the rv-style machines program") {
  Program p = parse_program(
      "rv_hot ~ flip(0.2). hot:- rv_hot=:=1.\n"
      "rv_cool(1) ~ flip(0.99). cool(1):- rv_cool(1)=:=1.\n"
      "rv_cool(2) ~ flip(0.95). cool(2):- rv_cool(2)=:=1.\n"
      "temp(1) ~ normal(27,5):- hot. temp(1) ~ normal(20,5):- not hot.\n"
      "temp(2) ~ normal(27,5):- hot. temp(2) ~ normal(20,5):- not hot.\n"
      "works(N):- cool(N). works(N):- temp(N)<25.0.\n");
  QueryTask t;
  t.queries.push_back(parse_term("works(1)"));
  GroundProgram gp = relevant_ground_program(p, t);
  auto ls = lines(gp);
  CHECK(ls == std::vector<std::string>{
                  "rv_hot ~ flip(0.2).",
                  "hot :- rv_hot=:=1.",
                  "rv_cool(1) ~ flip(0.99).",
                  "cool(1) :- rv_cool(1)=:=1.",
                  "temp(1) ~ normal(27,5) :- hot.",
                  "temp(1) ~ normal(20,5) :- not hot.",
                  "works(1) :- cool(1).",
                  "works(1) :- temp(1)<25.0.",
              });
  CHECK(gp.query_atoms.size() == 1);
}

TEST_CASE("query on a ground fact") {
  Program p = parse_program("alarm. other :- alarm. 0.3::unrelated.");
  QueryTask t;
  t.queries.push_back(parse_term("alarm"));
  CHECK(lines(relevant_ground_program(p, t)) == std::vector<std::string>{"alarm."});
}

TEST_CASE("sweets with evidence keeps the cone of the query") {
  Program p = testutil::fixture("sweets.pl");
  QueryTask t;
  t.queries.push_back(parse_term("favorite"));
  t.evidence.emplace_back(parse_term("large"), false);
  auto ls = lines(relevant_ground_program(p, t));
  CHECK(has(ls, "favorite :- red>15, not yellow<5."));
  CHECK(has(ls, "red ~ poisson(10) :- not large."));
  CHECK(has(ls, "yellow ~ poisson(2*red) :- not balanced."));
  CHECK_FALSE(has(ls, "t :- favorite, not large."));
}

TEST_CASE("non-ground queries expand to their instances") {
  Program p = testutil::fixture("machines.pl");
  QueryTask t;
  t.queries.push_back(parse_term("works(N)"));
  GroundProgram gp = relevant_ground_program(p, t);
  std::vector<std::string> qs;
  for (const auto& q : gp.query_atoms) qs.push_back(to_string(q));
  std::sort(qs.begin(), qs.end());
  CHECK(qs == std::vector<std::string>{"works(1)", "works(2)"});
}

TEST_CASE("grounding errors") {
  Program p = parse_program("a :- b. b.");
  QueryTask t;
  t.queries.push_back(parse_term("missing"));
  CHECK_THROWS_WITH_AS(relevant_ground_program(p, t), doctest::Contains("missing"), Error);
  try {
    relevant_ground_program(p, t);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownPredicate);
  }

  QueryTask obs;
  obs.queries.push_back(parse_term("a"));
  obs.observations.emplace_back(parse_term("nosuch"), 1.0);
  try {
    relevant_ground_program(p, obs);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownRandomTerm);
  }
}

TEST_CASE("infinite Herbrand universe exhausts the memo budget") {
  Program p = parse_program("nat(0). nat(s(X)) :- nat(X). q :- nat(Y), bad(Y).");
  QueryTask t;
  t.queries.push_back(parse_term("q"));
  GroundConfig cfg;
  cfg.memo_cap = 1000;
  cfg.max_term_depth = 64;
  try {
    relevant_ground_program(p, t, cfg);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonTerminatingGrounding);
    CHECK(is_budget(e.code()));
  }
}

TEST_CASE("unreachable clauses do not change the relevant program") {
  Program base = testutil::fixture("machines.pl");
  Program more = base;
  Program extra = parse_program("spare(X) :- machine(X), broken(X). 0.1::broken(1). z ~ normal(0,1).");
  more.statements.insert(more.statements.end(), extra.statements.begin(), extra.statements.end());
  CHECK(lines(relevant_ground_program(base, base.task)) == lines(relevant_ground_program(more, more.task)));
}

TEST_CASE("full and relevant grounding give the same probabilities") {
  for (std::uint32_t seed = 1; seed <= 20; ++seed) {
    std::string text = testutil::random_discrete_program(seed * 7919u);
    CAPTURE(text);
    Program p = parse_program(text);
    InferConfig cfg;
    cfg.symbolic = false;
    double relevant = 0.0;
    try {
      relevant = enumerate_oracle(p, cfg).at(0).probability;
    } catch (const Error& e) {
      REQUIRE(e.code() == Errc::ZeroProbabilityEvidence);
      continue;
    }
    // The whole program, grounded without regard to the task.
    Program lowered = lower_observations(p);
    GroundProgram full = full_ground_program(lowered);
    full.query_atoms = p.task.queries;
    full.task = lowered.task;
    Prepared prep = prepare_ground(lowered, std::move(full), cfg);
    CHECK(enumerate_prepared(prep).at(0).probability == doctest::Approx(relevant).epsilon(1e-12));
  }
}
