#include <bit>
#include <random>

#include "doctest.h"
#include "dcplp/circuit.hpp"
#include "dcplp/error.hpp"
#include "dcplp/infer.hpp"
#include "circuitutil.hpp"
#include "testutil.hpp"

using namespace dcplp;
using namespace testutil;

namespace {

int add(Circuit& c, CNode n) {
  c.nodes.push_back(std::move(n));
  return static_cast<int>(c.nodes.size() - 1);
}

CNode lit(int v, bool pos = true) {
  CNode n;
  n.type = CNode::Type::Lit;
  n.var = v;
  n.positive = pos;
  return n;
}

CNode gate(CNode::Type t, std::vector<int> kids) {
  CNode n;
  n.type = t;
  n.kids = std::move(kids);
  return n;
}

bool same_shape(const Circuit& a, const Circuit& b) {
  if (a.root != b.root || a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const CNode &x = a.nodes[i], &y = b.nodes[i];
    if (x.type != y.type || x.var != y.var || x.positive != y.positive || x.kids != y.kids) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("single variable") {
  Circuit c = compile(over(1, f_var(0)));
  const CNode& r = c.nodes[c.root];
  CHECK(r.type == CNode::Type::Lit);
  CHECK(r.var == 0);
  CHECK(r.positive);
  CHECK(model_count(c, 1) == 1);
}

TEST_CASE("contradiction and tautology") {
  Circuit f = compile(over(1, f_and({f_var(0), f_not(f_var(0))})));
  CHECK(f.nodes[f.root].type == CNode::Type::False);
  CHECK(model_count(f, 3) == 0);
  Circuit t = compile(over(3, f_or({f_var(0), f_not(f_var(0))})));
  CHECK(t.nodes[t.root].type == CNode::Type::True);
  CHECK(model_count(t, 3) == 8);
}

TEST_CASE("smoothing over a comparison") {
  // Or(x, x & y) with y in scope becomes Or(x & (y | -y), x & y).
  Circuit c;
  int x = add(c, lit(0));
  int y = add(c, lit(1));
  int xy = add(c, gate(CNode::Type::And, {x, y}));
  c.root = add(c, gate(CNode::Type::Or, {x, xy}));
  CHECK_FALSE(is_smooth(c, {1}));
  Circuit s = smooth(c, {1});
  CHECK(is_smooth(s, {1}));
  CHECK(is_decomposable(s));
  Tables t(2);
  CHECK(table_of(s, t) == table_of(c, t));
  // Not deterministic, so the counting semiring gives 3 rather than the 2 models; smoothing keeps it.
  CHECK(model_count(c, 2) == 3);
  CHECK(model_count(s, 2) == 3);
  s.compute_var_sets();
  const CNode& root = s.nodes[s.root];
  REQUIRE(root.type == CNode::Type::Or);
  for (int k : root.kids) CHECK(s.var_sets[k] == std::vector<int>{0, 1});
}

TEST_CASE("variables outside the scope are not smoothed") {
  Circuit c;
  int x = add(c, lit(0));
  int d = add(c, lit(1));
  int xd = add(c, gate(CNode::Type::And, {x, d}));
  c.root = add(c, gate(CNode::Type::Or, {x, xd}));
  Circuit s = smooth(c, {0});
  CHECK(same_shape(s, c));
}

TEST_CASE("already smooth circuits are unchanged") {
  Circuit c = compile(over(2, f_or({f_and({f_var(0), f_var(1)}), f_and({f_not(f_var(0)), f_not(f_var(1))})})));
  REQUIRE(is_smooth(c, {0, 1}));
  CHECK(same_shape(smooth(c, {0, 1}), c));
}

TEST_CASE("completion of the machines program has one model per leaf assignment") {
  Program p = testutil::with_query(testutil::fixture("machines_rv.pl"), "works(1)");
  PropFormula f = clark_completion(desugar(relevant_ground_program(p, p.task)).core);
  const int n = static_cast<int>(f.table->size());
  REQUIRE(n == 7);
  Tables t(n);
  std::uint64_t brute = Tables::count(table_of(f.root, t));
  CHECK(brute == 16);
  Circuit c = compile(f);
  CHECK(model_count(c, n) == brute);
  CHECK(model_count(smooth(c, all_vars(n)), n) == brute);
}

TEST_CASE("compilation preserves the satisfying set") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 200; ++i) {
    int n = std::uniform_int_distribution<int>(1, 16)(rng);
    PropFormula f = over(n, random_formula(rng, n, 6));
    CAPTURE(i);
    Tables t(n);
    Bits expect = table_of(f.root, t);
    Circuit c = compile(f);
    CHECK(table_of(c, t) == expect);
    CHECK(model_count(c, n) == Tables::count(expect));
    Circuit s = smooth(c, all_vars(n));
    CHECK(table_of(s, t) == expect);
    CHECK(is_decomposable(s));
    CHECK(is_deterministic(s));
    CHECK(is_smooth(s, all_vars(n)));
    CHECK(model_count(s, n) == Tables::count(expect));
  }
}

TEST_CASE("identical formulas compile to identical circuits") {
  std::mt19937 a(7), b(7);
  for (int i = 0; i < 20; ++i) {
    PropFormula fa = over(10, random_formula(a, 10, 5));
    PropFormula fb = over(10, random_formula(b, 10, 5));
    CHECK(same_shape(compile(fa), compile(fb)));
  }
}

TEST_CASE("compilation budgets") {
  std::vector<Formula> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(f_iff(f_var(i), f_var(20 + i)));
  PropFormula f = over(40, f_or(std::move(xs)));
  CompileConfig cfg;
  cfg.node_cap = 50;
  try {
    compile(f, cfg);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CompilationBudgetExceeded);
  }
  cfg = CompileConfig{};
  cfg.var_cap = 10;
  try {
    compile(f, cfg);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CompilationBudgetExceeded);
  }
}

TEST_CASE("graph output") {
  Circuit c = compile(over(2, f_and({f_var(0), f_not(f_var(1))})));
  std::string dot = to_dot(c, [](int v) { return "x" + std::to_string(v); });
  CHECK(dot.rfind("digraph circuit {", 0) == 0);
  CHECK(dot.find("label=\"x0\"") != std::string::npos);
  CHECK(dot.find("label=\"¬x1\"") != std::string::npos);
  CHECK(dot.find("penwidth=2") != std::string::npos);
}

TEST_CASE("ball program evidence circuit splits on the material") {
  Program p = testutil::fixture("ball_flip.pl");
  InferConfig cfg;
  Prepared prep = prepare(p, cfg);
  Compiled c = compile_prepared(prep, cfg.compile);
  const Circuit& e = c.evidence;
  const CNode& root = e.nodes[e.root];
  REQUIRE(root.type == CNode::Type::Or);
  REQUIRE(root.kids.size() == 2);
  for (int k : root.kids) CHECK(e.nodes[k].type == CNode::Type::And);
  CHECK(is_decomposable(e));
  CHECK(is_deterministic(e));
  CHECK(is_smooth(e, prep.model.scope));
}
