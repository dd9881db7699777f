#pragma once

#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcplp/ast.hpp"
#include "dcplp/transform.hpp"

namespace dcplp {

enum class VarKind { Derived, Comparison, ChainBit };

struct PropVar {
  int id = 0;
  VarKind kind = VarKind::Derived;
  Term atom;                 // ground atom, or comparison over variable names
  std::string key;
  std::vector<int> rvs;      // indices of random variables a comparison mentions
  // chain bits of symbolically marginalized variables
  int chain_rv = -1;
  double chain_q = 0.0;
  bool symbolic = false;     // comparison fully determined by chain bits
};

struct FNode;
using Formula = std::shared_ptr<const FNode>;

struct FNode {
  enum class Op { Var, Not, And, Or, True, False } op = Op::True;
  int var = -1;
  std::vector<Formula> kids;
};

Formula f_true();
Formula f_false();
Formula f_var(int v);
Formula f_not(Formula a);
Formula f_and(std::vector<Formula> kids);
Formula f_or(std::vector<Formula> kids);
Formula f_iff(Formula a, Formula b);
Formula f_lit(int v, bool positive);

struct VarTable {
  std::vector<PropVar> vars;
  std::unordered_map<std::string, int> by_key;

  int find(const std::string& key) const;
  int add(PropVar v);
  std::size_t size() const { return vars.size(); }
};

struct PropFormula {
  Formula root;
  std::shared_ptr<VarTable> table;
  // readable view of the root: completion definitions and asserted conjuncts
  std::vector<std::pair<int, Formula>> definitions;
  std::vector<Formula> asserted;
};

PropFormula clark_completion(const CoreProgram& p);
PropFormula assert_evidence(const PropFormula& f, const QueryTask& task);
PropFormula conjoin(const PropFormula& f, Formula g);

// Literal of a query atom: its derived variable, or False when the atom has no clause.
Formula atom_literal(const PropFormula& f, const Term& atom, bool positive = true);

bool evaluate(const Formula& f, const std::vector<bool>& assignment);

std::string to_text(const PropFormula& f);
std::string var_label(const PropVar& v);

}  // namespace dcplp
