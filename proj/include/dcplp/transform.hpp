#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcplp/ast.hpp"
#include "dcplp/ground.hpp"

namespace dcplp {

struct TransformConfig {
  std::size_t expansion_cap = 1000000;
};

// A random variable introduced by desugaring.
struct RandomVar {
  std::string name;
  Term dist;     // parameters reference other variables by name
  Term origin;   // random term it was introduced for
  std::size_t stmt = 0;
};

struct CoreClause {
  Term head;
  std::vector<Literal> body;
};

// Constants of user-defined sample spaces mapped to natural numbers.
struct InternTable {
  std::map<std::string, double> ids;
  std::vector<std::string> order;

  std::optional<double> lookup(const std::string& name) const;
  std::string name_of(double v) const;
};

InternTable build_intern_table(const std::vector<Statement>& statements);

struct AdFreeProgram {
  std::vector<Statement> statements;
  std::set<std::string> symbols;  // every name used, including fresh ones
};

struct DcEliminated {
  std::vector<RandomVar> facts;
  std::vector<CoreClause> context_rules;  // heads rv(term, var)
  std::vector<CoreClause> logic_rules;
  std::map<std::string, std::vector<std::string>> vars_per_term;
  std::map<std::string, Term> terms;  // key -> random term
};

struct CoreProgram {
  std::vector<RandomVar> vars;
  std::vector<CoreClause> clauses;
  InternTable interns;
  std::map<std::string, std::vector<std::string>> vars_per_term;
  // variable -> unfolded bodies under which its random term denotes it
  std::map<std::string, std::vector<std::vector<Literal>>> contexts;

  int find_var(const std::string& name) const;
  void reindex();

 private:
  std::unordered_map<std::string, int> index_;
};

struct DependencyGraph {
  std::vector<std::string> nodes;
  std::vector<std::vector<int>> parents;
  std::vector<std::vector<int>> children;
  std::vector<int> topo;
};

AdFreeProgram eliminate_ads(const GroundProgram& gp);
DcEliminated eliminate_dcs(const AdFreeProgram& p, const TransformConfig& cfg = {});
std::vector<CoreClause> contextualize(const std::vector<CoreClause>& rules,
                                      const std::map<std::string, std::vector<std::string>>& vars_per_term,
                                      const InternTable& interns, const TransformConfig& cfg = {});
CoreProgram unfold_rv(const DcEliminated& dc, const std::vector<CoreClause>& contextualized,
                      const InternTable& interns);
DependencyGraph validate_core(const CoreProgram& p, std::vector<Diagnostic>* diags = nullptr);

struct Desugared {
  CoreProgram core;
  DependencyGraph graph;
  std::vector<Diagnostic> diagnostics;
};

Desugared desugar(const GroundProgram& gp, const TransformConfig& cfg = {});

std::string to_string(const CoreClause& c);
std::string to_string(const CoreProgram& p);

// Parents of a distribution: variable names referenced by its parameters.
std::vector<std::string> dist_parents(const Term& dist, const CoreProgram& p);

}  // namespace dcplp
