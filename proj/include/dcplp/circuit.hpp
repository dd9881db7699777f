#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcplp/formula.hpp"

namespace dcplp {

struct CNode {
  enum class Type { Lit, And, Or, True, False } type = Type::True;
  int var = -1;
  bool positive = true;
  std::vector<int> kids;
};

// Children always precede their parents in `nodes`.
struct Circuit {
  std::vector<CNode> nodes;
  int root = -1;
  std::vector<std::vector<int>> var_sets;  // sorted, per node

  void compute_var_sets();
  std::size_t edge_count() const;
};

struct CompileConfig {
  std::size_t var_cap = 10000;
  std::size_t node_cap = 10000000;
};

// Reduced ordered BDD with a unique table and computed tables.
class Bdd {
 public:
  static constexpr int kFalse = 0;
  static constexpr int kTrue = 1;

  Bdd(std::vector<int> order, std::size_t num_vars, std::size_t node_cap);

  int var_node(int v);
  int negate(int a);
  int conj(int a, int b);
  int disj(int a, int b);
  int from_formula(const Formula& f);

  int var_of(int n) const { return nodes_[n].var; }
  int lo(int n) const { return nodes_[n].lo; }
  int hi(int n) const { return nodes_[n].hi; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    int var;
    int lo;
    int hi;
  };
  int mk(int var, int lo, int hi);
  int level(int n) const;
  int apply(bool is_and, int a, int b);

  std::vector<Node> nodes_;
  std::vector<int> level_of_;
  std::size_t node_cap_;
  std::unordered_map<std::uint64_t, int> unique_;
  std::unordered_map<std::uint64_t, int> and_cache_;
  std::unordered_map<std::uint64_t, int> or_cache_;
  std::unordered_map<int, int> not_cache_;
  // holds the formula so its address cannot be reused by a later one
  std::unordered_map<const FNode*, std::pair<Formula, int>> formula_cache_;
};

class Compiler {
 public:
  Compiler(const VarTable& table, std::vector<int> order, const CompileConfig& cfg = {});
  Circuit compile(const PropFormula& f);
  std::size_t bdd_size() const { return bdd_.size(); }

 private:
  Circuit to_circuit(int root);
  Bdd bdd_;
};

// Default order: variable ids ascending.
Circuit compile(const PropFormula& f, const CompileConfig& cfg = {});

// Makes every Or node smooth over `scope`, and the root cover all of `scope`.
Circuit smooth(const Circuit& c, const std::vector<int>& scope);

bool is_decomposable(const Circuit& c);
bool is_deterministic(const Circuit& c);
bool is_smooth(const Circuit& c, const std::vector<int>& scope);

// Models over `num_vars` declared variables.
std::uint64_t model_count(const Circuit& c, int num_vars);

std::string to_dot(const Circuit& c, const std::function<std::string(int)>& var_name);

}  // namespace dcplp
