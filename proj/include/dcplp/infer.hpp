#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dcplp/ast.hpp"
#include "dcplp/circuit.hpp"
#include "dcplp/formula.hpp"
#include "dcplp/ground.hpp"
#include "dcplp/sampler.hpp"
#include "dcplp/semiring.hpp"
#include "dcplp/transform.hpp"

namespace dcplp {

struct InferConfig {
  std::size_t samples = 10000;
  std::uint64_t seed = 42;
  bool symbolic = true;
  unsigned jobs = 1;
  GroundConfig ground;
  TransformConfig transform;
  CompileConfig compile;
  std::string trace_path;  // per-sample CSV when non-empty
};

struct Label {
  InfNum pos = kOne;
  InfNum neg = kOne;
};

Label indicator_label(bool truth);
Label density_label(double pdf);
Label marginal_label(double p);
// Marginal probability that a comparison over the single variable `var` holds.
Label label_sialw(const CmpExpr& c, int var, const DistInstance& d);

struct Model {
  CoreProgram core;
  DependencyGraph graph;
  ProbModel prob;
  PropFormula phi;  // completion, evidence and symbolic constraints
  std::vector<Formula> evidence;
  std::vector<CmpExpr> cmps;              // by propositional variable id
  std::vector<char> is_cmp;
  std::vector<int> delta_rv;              // continuous variable of a delta_interval comparison, or -1
  std::vector<int> order;
  std::vector<int> scope;
  std::vector<int> sampled;               // topological order
  std::vector<int> symbolic_rvs;
  std::vector<int> sampled_cmps;          // comparisons labelled per sample
  std::map<int, double> forced;
  std::vector<Label> base_labels;
  std::size_t stochastic = 0;
  bool exact = false;
};

Model build_model(const CoreProgram& core, const DependencyGraph& graph, const QueryTask& evidence,
                  bool symbolic);

// Labels of every propositional variable for one sampled world.
std::vector<Label> label_ialw(const Model& m, const std::vector<double>& values);

InfNum eval_circuit(const Circuit& c, const std::vector<Label>& labels);
std::vector<InfNum> eval_nodes(const Circuit& c, const std::vector<Label>& labels);

// Observations become clauses '$obs_k' :- delta_interval(T, W) plus evidence '$obs_k'.
Program lower_observations(const Program& p);

struct Prepared {
  Program program;  // with observations lowered
  GroundProgram ground;
  Desugared desugared;
  Model model;
  std::vector<Term> queries;
};

Prepared prepare(const Program& p, const InferConfig& cfg);
// Same, from an already grounded program; `lowered` carries the task.
Prepared prepare_ground(const Program& lowered, GroundProgram gp, const InferConfig& cfg);

struct Compiled {
  Circuit evidence;
  std::vector<Circuit> queries;
  std::size_t bdd_nodes = 0;
};

Compiled compile_prepared(const Prepared& p, const CompileConfig& cfg);

struct InferenceResult {
  Term query;
  double probability = 0.0;
  bool exact = false;
  InfNum numerator;
  InfNum denominator;
  InfNum ratio;
  std::size_t stochastic_leaves = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double ci_halfwidth = 0.0;
};

std::vector<InferenceResult> estimate(const Prepared& p, const Compiled& c, const InferConfig& cfg);
std::vector<InferenceResult> answer_task(const Program& p, const InferConfig& cfg = {});

// Reference results.
struct OracleResult {
  Term query;
  double probability = 0.0;
  std::size_t accepted = 0;  // rejection only
};

std::vector<OracleResult> enumerate_oracle(const Program& p, const InferConfig& cfg = {});
// Enumeration over a prepared model; it must have been built without symbolic variables.
std::vector<OracleResult> enumerate_prepared(const Prepared& p);
std::vector<OracleResult> rejection_oracle(const Program& p, const InferConfig& cfg = {});

// Evaluates the logic of a model directly on sampled values.
class WorldEvaluator {
 public:
  explicit WorldEvaluator(const Model& m);
  // Truth of every propositional variable; symbolic comparisons read their variables' values.
  std::vector<bool> eval(const std::vector<double>& values) const;
  bool evidence(const std::vector<bool>& world) const;
  bool holds(const Term& atom, const std::vector<bool>& world) const;

 private:
  const Model* m_;
};

// Samples worlds and reports random terms with two context bodies true at once.
std::vector<Diagnostic> check_dc1(const CoreProgram& core, const DependencyGraph& g, std::size_t worlds = 10000,
                                  std::uint64_t seed = 42);

}  // namespace dcplp
