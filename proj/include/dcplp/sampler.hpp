#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dcplp/ast.hpp"
#include "dcplp/formula.hpp"
#include "dcplp/transform.hpp"

namespace dcplp {

// SplitMix64, usable as a UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();
  double uniform01();  // [0, 1)

 private:
  std::uint64_t state_;
};

// Independent stream per (base seed, sample index, variable index).
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t sample, std::uint64_t var);

inline constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

// Arithmetic expression over random variables, in postfix form.
struct Expr {
  enum class Op { Num, Var, Add, Sub, Mul, Div, Neg, Abs, Max, Min };
  struct Ins {
    Op op;
    double num = 0.0;
    int var = -1;
  };
  std::vector<Ins> code;

  double eval(const std::vector<double>& values) const;
  bool constant() const;
  std::vector<int> vars() const;
};

// Constants name variables of `p` or interned sample-space values.
Expr compile_expr(const Term& t, const CoreProgram& p);

struct CmpExpr {
  CmpOp op = CmpOp::Lt;
  Expr lhs;
  Expr rhs;

  // Comparisons involving NaN are false.
  bool eval(const std::vector<double>& values) const;
  std::vector<int> vars() const;
};

CmpExpr compile_cmp(const Term& t, const CoreProgram& p);

struct DistSpec {
  DistKind kind = DistKind::Delta;
  std::vector<Expr> params;    // finite: one probability per outcome
  std::vector<double> values;  // outcomes of finite and list-uniform distributions
};

DistSpec compile_dist(const Term& dist, const CoreProgram& p);

struct DistInstance {
  DistKind kind = DistKind::Delta;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> probs;
  std::vector<double> values;
};

// Throws InvalidParameter when parameters fall outside the distribution's domain.
DistInstance instantiate(const DistSpec& d, const std::vector<double>& values, const std::string& name = "");

// pdf for continuous distributions, pmf otherwise.
double density(const DistInstance& d, double x);
double draw(const DistInstance& d, Rng& rng);

// Outcomes with their probabilities for distributions of finite support.
// Missing mass of a finite distribution shows up as a NaN outcome.
std::vector<std::pair<double, double>> finite_outcomes(const DistInstance& d);
bool has_finite_support(DistKind k);

struct ProbModel {
  std::vector<std::string> names;
  std::vector<DistSpec> dists;
  std::vector<std::vector<int>> parents;
  std::vector<int> topo;
};

ProbModel compile_model(const CoreProgram& p, const DependencyGraph& g);

// Closure of `roots` under parents, in topological order.
std::vector<int> ancestral_closure(const ProbModel& m, const std::vector<int>& roots);

// Continuous variables pinned by delta_interval comparisons of the formula.
std::map<int, double> forced_assignments(const PropFormula& f, const CoreProgram& p);

class Sampler {
 public:
  Sampler(const ProbModel& m, std::vector<int> vars, std::map<int, double> forced, std::uint64_t seed);

  // Fills values of the sampled variables; others are left untouched.
  void draw(std::uint64_t index, std::vector<double>& values) const;
  std::vector<double> draw(std::uint64_t index) const;

  const std::vector<int>& vars() const { return vars_; }

 private:
  const ProbModel* model_;
  std::vector<int> vars_;
  std::map<int, double> forced_;
  std::uint64_t seed_;
};

}  // namespace dcplp
