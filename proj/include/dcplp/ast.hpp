#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dcplp {

struct Term {
  enum class Kind { Var, Const, Num, Compound, List };

  Kind kind = Kind::Const;
  std::string name;
  double value = 0.0;
  bool is_int = false;
  // Exact rational as written (a/b); den == 0 means not a rational literal.
  std::int64_t num = 0;
  std::int64_t den = 0;
  std::vector<Term> args;

  bool is_var() const { return kind == Kind::Var; }
  bool is_const() const { return kind == Kind::Const; }
  bool is_num() const { return kind == Kind::Num; }
  bool is_compound() const { return kind == Kind::Compound; }
  bool is_list() const { return kind == Kind::List; }
  std::size_t arity() const { return kind == Kind::Compound ? args.size() : 0; }
};

Term make_var(std::string name);
Term make_const(std::string name);
Term make_num(double v);
Term make_int(std::int64_t v);
Term make_rational(std::int64_t n, std::int64_t d);
Term make_compound(std::string functor, std::vector<Term> args);
Term make_list(std::vector<Term> items);

bool operator==(const Term& a, const Term& b);
inline bool operator!=(const Term& a, const Term& b) { return !(a == b); }

// name/arity for constants and compounds.
std::string indicator(const Term& t);
bool is_ground(const Term& t);
void collect_vars(const Term& t, std::vector<std::string>& out);

enum class CmpOp { Lt, Gt, Leq, Geq, Eq, Neq, DeltaInterval };

bool is_comparison(const Term& t);
std::optional<CmpOp> comparison_op(const Term& t);
const char* cmp_symbol(CmpOp op);
bool is_arith_functor(const Term& t);

enum class DistKind { Flip, Finite, Normal, Beta, Poisson, UniformCont, UniformList, Delta };

std::optional<DistKind> dist_kind(const Term& t);
bool is_dist_functor_name(const std::string& name);
bool is_continuous(DistKind k);

struct Literal {
  Term atom;
  bool negated = false;
};

bool operator==(const Literal& a, const Literal& b);

enum class StmtKind { DistFact, DistClause, ProbFact, AnnotatedDisjunction, NormalClause, Fact };

struct Choice {
  Term prob;
  Term atom;
};

struct Statement {
  StmtKind kind = StmtKind::Fact;
  Term head;  // atom for clauses/facts, random term for distributional statements
  Term dist;
  std::vector<Choice> choices;  // probabilistic facts and ADs
  std::vector<Literal> body;
  int line = 0;
};

struct QueryTask {
  std::vector<Term> queries;
  std::vector<std::pair<Term, bool>> evidence;
  std::vector<std::pair<Term, double>> observations;

  bool empty() const { return queries.empty() && evidence.empty() && observations.empty(); }
};

struct Program {
  std::vector<Statement> statements;
  QueryTask task;
};

Program parse_program(std::string_view text);
Term parse_term(std::string_view text);
// "atom=true", "atom=false", or a bare atom (true).
std::pair<Term, bool> parse_evidence_flag(std::string_view text);
// "term=number".
std::pair<Term, double> parse_observation_flag(std::string_view text);

std::string to_string(const Term& t);
std::string to_string(const Literal& l);
std::string to_string(const std::vector<Literal>& body);
std::string to_string(const Statement& s);
std::string to_string(const Program& p);
std::string format_number(double v);

enum class DiagKind { ReservedHead, RangeRestriction, UnknownDistribution, BadProbability, MalformedObservation, DomainWarning, Dc1Violation };

const char* diag_name(DiagKind k);

struct Diagnostic {
  DiagKind kind;
  std::string message;
  int line = 0;
};

std::vector<Diagnostic> validate_syntax(const Program& p);

}  // namespace dcplp
