#pragma once

#include <stdexcept>
#include <string>

namespace dcplp {

enum class Errc {
  Syntax,
  ReservedHead,
  InvalidProbability,
  CyclicRandomTermDependency,
  UnboundedExpansion,
  RvCycle,
  CyclicRandomVariableDependency,
  NonTerminatingGrounding,
  UnknownPredicate,
  UnknownRandomTerm,
  NonGroundTerm,
  CyclicRuleDependency,
  UnknownEvidenceAtom,
  CompilationBudgetExceeded,
  DivisionByZeroInfNum,
  OrderOverflow,
  UnassignedVariable,
  ImpossibleObservation,
  MalformedObservation,
  InvalidParameter,
  ZeroProbabilityEvidence,
  NonzeroResidualOrder,
  NotFinitelyEnumerable,
  NoAcceptedSamples,
  Usage,
};

const char* errc_name(Errc c);

// Budget errors map to exit code 2 in the CLI.
bool is_budget(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg, int line = 0, int col = 0);

  Errc code() const { return code_; }
  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& stage() const { return stage_; }
  void set_stage(std::string s) { stage_ = std::move(s); }

 private:
  Errc code_;
  int line_;
  int col_;
  std::string stage_;
};

}  // namespace dcplp
