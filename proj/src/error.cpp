#include "dcplp/error.hpp"

namespace dcplp {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Syntax: return "SyntaxError";
    case Errc::ReservedHead: return "ReservedHeadError";
    case Errc::InvalidProbability: return "InvalidProbability";
    case Errc::CyclicRandomTermDependency: return "CyclicRandomTermDependency";
    case Errc::UnboundedExpansion: return "UnboundedExpansion";
    case Errc::RvCycle: return "RvCycle";
    case Errc::CyclicRandomVariableDependency: return "CyclicRandomVariableDependency";
    case Errc::NonTerminatingGrounding: return "NonTerminatingGrounding";
    case Errc::UnknownPredicate: return "UnknownPredicate";
    case Errc::UnknownRandomTerm: return "UnknownRandomTerm";
    case Errc::NonGroundTerm: return "NonGroundTerm";
    case Errc::CyclicRuleDependency: return "CyclicRuleDependency";
    case Errc::UnknownEvidenceAtom: return "UnknownEvidenceAtom";
    case Errc::CompilationBudgetExceeded: return "CompilationBudgetExceeded";
    case Errc::DivisionByZeroInfNum: return "DivisionByZeroInfNum";
    case Errc::OrderOverflow: return "OrderOverflow";
    case Errc::UnassignedVariable: return "UnassignedVariable";
    case Errc::ImpossibleObservation: return "ImpossibleObservation";
    case Errc::MalformedObservation: return "MalformedObservation";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::ZeroProbabilityEvidence: return "ZeroProbabilityEvidence";
    case Errc::NonzeroResidualOrder: return "NonzeroResidualOrder";
    case Errc::NotFinitelyEnumerable: return "NotFinitelyEnumerable";
    case Errc::NoAcceptedSamples: return "NoAcceptedSamples";
    case Errc::Usage: return "UsageError";
  }
  return "Error";
}

bool is_budget(Errc c) {
  return c == Errc::UnboundedExpansion || c == Errc::NonTerminatingGrounding ||
         c == Errc::CompilationBudgetExceeded;
}

Error::Error(Errc code, const std::string& msg, int line, int col)
    : std::runtime_error(msg), code_(code), line_(line), col_(col) {}

}  // namespace dcplp
