#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "dcplp/ast.hpp"

namespace dcplp {

struct GroundConfig {
  std::size_t memo_cap = 1000000;
  std::size_t max_term_depth = 512;
};

struct GroundProgram {
  std::vector<Statement> statements;
  // ground atom -> indices of statements defining it (clauses, facts, PF/AD heads)
  std::map<std::string, std::vector<std::size_t>> atom_index;
  // ground random term -> indices of distributional statements defining it
  std::map<std::string, std::vector<std::size_t>> rv_index;
  // queries with logic variables expanded to their ground instances
  std::vector<Term> query_atoms;
  QueryTask task;
};

GroundProgram relevant_ground_program(const Program& p, const QueryTask& task,
                                      const GroundConfig& cfg = {});

// Grounds every predicate defined in the program; used when no task is given.
GroundProgram full_ground_program(const Program& p, const GroundConfig& cfg = {});

}  // namespace dcplp
