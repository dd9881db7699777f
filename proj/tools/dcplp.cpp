#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcplp/ast.hpp"
#include "dcplp/circuit.hpp"
#include "dcplp/error.hpp"
#include "dcplp/formula.hpp"
#include "dcplp/ground.hpp"
#include "dcplp/infer.hpp"
#include "dcplp/transform.hpp"
#include "json.hpp"

using nlohmann::ordered_json;

namespace {

struct Options {
  std::string file;
  std::vector<std::string> queries;
  std::vector<std::string> evidence;
  std::vector<std::string> observations;
  std::size_t samples = 10000;
  std::uint64_t seed = 42;
  bool no_symbolic = false;
  unsigned jobs = 0;
  std::string trace;
  std::string format = "json";
  std::string dot;
  std::string method = "enumerate";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dcplp::Error(dcplp::Errc::Usage, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

dcplp::Program load(const Options& o) {
  dcplp::Program p;
  try {
    p = dcplp::parse_program(read_file(o.file));
  } catch (dcplp::Error& e) {
    if (e.stage().empty()) e.set_stage("parse");
    throw;
  }
  for (const auto& q : o.queries) p.task.queries.push_back(dcplp::parse_term(q));
  for (const auto& e : o.evidence) p.task.evidence.push_back(dcplp::parse_evidence_flag(e));
  for (const auto& v : o.observations) p.task.observations.push_back(dcplp::parse_observation_flag(v));
  return p;
}

dcplp::InferConfig config(const Options& o) {
  dcplp::InferConfig cfg;
  cfg.samples = o.samples;
  cfg.seed = o.seed;
  cfg.symbolic = !o.no_symbolic;
  cfg.jobs = o.jobs;
  cfg.trace_path = o.trace;
  if (const char* cap = std::getenv("DCPLP_NODE_CAP")) {
    try {
      cfg.compile.node_cap = std::stoull(cap);
    } catch (const std::exception&) {
      throw dcplp::Error(dcplp::Errc::Usage, "DCPLP_NODE_CAP must be a positive integer");
    }
    if (cfg.compile.node_cap == 0) throw dcplp::Error(dcplp::Errc::Usage, "DCPLP_NODE_CAP must be a positive integer");
  }
  if (o.samples == 0) throw dcplp::Error(dcplp::Errc::Usage, "--samples must be at least 1");
  return cfg;
}

dcplp::GroundProgram ground_for(const dcplp::Program& p, const dcplp::InferConfig& cfg) {
  try {
    dcplp::Program lowered = dcplp::lower_observations(p);
    if (lowered.task.empty()) return dcplp::full_ground_program(lowered, cfg.ground);
    return dcplp::relevant_ground_program(lowered, lowered.task, cfg.ground);
  } catch (dcplp::Error& e) {
    if (e.stage().empty()) e.set_stage("ground");
    throw;
  }
}

dcplp::Desugared desugar_for(const dcplp::GroundProgram& gp, const dcplp::InferConfig& cfg) {
  try {
    return dcplp::desugar(gp, cfg.transform);
  } catch (dcplp::Error& e) {
    if (e.stage().empty()) e.set_stage("desugar");
    throw;
  }
}

void print_diagnostics(const std::vector<dcplp::Diagnostic>& ds, const std::string& file, std::ostream& os) {
  for (const auto& d : ds) {
    os << file;
    if (d.line > 0) os << ":" << d.line;
    os << ": " << dcplp::diag_name(d.kind) << ": " << d.message << "\n";
  }
}

int cmd_infer(const Options& o) {
  dcplp::Program p = load(o);
  if (p.task.queries.empty()) throw dcplp::Error(dcplp::Errc::Usage, "no query given (use --query or query/1)");
  auto results = dcplp::answer_task(p, config(o));
  if (o.format == "text") {
    for (const auto& r : results) {
      std::cout << "P(" << dcplp::to_string(r.query) << ") = " << dcplp::format_number(r.probability);
      if (r.exact) std::cout << " (exact)";
      else std::cout << " +/- " << dcplp::format_number(r.ci_halfwidth) << " (" << r.samples << " samples)";
      std::cout << "\n";
    }
    return 0;
  }
  ordered_json out = ordered_json::array();
  for (const auto& r : results) {
    ordered_json j;
    j["query"] = dcplp::to_string(r.query);
    j["probability"] = r.probability;
    j["exact"] = r.exact;
    j["order"] = r.ratio.order;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    if (!r.exact) j["ci_halfwidth"] = r.ci_halfwidth;
    j["numerator"] = {r.numerator.real, r.numerator.order};
    j["denominator"] = {r.denominator.real, r.denominator.order};
    j["stochastic_leaves"] = r.stochastic_leaves;
    out.push_back(std::move(j));
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_ground(const Options& o) {
  dcplp::Program p = load(o);
  dcplp::GroundProgram gp = ground_for(p, config(o));
  for (const auto& st : gp.statements) std::cout << dcplp::to_string(st) << "\n";
  return 0;
}

int cmd_desugar(const Options& o) {
  dcplp::Program p = load(o);
  auto cfg = config(o);
  dcplp::Desugared d = desugar_for(ground_for(p, cfg), cfg);
  std::cout << dcplp::to_string(d.core);
  print_diagnostics(d.diagnostics, o.file, std::cerr);
  return 0;
}

int cmd_formula(const Options& o) {
  dcplp::Program p = load(o);
  auto cfg = config(o);
  dcplp::Prepared prep = dcplp::prepare(p, cfg);
  std::cout << dcplp::to_text(prep.model.phi);
  return 0;
}

int cmd_compile(const Options& o) {
  dcplp::Program p = load(o);
  auto cfg = config(o);
  dcplp::Prepared prep = dcplp::prepare(p, cfg);
  dcplp::Compiled c = dcplp::compile_prepared(prep, cfg.compile);
  const dcplp::VarTable& tab = *prep.model.phi.table;
  auto report = [&](const std::string& name, const dcplp::Circuit& circ) {
    std::cout << name << ": nodes=" << circ.nodes.size() << " edges=" << circ.edge_count()
              << " decomposable=" << (dcplp::is_decomposable(circ) ? "yes" : "no")
              << " deterministic=" << (dcplp::is_deterministic(circ) ? "yes" : "no")
              << " smooth=" << (dcplp::is_smooth(circ, prep.model.scope) ? "yes" : "no") << "\n";
  };
  report("evidence", c.evidence);
  for (std::size_t q = 0; q < c.queries.size(); ++q) report(dcplp::to_string(prep.queries[q]), c.queries[q]);
  std::cout << "bdd_nodes=" << c.bdd_nodes << "\n";
  if (!o.dot.empty()) {
    const dcplp::Circuit& circ = c.queries.empty() ? c.evidence : c.queries.front();
    std::ofstream os(o.dot);
    if (!os) throw dcplp::Error(dcplp::Errc::Usage, "cannot write " + o.dot);
    os << dcplp::to_dot(circ, [&](int v) { return dcplp::var_label(tab.vars[v]); });
    std::cout << "wrote " << o.dot << "\n";
  }
  return 0;
}

int cmd_validate(const Options& o) {
  dcplp::Program p = load(o);
  auto cfg = config(o);
  std::vector<dcplp::Diagnostic> ds = dcplp::validate_syntax(p);
  if (ds.empty()) {
    dcplp::Desugared d = desugar_for(ground_for(p, cfg), cfg);
    ds = d.diagnostics;
    auto dc1 = dcplp::check_dc1(d.core, d.graph, 10000, o.seed);
    ds.insert(ds.end(), dc1.begin(), dc1.end());
  }
  print_diagnostics(ds, o.file, std::cout);
  std::size_t errors = 0;
  for (const auto& d : ds)
    if (d.kind != dcplp::DiagKind::DomainWarning) ++errors;
  std::cout << (errors ? "failed" : "ok") << " with " << ds.size() << " diagnostic" << (ds.size() == 1 ? "" : "s")
            << "\n";
  return errors ? 1 : 0;
}

int cmd_oracle(const Options& o) {
  dcplp::Program p = load(o);
  if (p.task.queries.empty()) throw dcplp::Error(dcplp::Errc::Usage, "no query given (use --query or query/1)");
  auto cfg = config(o);
  std::vector<dcplp::OracleResult> rs;
  if (o.method == "enumerate") rs = dcplp::enumerate_oracle(p, cfg);
  else rs = dcplp::rejection_oracle(p, cfg);
  ordered_json out = ordered_json::array();
  for (const auto& r : rs) {
    ordered_json j;
    j["query"] = dcplp::to_string(r.query);
    j["probability"] = r.probability;
    j["method"] = o.method;
    if (o.method == "rejection") {
      j["accepted"] = r.accepted;
      double n = static_cast<double>(r.accepted);
      j["ci_halfwidth"] = 1.96 * std::sqrt(r.probability * (1.0 - r.probability) / n);
      j["samples"] = o.samples;
      j["seed"] = o.seed;
    }
    out.push_back(std::move(j));
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

void add_task_flags(CLI::App* sub, Options& o) {
  sub->add_option("file", o.file, "program file")->required();
  sub->add_option("-q,--query", o.queries, "query atom (repeatable)");
  sub->add_option("-e,--evidence", o.evidence, "evidence atom=true|false (repeatable)");
  sub->add_option("-o,--observe", o.observations, "observation term=value (repeatable)");
  sub->add_flag("--no-symbolic", o.no_symbolic, "sample discrete variables instead of summing them out");
}

void add_sampling_flags(CLI::App* sub, Options& o) {
  sub->add_option("-n,--samples", o.samples, "number of samples")->check(CLI::PositiveNumber);
  sub->add_option("-s,--seed", o.seed, "random seed");
  sub->add_option("-j,--jobs", o.jobs, "worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dcplp: inference for hybrid probabilistic logic programs"};
  app.require_subcommand(1);
  Options o;

  auto* infer = app.add_subcommand("infer", "answer the queries of a program");
  add_task_flags(infer, o);
  add_sampling_flags(infer, o);
  infer->add_option("--trace-samples", o.trace, "write one CSV row per sample");
  infer->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "text"}));

  auto* desugar = app.add_subcommand("desugar", "print the desugared core program");
  add_task_flags(desugar, o);
  auto* ground = app.add_subcommand("ground", "print the relevant ground program");
  add_task_flags(ground, o);
  auto* formula = app.add_subcommand("formula", "print the propositional formula");
  add_task_flags(formula, o);
  auto* compile = app.add_subcommand("compile", "compile to circuits and check their structure");
  add_task_flags(compile, o);
  compile->add_option("--dot", o.dot, "write the query circuit in DOT format");
  auto* validate = app.add_subcommand("validate", "report diagnostics");
  add_task_flags(validate, o);
  validate->add_option("-s,--seed", o.seed, "seed of the sampled worlds checked for overlapping distributions");
  auto* oracle = app.add_subcommand("oracle", "reference answers by enumeration or rejection sampling");
  add_task_flags(oracle, o);
  add_sampling_flags(oracle, o);
  oracle->add_option("--method", o.method, "enumerate or rejection")
      ->check(CLI::IsMember({"enumerate", "rejection"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*infer) return cmd_infer(o);
    if (*desugar) return cmd_desugar(o);
    if (*ground) return cmd_ground(o);
    if (*formula) return cmd_formula(o);
    if (*compile) return cmd_compile(o);
    if (*validate) return cmd_validate(o);
    if (*oracle) return cmd_oracle(o);
  } catch (const dcplp::Error& e) {
    std::cerr << o.file;
    if (e.line() > 0) std::cerr << ":" << e.line() << ":" << e.col();
    std::cerr << ": error";
    if (!e.stage().empty()) std::cerr << " [" << e.stage() << "]";
    std::cerr << ": " << dcplp::errc_name(e.code()) << ": " << e.what() << "\n";
    return dcplp::is_budget(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << o.file << ": error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
