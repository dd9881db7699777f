#include "dcplp/infer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

#include "dcplp/error.hpp"

namespace dcplp {

Label indicator_label(bool truth) { return truth ? Label{kOne, kZero} : Label{kZero, kOne}; }

Label density_label(double pdf) { return Label{InfNum{pdf, 1}, kOne}; }

Label marginal_label(double p) { return Label{InfNum{p, 0}, InfNum{1.0 - p, 0}}; }

Label label_sialw(const CmpExpr& c, int var, const DistInstance& d) {
  std::vector<double> values(static_cast<std::size_t>(var) + 1, kUnset);
  double p = 0.0;
  for (const auto& [v, w] : finite_outcomes(d)) {
    values[var] = v;
    if (c.eval(values)) p += w;
  }
  return marginal_label(p);
}

namespace {

// Joint outcomes beyond this many demote a comparison to sampling.
constexpr std::size_t kJointCap = 4096;

template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  }
}

}  // namespace

Model build_model(const CoreProgram& core, const DependencyGraph& graph, const QueryTask& evidence, bool symbolic) {
  Model m;
  m.core = core;
  m.graph = graph;
  m.prob = compile_model(m.core, m.graph);
  m.phi = assert_evidence(clark_completion(m.core), evidence);
  m.evidence = m.phi.asserted;
  m.forced = forced_assignments(m.phi, m.core);
  VarTable& tab = *m.phi.table;
  const std::size_t nrv = m.core.vars.size();

  const std::size_t n0 = tab.size();
  m.cmps.resize(n0);
  m.is_cmp.assign(n0, 0);
  m.delta_rv.assign(n0, -1);
  std::vector<int> roots;
  for (std::size_t v = 0; v < n0; ++v) {
    if (tab.vars[v].kind != VarKind::Comparison) continue;
    m.is_cmp[v] = 1;
    m.cmps[v] = compile_cmp(tab.vars[v].atom, m.core);
    for (int r : m.cmps[v].vars()) roots.push_back(r);
    if (m.cmps[v].op == CmpOp::DeltaInterval) {
      const Term& lhs = tab.vars[v].atom.args[0];
      int rv = lhs.is_const() ? m.core.find_var(lhs.name) : -1;
      if (rv >= 0 && m.forced.count(rv)) m.delta_rv[v] = rv;
    }
  }
  std::vector<int> needed = ancestral_closure(m.prob, roots);

  // Symbolic plan.
  std::vector<char> in_needed(nrv, 0), has_child(nrv, 0), cand(nrv, 0);
  for (int v : needed) in_needed[v] = 1;
  for (int v : needed)
    for (int par : m.prob.parents[v]) has_child[par] = 1;
  std::vector<std::vector<std::pair<double, double>>> outs(nrv);
  if (symbolic) {
    for (int v : needed) {
      const DistSpec& d = m.prob.dists[v];
      if (has_child[v] || m.forced.count(v) || !has_finite_support(d.kind)) continue;
      if (!std::all_of(d.params.begin(), d.params.end(), [](const Expr& e) { return e.constant(); })) continue;
      outs[v] = finite_outcomes(instantiate(d, {}, m.prob.names[v]));
      cand[v] = 1;
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t c = 0; c < n0; ++c) {
        if (!m.is_cmp[c]) continue;
        auto vs = m.cmps[c].vars();
        bool any = false, all = true;
        std::size_t joint = 1;
        for (int r : vs) {
          any = any || cand[r];
          all = all && cand[r];
          if (cand[r]) joint = std::min(joint * outs[r].size(), kJointCap + 1);
        }
        if (any && (!all || joint > kJointCap)) {
          for (int r : vs) cand[r] = 0;
          changed = true;
        }
      }
    }
  }

  std::vector<int> sym_cmps;
  for (std::size_t c = 0; c < n0; ++c) {
    if (!m.is_cmp[c]) continue;
    auto vs = m.cmps[c].vars();
    if (vs.empty() || !std::all_of(vs.begin(), vs.end(), [&](int r) { return cand[r] != 0; })) continue;
    sym_cmps.push_back(static_cast<int>(c));
    tab.vars[c].symbolic = true;
    for (int r : vs)
      if (std::find(m.symbolic_rvs.begin(), m.symbolic_rvs.end(), r) == m.symbolic_rvs.end())
        m.symbolic_rvs.push_back(r);
  }

  // Chain bits: X = o_j iff the first j-1 bits are off and bit j is on; the last outcome has every bit off.
  std::map<int, std::vector<int>> bits;
  for (int r : m.symbolic_rvs) {
    const auto& o = outs[r];
    double rem = 1.0;
    for (std::size_t j = 0; j + 1 < o.size(); ++j) {
      PropVar b;
      b.kind = VarKind::ChainBit;
      b.key = "bit(" + m.core.vars[r].name + "," + std::to_string(j + 1) + ")";
      b.atom = make_compound("bit", {make_const(m.core.vars[r].name), make_int(static_cast<std::int64_t>(j + 1))});
      b.chain_rv = r;
      b.chain_q = rem > 0.0 ? std::clamp(o[j].second / rem, 0.0, 1.0) : 0.0;
      rem -= o[j].second;
      bits[r].push_back(tab.add(std::move(b)));
    }
  }
  auto pattern = [&](int r, std::size_t j, std::vector<Formula>& lits) {
    const auto& bs = bits[r];
    for (std::size_t i = 0; i < std::min(j, bs.size()); ++i) lits.push_back(f_lit(bs[i], false));
    if (j < bs.size()) lits.push_back(f_lit(bs[j], true));
  };
  for (int c : sym_cmps) {
    auto vs = m.cmps[c].vars();
    std::vector<double> values(nrv, kUnset);
    std::vector<std::size_t> idx(vs.size(), 0);
    std::vector<Formula> accepted;
    while (true) {
      for (std::size_t k = 0; k < vs.size(); ++k) values[vs[k]] = outs[vs[k]][idx[k]].first;
      if (m.cmps[c].eval(values)) {
        std::vector<Formula> lits;
        for (std::size_t k = 0; k < vs.size(); ++k) pattern(vs[k], idx[k], lits);
        accepted.push_back(f_and(std::move(lits)));
      }
      std::size_t k = 0;
      while (k < vs.size() && ++idx[k] == outs[vs[k]].size()) idx[k++] = 0;
      if (k == vs.size()) break;
    }
    m.phi = conjoin(m.phi, f_iff(f_var(c), f_or(std::move(accepted))));
  }

  const std::size_t n = tab.size();
  m.cmps.resize(n);
  m.is_cmp.resize(n, 0);
  m.delta_rv.resize(n, -1);

  // Order: comparisons grouped by their first variable, each group led by its chain bits; derived atoms last.
  std::vector<char> placed(n, 0);
  auto place = [&](int v) {
    if (!placed[v]) {
      placed[v] = 1;
      m.order.push_back(v);
    }
  };
  std::vector<int> group_keys;
  std::map<int, std::vector<int>> groups;
  for (std::size_t c = 0; c < n0; ++c) {
    if (!m.is_cmp[c]) continue;
    auto vs = m.cmps[c].vars();
    int key = vs.empty() ? -1 : vs[0];
    if (!groups.count(key)) group_keys.push_back(key);
    groups[key].push_back(static_cast<int>(c));
  }
  for (int key : group_keys) {
    for (int c : groups[key])
      if (tab.vars[c].symbolic)
        for (int r : m.cmps[c].vars())
          for (int b : bits[r]) place(b);
    for (int c : groups[key]) place(c);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (tab.vars[v].kind == VarKind::ChainBit) place(static_cast<int>(v));
  for (std::size_t v = 0; v < n; ++v)
    if (tab.vars[v].kind == VarKind::Derived) place(static_cast<int>(v));

  for (std::size_t v = 0; v < n; ++v)
    if (tab.vars[v].kind == VarKind::Derived || tab.vars[v].symbolic) m.scope.push_back(static_cast<int>(v));

  for (int v : needed)
    if (std::find(m.symbolic_rvs.begin(), m.symbolic_rvs.end(), v) == m.symbolic_rvs.end()) m.sampled.push_back(v);
  for (int v : m.sampled)
    if (!m.forced.count(v) && m.prob.dists[v].kind != DistKind::Delta) ++m.stochastic;
  m.exact = m.stochastic == 0;

  m.base_labels.assign(n, Label{});
  for (std::size_t v = 0; v < n; ++v) {
    const PropVar& pv = tab.vars[v];
    if (pv.kind == VarKind::ChainBit) {
      m.base_labels[v] = marginal_label(pv.chain_q);
    } else if (pv.kind == VarKind::Comparison && !pv.symbolic) {
      if (m.cmps[v].vars().empty()) m.base_labels[v] = indicator_label(m.cmps[v].eval({}));
      else m.sampled_cmps.push_back(static_cast<int>(v));
    }
  }
  return m;
}

std::vector<Label> label_ialw(const Model& m, const std::vector<double>& values) {
  std::vector<Label> labels = m.base_labels;
  for (int c : m.sampled_cmps) {
    int rv = m.delta_rv[c];
    if (rv >= 0) {
      DistInstance d = instantiate(m.prob.dists[rv], values, m.prob.names[rv]);
      labels[c] = density_label(density(d, m.cmps[c].rhs.eval(values)));
    } else {
      labels[c] = indicator_label(m.cmps[c].eval(values));
    }
  }
  return labels;
}

std::vector<InfNum> eval_nodes(const Circuit& c, const std::vector<Label>& labels) {
  std::vector<InfNum> val(c.nodes.size());
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const CNode& n = c.nodes[i];
    switch (n.type) {
      case CNode::Type::Lit: val[i] = n.positive ? labels[n.var].pos : labels[n.var].neg; break;
      case CNode::Type::True: val[i] = kOne; break;
      case CNode::Type::False: val[i] = kZero; break;
      case CNode::Type::And: {
        InfNum acc = kOne;
        for (int k : n.kids) acc = inf_mul(acc, val[k]);
        val[i] = acc;
        break;
      }
      case CNode::Type::Or: {
        InfNum acc = kZero;
        for (int k : n.kids) acc = inf_add(acc, val[k]);
        val[i] = acc;
        break;
      }
    }
  }
  return val;
}

InfNum eval_circuit(const Circuit& c, const std::vector<Label>& labels) {
  if (c.root < 0) return kZero;
  return eval_nodes(c, labels)[c.root];
}

Program lower_observations(const Program& p) {
  Program out = p;
  std::size_t k = 0;
  for (const auto& [t, w] : p.task.observations) {
    if (!is_ground(t)) throw Error(Errc::MalformedObservation, "observed term is not ground: " + to_string(t));
    Statement st;
    st.kind = StmtKind::NormalClause;
    st.head = make_const("$obs_" + std::to_string(++k));
    st.body.push_back(Literal{make_compound("delta_interval", {t, make_num(w)}), false});
    out.task.evidence.emplace_back(st.head, true);
    out.statements.push_back(std::move(st));
  }
  return out;
}

Prepared prepare_ground(const Program& lowered, GroundProgram gp, const InferConfig& cfg) {
  Prepared out;
  out.program = lowered;
  out.ground = std::move(gp);
  out.desugared = in_stage("desugar", [&] { return desugar(out.ground, cfg.transform); });
  QueryTask ev = out.program.task;
  ev.queries.clear();
  ev.observations.clear();
  out.model = in_stage("formula", [&] { return build_model(out.desugared.core, out.desugared.graph, ev, cfg.symbolic); });
  out.queries = out.ground.query_atoms;
  return out;
}

Prepared prepare(const Program& p, const InferConfig& cfg) {
  Program lowered = lower_observations(p);
  GroundProgram gp = in_stage("ground", [&] { return relevant_ground_program(lowered, lowered.task, cfg.ground); });
  return prepare_ground(lowered, std::move(gp), cfg);
}

Compiled compile_prepared(const Prepared& p, const CompileConfig& cfg) {
  return in_stage("compile", [&] {
    const Model& m = p.model;
    Compiler comp(*m.phi.table, m.order, cfg);
    Compiled out;
    out.evidence = smooth(comp.compile(m.phi), m.scope);
    for (const auto& q : p.queries)
      out.queries.push_back(smooth(comp.compile(conjoin(m.phi, atom_literal(m.phi, q))), m.scope));
    out.bdd_nodes = comp.bdd_size();
    return out;
  });
}

namespace {

// Delta-method half-width of the ratio of per-sample real parts at the accumulated orders.
double ratio_halfwidth(const std::vector<InfNum>& den, int den_order, const std::vector<InfNum>& num,
                       std::size_t stride, std::size_t q, int num_order) {
  const std::size_t n = den.size();
  if (n < 2) return 0.0;
  std::vector<double> x(n), y(n);
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = den[i].order == den_order ? den[i].real : 0.0;
    const InfNum& v = num[i * stride + q];
    y[i] = v.order == num_order ? v.real : 0.0;
    sx += x[i];
    sy += y[i];
  }
  double mx = sx / static_cast<double>(n);
  if (mx == 0.0) return 0.0;
  double r = sy / sx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (y[i] - r * x[i]) * (y[i] - r * x[i]);
  double var = ss / static_cast<double>(n - 1);
  return 1.96 * std::sqrt(var / static_cast<double>(n)) / mx;
}

}  // namespace

std::vector<InferenceResult> estimate(const Prepared& p, const Compiled& c, const InferConfig& cfg) {
  return in_stage("infer", [&] {
    const Model& m = p.model;
    const std::size_t nq = p.queries.size();
    const std::size_t n = m.exact ? 1 : cfg.samples;
    if (n == 0) throw Error(Errc::Usage, "number of samples must be positive");
    Sampler sampler(m.prob, m.sampled, m.forced, cfg.seed);
    std::vector<InfNum> den(n), num(n * nq);
    std::vector<std::vector<double>> trace;
    const bool tracing = !cfg.trace_path.empty();
    if (tracing) trace.resize(n);

    auto work = [&](std::size_t begin, std::size_t end) {
      std::vector<double> values(m.core.vars.size(), kUnset);
      for (std::size_t i = begin; i < end; ++i) {
        sampler.draw(i, values);
        std::vector<Label> labels = label_ialw(m, values);
        den[i] = eval_circuit(c.evidence, labels);
        for (std::size_t q = 0; q < nq; ++q) num[i * nq + q] = eval_circuit(c.queries[q], labels);
        if (tracing) trace[i] = values;
      }
    };
    unsigned jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    if (jobs <= 1) {
      work(0, n);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(jobs);
      std::size_t chunk = (n + jobs - 1) / jobs;
      for (unsigned j = 0; j < jobs; ++j) {
        std::size_t b = j * chunk, e = std::min(n, b + chunk);
        pool.emplace_back([&, j, b, e] {
          try {
            work(b, e);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }

    InfNum dsum = kZero;
    for (const auto& d : den) dsum = inf_add(dsum, d);
    if (dsum.real == 0.0) throw Error(Errc::ZeroProbabilityEvidence, "the evidence has probability zero");

    if (tracing) {
      std::ofstream os(cfg.trace_path);
      os << "sample";
      for (int v : m.sampled) os << "," << m.prob.names[v];
      os << ",evidence_real,evidence_order";
      for (const auto& q : p.queries) os << ",\"" << to_string(q) << "\"_real,\"" << to_string(q) << "\"_order";
      os << "\n";
      for (std::size_t i = 0; i < n; ++i) {
        os << i;
        for (int v : m.sampled) os << "," << format_number(trace[i][v]);
        os << "," << format_number(den[i].real) << "," << den[i].order;
        for (std::size_t q = 0; q < nq; ++q)
          os << "," << format_number(num[i * nq + q].real) << "," << num[i * nq + q].order;
        os << "\n";
      }
    }

    std::vector<InferenceResult> out;
    for (std::size_t q = 0; q < nq; ++q) {
      InfNum nsum = kZero;
      for (std::size_t i = 0; i < n; ++i) nsum = inf_add(nsum, num[i * nq + q]);
      InferenceResult r;
      r.query = p.queries[q];
      r.exact = m.exact;
      r.numerator = nsum;
      r.denominator = dsum;
      r.stochastic_leaves = m.stochastic;
      r.samples = n;
      r.seed = cfg.seed;
      if (nsum.real == 0.0) {
        r.ratio = kZero;
        r.probability = 0.0;
      } else {
        r.ratio = inf_div(nsum, dsum);
        if (r.ratio.order < 0)
          throw Error(Errc::NonzeroResidualOrder,
                      "query " + to_string(r.query) + " has a result of negative infinitesimal order");
        r.probability = r.ratio.order > 0 ? 0.0 : r.ratio.real;
        if (!m.exact && r.ratio.order == 0) r.ci_halfwidth = ratio_halfwidth(den, dsum.order, num, nq, q, nsum.order);
      }
      out.push_back(std::move(r));
    }
    return out;
  });
}

std::vector<InferenceResult> answer_task(const Program& p, const InferConfig& cfg) {
  Prepared prep = prepare(p, cfg);
  Compiled comp = compile_prepared(prep, cfg.compile);
  return estimate(prep, comp, cfg);
}

}  // namespace dcplp
