#include <algorithm>
#include <functional>
#include <set>

#include "dcplp/error.hpp"
#include "dcplp/infer.hpp"

namespace dcplp {

WorldEvaluator::WorldEvaluator(const Model& m) : m_(&m) {}

std::vector<bool> WorldEvaluator::eval(const std::vector<double>& values) const {
  const VarTable& tab = *m_->phi.table;
  std::vector<bool> world(tab.size(), false);
  for (std::size_t v = 0; v < tab.size(); ++v)
    if (m_->is_cmp[v]) world[v] = m_->cmps[v].eval(values);
  for (const auto& [v, def] : m_->phi.definitions) world[v] = evaluate(def, world);
  return world;
}

bool WorldEvaluator::evidence(const std::vector<bool>& world) const {
  return std::all_of(m_->evidence.begin(), m_->evidence.end(), [&](const Formula& f) { return evaluate(f, world); });
}

bool WorldEvaluator::holds(const Term& atom, const std::vector<bool>& world) const {
  return evaluate(atom_literal(m_->phi, atom), world);
}

namespace {

constexpr std::size_t kWorldCap = 10000000;

InferConfig sampled_config(const InferConfig& cfg) {
  InferConfig c = cfg;
  c.symbolic = false;
  return c;
}

}  // namespace

std::vector<OracleResult> enumerate_oracle(const Program& p, const InferConfig& cfg) {
  return enumerate_prepared(prepare(p, sampled_config(cfg)));
}

std::vector<OracleResult> enumerate_prepared(const Prepared& prep) {
  const Model& m = prep.model;
  if (!m.symbolic_rvs.empty()) throw Error(Errc::Usage, "enumeration needs a model prepared without symbolic variables");
  WorldEvaluator ev(m);
  for (int v : m.sampled) {
    if (!has_finite_support(m.prob.dists[v].kind))
      throw Error(Errc::NotFinitelyEnumerable,
                  m.prob.names[v] + " ~ " + to_string(m.core.vars[v].dist) + " does not have finite support");
  }
  const std::size_t nq = prep.queries.size();
  double pe = 0.0;
  std::vector<double> pq(nq, 0.0);
  std::vector<double> values(m.core.vars.size(), kUnset);
  std::size_t worlds = 0;

  std::function<void(std::size_t, double)> rec = [&](std::size_t k, double w) {
    if (k == m.sampled.size()) {
      if (++worlds > kWorldCap) throw Error(Errc::NotFinitelyEnumerable, "too many worlds to enumerate");
      std::vector<bool> world = ev.eval(values);
      if (!ev.evidence(world)) return;
      pe += w;
      for (std::size_t q = 0; q < nq; ++q)
        if (ev.holds(prep.queries[q], world)) pq[q] += w;
      return;
    }
    int v = m.sampled[k];
    DistInstance d = instantiate(m.prob.dists[v], values, m.prob.names[v]);
    for (const auto& [x, px] : finite_outcomes(d)) {
      if (px <= 0.0) continue;
      values[v] = x;
      rec(k + 1, w * px);
    }
    values[v] = kUnset;
  };
  rec(0, 1.0);
  if (pe == 0.0) throw Error(Errc::ZeroProbabilityEvidence, "the evidence has probability zero");
  std::vector<OracleResult> out;
  for (std::size_t q = 0; q < nq; ++q) out.push_back({prep.queries[q], pq[q] / pe, 0});
  return out;
}

std::vector<OracleResult> rejection_oracle(const Program& p, const InferConfig& cfg) {
  Prepared prep = prepare(p, sampled_config(cfg));
  const Model& m = prep.model;
  WorldEvaluator ev(m);
  Sampler sampler(m.prob, m.sampled, {}, cfg.seed);
  const std::size_t nq = prep.queries.size();
  std::vector<double> values(m.core.vars.size(), kUnset);
  double accepted = 0.0;
  std::vector<double> hits(nq, 0.0);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    sampler.draw(i, values);
    std::vector<bool> world = ev.eval(values);
    if (!ev.evidence(world)) continue;
    accepted += 1.0;
    for (std::size_t q = 0; q < nq; ++q)
      if (ev.holds(prep.queries[q], world)) hits[q] += 1.0;
  }
  if (accepted == 0.0) throw Error(Errc::NoAcceptedSamples, "no sample satisfied the evidence");
  std::vector<OracleResult> out;
  for (std::size_t q = 0; q < nq; ++q)
    out.push_back({prep.queries[q], hits[q] / accepted, static_cast<std::size_t>(accepted)});
  return out;
}

std::vector<Diagnostic> check_dc1(const CoreProgram& core, const DependencyGraph& g, std::size_t worlds,
                                  std::uint64_t seed) {
  ProbModel pm = compile_model(core, g);
  PropFormula f = clark_completion(core);
  const VarTable& tab = *f.table;
  std::vector<CmpExpr> cmps(tab.size());
  std::vector<char> is_cmp(tab.size(), 0);
  for (std::size_t v = 0; v < tab.size(); ++v) {
    if (tab.vars[v].kind != VarKind::Comparison) continue;
    cmps[v] = compile_cmp(tab.vars[v].atom, core);
    is_cmp[v] = 1;
  }

  struct Lit {
    bool negated;
    int atom = -1;  // derived variable, or -1 with a comparison
    CmpExpr cmp;
    bool is_cmp = false;
  };
  using Body = std::vector<Lit>;
  std::vector<std::pair<std::string, std::vector<std::vector<Body>>>> terms;
  for (const auto& [term, names] : core.vars_per_term) {
    if (names.size() < 2) continue;
    std::vector<std::vector<Body>> per_var;
    for (const auto& name : names) {
      std::vector<Body> bodies;
      auto it = core.contexts.find(name);
      if (it == core.contexts.end()) {
        bodies.push_back({});
      } else {
        for (const auto& lits : it->second) {
          Body b;
          for (const auto& l : lits) {
            Lit x;
            x.negated = l.negated;
            if (is_comparison(l.atom)) {
              x.is_cmp = true;
              x.cmp = compile_cmp(l.atom, core);
            } else {
              x.atom = tab.find(to_string(l.atom));
            }
            b.push_back(std::move(x));
          }
          bodies.push_back(std::move(b));
        }
      }
      per_var.push_back(std::move(bodies));
    }
    terms.emplace_back(term, std::move(per_var));
  }

  std::vector<Diagnostic> out;
  if (terms.empty()) return out;
  std::set<std::string> reported;
  std::vector<double> values(pm.dists.size(), kUnset);
  for (std::size_t i = 0; i < worlds && reported.size() < terms.size(); ++i) {
    for (int v : pm.topo) {
      try {
        DistInstance d = instantiate(pm.dists[v], values, pm.names[v]);
        Rng rng(stream_seed(seed, i, static_cast<std::uint64_t>(v)));
        values[v] = draw(d, rng);
      } catch (const Error&) {
        values[v] = kUnset;
      }
    }
    std::vector<bool> world(tab.size(), false);
    for (std::size_t v = 0; v < tab.size(); ++v)
      if (is_cmp[v]) world[v] = cmps[v].eval(values);
    for (const auto& [v, def] : f.definitions) world[v] = evaluate(def, world);
    auto body_true = [&](const Body& b) {
      for (const auto& l : b) {
        bool t = l.is_cmp ? l.cmp.eval(values) : (l.atom >= 0 && world[l.atom]);
        if (t == l.negated) return false;
      }
      return true;
    };
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const auto& [term, per_var] = terms[t];
      if (reported.count(term)) continue;
      std::vector<std::string> active;
      const auto& names = core.vars_per_term.at(term);
      for (std::size_t k = 0; k < per_var.size(); ++k)
        if (std::any_of(per_var[k].begin(), per_var[k].end(), body_true)) active.push_back(names[k]);
      if (active.size() > 1) {
        reported.insert(term);
        std::string list;
        for (std::size_t k = 0; k < active.size(); ++k) list += (k ? ", " : "") + active[k];
        out.push_back({DiagKind::Dc1Violation,
                       "random term " + term + " is defined by several distributions at once (" + list +
                           ") in sampled world " + std::to_string(i),
                       0});
      }
    }
  }
  return out;
}

}  // namespace dcplp
