#include "dcplp/transform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <unordered_set>

#include "dcplp/error.hpp"

namespace dcplp {

std::optional<double> InternTable::lookup(const std::string& name) const {
  auto it = ids.find(name);
  if (it == ids.end()) return std::nullopt;
  return it->second;
}

std::string InternTable::name_of(double v) const {
  for (const auto& [n, id] : ids)
    if (id == v) return n;
  return format_number(v);
}

int CoreProgram::find_var(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

void CoreProgram::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < vars.size(); ++i) index_[vars[i].name] = static_cast<int>(i);
}

namespace {

// Value positions of sample-space lists: finite([p:v,...]) values and uniform([...]) items.
void sample_space_items(const Term& dist, std::vector<const Term*>& out) {
  auto k = dist_kind(dist);
  if (!k) return;
  if (*k == DistKind::Finite) {
    for (const auto& item : dist.args[0].args) {
      if (item.is_compound() && item.name == ":" && item.args.size() == 2) out.push_back(&item.args[1]);
      else out.push_back(&item);
    }
  } else if (*k == DistKind::UniformList) {
    for (const auto& item : dist.args[0].args) out.push_back(&item);
  }
}

void collect_symbols(const Term& t, std::set<std::string>& out) {
  if (t.is_const() || t.is_compound()) out.insert(t.name);
  for (const auto& a : t.args) collect_symbols(a, out);
}

std::string fresh_name(const std::string& prefix, std::size_t k, std::set<std::string>& symbols) {
  std::string name = prefix + std::to_string(k);
  while (symbols.count(name)) name += "_";
  symbols.insert(name);
  return name;
}

std::optional<double> const_eval(const Term& t) {
  if (t.is_num()) return t.value;
  if (!is_arith_functor(t)) return std::nullopt;
  std::vector<double> xs;
  for (const auto& a : t.args) {
    auto v = const_eval(a);
    if (!v) return std::nullopt;
    xs.push_back(*v);
  }
  const auto& n = t.name;
  if (xs.size() == 1) return n == "-" ? -xs[0] : std::fabs(xs[0]);
  if (n == "+") return xs[0] + xs[1];
  if (n == "-") return xs[0] - xs[1];
  if (n == "*") return xs[0] * xs[1];
  if (n == "/") return xs[0] / xs[1];
  if (n == "max") return std::max(xs[0], xs[1]);
  return std::min(xs[0], xs[1]);
}

Literal cmp_literal(Term lhs, const char* op, Term rhs) {
  return Literal{make_compound(op, {std::move(lhs), std::move(rhs)}), false};
}

// Random terms referenced by an arithmetic expression, in first-occurrence order.
void expr_random_terms(const Term& t, const std::function<bool(const Term&)>& is_random,
                       const InternTable& interns, std::vector<Term>& out, const char* what) {
  if (t.is_num()) return;
  if (t.is_var()) throw Error(Errc::NonGroundTerm, std::string("unbound variable in ") + what);
  if (is_arith_functor(t)) {
    for (const auto& a : t.args) expr_random_terms(a, is_random, interns, out, what);
    return;
  }
  if (is_random(t)) {
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    return;
  }
  if (t.is_const() && interns.lookup(t.name)) return;
  throw Error(Errc::UnknownRandomTerm, "unknown term " + to_string(t) + " in " + what);
}

Term replace_terms(const Term& t, const std::map<std::string, std::string>& repl) {
  if (t.is_num() || t.is_var()) return t;
  auto it = repl.find(to_string(t));
  if (it != repl.end()) return make_const(it->second);
  if (t.args.empty()) return t;
  Term out = t;
  for (auto& a : out.args) a = replace_terms(a, repl);
  return out;
}

// Parameters of a distribution that may reference random terms (list values excluded).
std::vector<const Term*> param_exprs(const Term& dist) {
  std::vector<const Term*> out;
  auto k = dist_kind(dist);
  if (!k) return out;
  if (*k == DistKind::Finite) {
    for (const auto& item : dist.args[0].args)
      if (item.is_compound() && item.name == ":" && item.args.size() == 2) out.push_back(&item.args[0]);
    return out;
  }
  if (*k == DistKind::UniformList) return out;
  for (const auto& a : dist.args) out.push_back(&a);
  return out;
}

Term replace_params(const Term& dist, const std::map<std::string, std::string>& repl) {
  auto k = dist_kind(dist);
  Term out = dist;
  if (k == DistKind::Finite) {
    for (auto& item : out.args[0].args)
      if (item.is_compound() && item.name == ":" && item.args.size() == 2)
        item.args[0] = replace_terms(item.args[0], repl);
    return out;
  }
  if (k == DistKind::UniformList) return out;
  for (auto& a : out.args) a = replace_terms(a, repl);
  return out;
}

bool is_rv_atom(const Term& t) { return t.is_compound() && t.name == "rv" && t.args.size() == 2; }

std::size_t checked_product(std::size_t acc, std::size_t n, std::size_t cap, const std::string& what) {
  if (n != 0 && acc > cap / n)
    throw Error(Errc::UnboundedExpansion, what + " expands to more than " + std::to_string(cap) + " combinations");
  return acc * n;
}

// Enumerate all combinations of the given choice lists.
void for_each_combo(const std::vector<const std::vector<std::string>*>& lists,
                    const std::function<void(const std::vector<std::string>&)>& f) {
  std::vector<std::string> cur(lists.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == lists.size()) {
      f(cur);
      return;
    }
    for (const auto& v : *lists[i]) {
      cur[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
}

bool prune_body(std::vector<Literal>& body) {
  std::vector<Literal> out;
  for (auto& l : body) {
    bool dup = false;
    for (const auto& o : out) {
      if (o.atom == l.atom) {
        if (o.negated != l.negated) return false;
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(l));
  }
  body = std::move(out);
  return true;
}

}  // namespace

InternTable build_intern_table(const std::vector<Statement>& statements) {
  InternTable tab;
  std::set<double> numbers;
  std::vector<std::string> names;
  for (const auto& st : statements) {
    if (st.kind != StmtKind::DistFact && st.kind != StmtKind::DistClause) continue;
    std::vector<const Term*> items;
    sample_space_items(st.dist, items);
    for (const Term* t : items) {
      if (t->is_num()) numbers.insert(t->value);
      else if ((t->is_const() || t->is_compound()) &&
               std::find(names.begin(), names.end(), to_string(*t)) == names.end())
        names.push_back(to_string(*t));
    }
  }
  double next = 1;
  for (const auto& n : names) {
    while (numbers.count(next)) ++next;
    tab.ids[n] = next;
    tab.order.push_back(n);
    ++next;
  }
  return tab;
}

AdFreeProgram eliminate_ads(const GroundProgram& gp) {
  AdFreeProgram out;
  for (const auto& st : gp.statements) {
    collect_symbols(st.head, out.symbols);
    collect_symbols(st.dist, out.symbols);
    for (const auto& c : st.choices) {
      collect_symbols(c.prob, out.symbols);
      collect_symbols(c.atom, out.symbols);
    }
    for (const auto& l : st.body) collect_symbols(l.atom, out.symbols);
  }
  std::size_t pf = 0;
  std::size_t ad = 0;
  for (const auto& st : gp.statements) {
    if (st.kind != StmtKind::ProbFact && st.kind != StmtKind::AnnotatedDisjunction) {
      out.statements.push_back(st);
      continue;
    }
    double total = 0.0;
    for (const auto& c : st.choices) {
      if (auto v = const_eval(c.prob)) {
        if (!(*v >= 0.0 && *v <= 1.0))
          throw Error(Errc::InvalidProbability,
                      "probability " + to_string(c.prob) + " of " + to_string(c.atom) + " is outside [0,1]",
                      st.line);
        total += *v;
      }
    }
    if (total > 1.0 + 1e-9)
      throw Error(Errc::InvalidProbability, "annotated disjunction probabilities sum to more than 1", st.line);

    Statement fact;
    fact.kind = StmtKind::DistFact;
    fact.line = st.line;
    if (st.choices.size() == 1) {
      fact.head = make_const(fresh_name("pf_", ++pf, out.symbols));
      fact.dist = make_compound("flip", {st.choices[0].prob});
    } else {
      fact.head = make_const(fresh_name("ad_", ++ad, out.symbols));
      std::vector<Term> items;
      for (std::size_t i = 0; i < st.choices.size(); ++i)
        items.push_back(make_compound(":", {st.choices[i].prob, make_int(static_cast<std::int64_t>(i + 1))}));
      fact.dist = make_compound("finite", {make_list(std::move(items))});
    }
    out.statements.push_back(fact);
    for (std::size_t i = 0; i < st.choices.size(); ++i) {
      Statement rule;
      rule.kind = StmtKind::NormalClause;
      rule.line = st.line;
      rule.head = st.choices[i].atom;
      rule.body = st.body;
      rule.body.push_back(cmp_literal(fact.head, "=:=", make_int(static_cast<std::int64_t>(i + 1))));
      out.statements.push_back(std::move(rule));
    }
  }
  return out;
}

DcEliminated eliminate_dcs(const AdFreeProgram& p, const TransformConfig& cfg) {
  DcEliminated out;
  InternTable interns = build_intern_table(p.statements);
  std::set<std::string> symbols = p.symbols;

  // Group distributional statements by random term.
  std::vector<std::string> keys;
  std::map<std::string, std::vector<std::size_t>> stmts;
  for (std::size_t i = 0; i < p.statements.size(); ++i) {
    const auto& st = p.statements[i];
    if (st.kind == StmtKind::DistFact || st.kind == StmtKind::DistClause) {
      std::string k = to_string(st.head);
      if (!stmts.count(k)) {
        keys.push_back(k);
        out.terms[k] = st.head;
      }
      stmts[k].push_back(i);
    } else {
      out.logic_rules.push_back({st.head, st.body});
    }
  }
  auto is_random = [&](const Term& t) { return out.terms.count(to_string(t)) > 0; };

  // Parent random terms per statement, and the term-level dependency graph.
  std::map<std::size_t, std::vector<Term>> parents;
  std::map<std::string, std::set<std::string>> deps;
  for (const auto& k : keys) {
    for (std::size_t i : stmts[k]) {
      const auto& st = p.statements[i];
      if (!dist_kind(st.dist))
        throw Error(Errc::Syntax, "unknown distribution " + to_string(st.dist), st.line);
      std::vector<Term> ps;
      for (const Term* e : param_exprs(st.dist))
        expr_random_terms(*e, is_random, interns, ps, "distribution parameter");
      for (const auto& t : ps) deps[k].insert(to_string(t));
      parents[i] = std::move(ps);
    }
  }
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < keys.size(); ++i) rank[keys[i]] = i;
  std::map<std::string, int> indeg;
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& k : keys) {
    indeg[k] += 0;
    for (const auto& d : deps[k]) {
      ++indeg[k];
      succ[d].push_back(k);
    }
  }
  auto cmp = [&](const std::string& a, const std::string& b) { return rank[a] > rank[b]; };
  std::priority_queue<std::string, std::vector<std::string>, decltype(cmp)> ready(cmp);
  for (const auto& k : keys)
    if (indeg[k] == 0) ready.push(k);
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string k = ready.top();
    ready.pop();
    order.push_back(k);
    for (const auto& s : succ[k])
      if (--indeg[s] == 0) ready.push(s);
  }
  if (order.size() != keys.size()) {
    std::string cyc;
    for (const auto& k : keys)
      if (indeg[k] > 0) cyc += (cyc.empty() ? "" : ", ") + k;
    throw Error(Errc::CyclicRandomTermDependency, "random terms depend on each other cyclically: " + cyc);
  }

  std::size_t counter = 0;
  for (const auto& k : order) {
    for (std::size_t i : stmts[k]) {
      const auto& st = p.statements[i];
      const auto& ps = parents[i];
      std::vector<const std::vector<std::string>*> lists;
      std::size_t combos = 1;
      for (const auto& t : ps) {
        const auto& vs = out.vars_per_term[to_string(t)];
        lists.push_back(&vs);
        combos = checked_product(combos, vs.size(), cfg.expansion_cap, "distributional clause for " + k);
      }
      if (counter + combos > cfg.expansion_cap)
        throw Error(Errc::UnboundedExpansion,
                    "more than " + std::to_string(cfg.expansion_cap) + " random variables introduced");
      for_each_combo(lists, [&](const std::vector<std::string>& choice) {
        std::map<std::string, std::string> repl;
        CoreClause ctx;
        for (std::size_t j = 0; j < ps.size(); ++j) {
          repl[to_string(ps[j])] = choice[j];
          ctx.body.push_back(Literal{make_compound("rv", {ps[j], make_const(choice[j])}), false});
        }
        RandomVar v;
        v.name = fresh_name("v", ++counter, symbols);
        v.dist = replace_params(st.dist, repl);
        v.origin = st.head;
        v.stmt = i;
        ctx.head = make_compound("rv", {st.head, make_const(v.name)});
        for (const auto& l : st.body) ctx.body.push_back(l);
        out.vars_per_term[k].push_back(v.name);
        out.facts.push_back(std::move(v));
        out.context_rules.push_back(std::move(ctx));
      });
    }
  }
  return out;
}

std::vector<CoreClause> contextualize(const std::vector<CoreClause>& rules,
                                      const std::map<std::string, std::vector<std::string>>& vpt,
                                      const InternTable& interns, const TransformConfig& cfg) {
  auto is_random = [&](const Term& t) { return vpt.count(to_string(t)) > 0; };
  std::vector<CoreClause> out;
  for (const auto& r : rules) {
    std::vector<Term> terms;
    for (const auto& l : r.body) {
      if (!is_comparison(l.atom)) continue;
      const Term& a = l.atom;
      if (a.name == "delta_interval") {
        if (!is_random(a.args[0]))
          throw Error(Errc::MalformedObservation,
                      "delta_interval needs a single random term on the left: " + to_string(a));
        std::vector<Term> rhs;
        expr_random_terms(a.args[1], is_random, interns, rhs, "delta_interval value");
        if (!rhs.empty())
          throw Error(Errc::MalformedObservation, "delta_interval needs a number on the right: " + to_string(a));
        if (std::find(terms.begin(), terms.end(), a.args[0]) == terms.end()) terms.push_back(a.args[0]);
        continue;
      }
      expr_random_terms(a.args[0], is_random, interns, terms, "comparison");
      expr_random_terms(a.args[1], is_random, interns, terms, "comparison");
    }
    if (terms.empty()) {
      out.push_back(r);
      continue;
    }
    std::vector<const std::vector<std::string>*> lists;
    std::size_t combos = 1;
    for (const auto& t : terms) {
      const auto& vs = vpt.at(to_string(t));
      lists.push_back(&vs);
      combos = checked_product(combos, vs.size(), cfg.expansion_cap, "rule for " + to_string(r.head));
    }
    for_each_combo(lists, [&](const std::vector<std::string>& choice) {
      std::map<std::string, std::string> repl;
      CoreClause c;
      c.head = r.head;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        repl[to_string(terms[j])] = choice[j];
        c.body.push_back(Literal{make_compound("rv", {terms[j], make_const(choice[j])}), false});
      }
      for (const auto& l : r.body) {
        if (is_comparison(l.atom)) {
          Term a = l.atom;
          for (auto& x : a.args) x = replace_terms(x, repl);
          c.body.push_back(Literal{std::move(a), l.negated});
        } else {
          c.body.push_back(l);
        }
      }
      out.push_back(std::move(c));
    });
  }
  return out;
}

CoreProgram unfold_rv(const DcEliminated& dc, const std::vector<CoreClause>& rules, const InternTable& interns) {
  std::map<std::string, std::vector<const CoreClause*>> defs;
  std::vector<const CoreClause*> logic;
  for (const auto& r : rules) {
    if (is_rv_atom(r.head)) defs[to_string(r.head)].push_back(&r);
    else logic.push_back(&r);
  }
  using Bodies = std::vector<std::vector<Literal>>;
  std::map<std::string, Bodies> memo;
  std::unordered_set<std::string> active;

  std::function<Bodies(const std::vector<Literal>&)> unfold_body;
  std::function<const Bodies&(const std::string&)> unfold_atom = [&](const std::string& key) -> const Bodies& {
    auto m = memo.find(key);
    if (m != memo.end()) return m->second;
    if (active.count(key)) throw Error(Errc::RvCycle, "rv/2 definitions are cyclic at " + key);
    active.insert(key);
    Bodies all;
    auto d = defs.find(key);
    if (d != defs.end()) {
      for (const CoreClause* c : d->second) {
        Bodies bs = unfold_body(c->body);
        all.insert(all.end(), bs.begin(), bs.end());
      }
    }
    active.erase(key);
    return memo[key] = std::move(all);
  };
  unfold_body = [&](const std::vector<Literal>& body) -> Bodies {
    Bodies acc{{}};
    for (const auto& l : body) {
      if (is_rv_atom(l.atom)) {
        if (l.negated) throw Error(Errc::RvCycle, "negated rv/2 literal cannot be unfolded");
        const Bodies& alts = unfold_atom(to_string(l.atom));
        Bodies next;
        for (const auto& a : acc) {
          for (const auto& b : alts) {
            std::vector<Literal> merged = a;
            merged.insert(merged.end(), b.begin(), b.end());
            if (prune_body(merged)) next.push_back(std::move(merged));
          }
        }
        acc = std::move(next);
      } else {
        Bodies next;
        for (auto& a : acc) {
          a.push_back(l);
          if (prune_body(a)) next.push_back(std::move(a));
        }
        acc = std::move(next);
      }
      if (acc.empty()) break;
    }
    return acc;
  };

  CoreProgram out;
  out.vars = dc.facts;
  out.interns = interns;
  out.vars_per_term = dc.vars_per_term;
  for (const auto& ctx : dc.context_rules) out.contexts[ctx.head.args[1].name] = unfold_atom(to_string(ctx.head));
  std::unordered_set<std::string> seen;
  for (const CoreClause* r : logic) {
    for (auto& b : unfold_body(r->body)) {
      CoreClause c{r->head, std::move(b)};
      if (seen.insert(to_string(c)).second) out.clauses.push_back(std::move(c));
    }
  }
  out.reindex();
  return out;
}

std::vector<std::string> dist_parents(const Term& dist, const CoreProgram& p) {
  std::vector<std::string> out;
  std::function<void(const Term&)> walk = [&](const Term& t) {
    if (t.is_const() && p.find_var(t.name) >= 0) {
      if (std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
      return;
    }
    for (const auto& a : t.args) walk(a);
  };
  for (const Term* e : param_exprs(dist)) walk(*e);
  return out;
}

DependencyGraph validate_core(const CoreProgram& p, std::vector<Diagnostic>* diags) {
  DependencyGraph g;
  const std::size_t n = p.vars.size();
  g.parents.resize(n);
  g.children.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes.push_back(p.vars[i].name);
    for (const auto& par : dist_parents(p.vars[i].dist, p)) {
      int j = p.find_var(par);
      g.parents[i].push_back(j);
      g.children[j].push_back(static_cast<int>(i));
    }
  }
  std::vector<int> indeg(n);
  for (std::size_t i = 0; i < n; ++i) indeg[i] = static_cast<int>(g.parents[i].size());
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push(static_cast<int>(i));
  while (!ready.empty()) {
    int i = ready.top();
    ready.pop();
    g.topo.push_back(i);
    for (int c : g.children[i])
      if (--indeg[c] == 0) ready.push(c);
  }
  if (g.topo.size() != n)
    throw Error(Errc::CyclicRandomVariableDependency, "random variables depend on each other cyclically");

  if (diags) {
    for (std::size_t i = 0; i < n; ++i) {
      auto kind = dist_kind(p.vars[i].dist);
      if (!kind) continue;
      std::vector<const Term*> restricted;
      const Term& d = p.vars[i].dist;
      switch (*kind) {
        case DistKind::Normal: restricted.push_back(&d.args[1]); break;
        case DistKind::Beta:
        case DistKind::Flip:
        case DistKind::Poisson:
          for (const auto& a : d.args) restricted.push_back(&a);
          break;
        case DistKind::Finite:
          for (const Term* e : param_exprs(d)) restricted.push_back(e);
          break;
        default: break;
      }
      for (const Term* e : restricted) {
        std::vector<std::string> used;
        std::function<void(const Term&)> walk = [&](const Term& t) {
          if (t.is_const() && p.find_var(t.name) >= 0) used.push_back(t.name);
          for (const auto& a : t.args) walk(a);
        };
        walk(*e);
        for (const auto& u : used) {
          auto pk = dist_kind(p.vars[p.find_var(u)].dist);
          if (pk == DistKind::Normal) {
            diags->push_back({DiagKind::DomainWarning,
                              "parameter of " + p.vars[i].name + " ~ " + to_string(d) + " depends on " + u +
                                  ", whose normal distribution ranges over all reals",
                              0});
            break;
          }
        }
      }
    }
  }
  return g;
}

Desugared desugar(const GroundProgram& gp, const TransformConfig& cfg) {
  AdFreeProgram adfree = eliminate_ads(gp);
  DcEliminated dc = eliminate_dcs(adfree, cfg);
  InternTable interns = build_intern_table(adfree.statements);
  std::vector<CoreClause> rules = dc.context_rules;
  rules.insert(rules.end(), dc.logic_rules.begin(), dc.logic_rules.end());
  std::vector<CoreClause> ctx = contextualize(rules, dc.vars_per_term, interns, cfg);
  Desugared out;
  out.core = unfold_rv(dc, ctx, interns);
  out.graph = validate_core(out.core, &out.diagnostics);
  return out;
}

std::string to_string(const CoreClause& c) {
  std::string s = to_string(c.head);
  if (!c.body.empty()) s += " :- " + to_string(c.body);
  return s + ".";
}

std::string to_string(const CoreProgram& p) {
  std::string s;
  for (const auto& v : p.vars) s += v.name + " ~ " + to_string(v.dist) + ".\n";
  if (!p.vars.empty() && !p.clauses.empty()) s += "\n";
  for (const auto& c : p.clauses) s += to_string(c) + "\n";
  return s;
}

}  // namespace dcplp
