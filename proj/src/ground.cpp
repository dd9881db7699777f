#include "dcplp/ground.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "dcplp/error.hpp"

namespace dcplp {

namespace {

using Subst = std::unordered_map<std::string, Term>;

const Term& deref(const Term& t, const Subst& s) {
  const Term* cur = &t;
  while (cur->is_var()) {
    auto it = s.find(cur->name);
    if (it == s.end()) break;
    cur = &it->second;
  }
  return *cur;
}

Term substitute(const Term& t, const Subst& s) {
  const Term& d = deref(t, s);
  if (d.args.empty()) return d;
  Term out = d;
  for (auto& a : out.args) a = substitute(a, s);
  return out;
}

bool occurs(const std::string& v, const Term& t, const Subst& s) {
  const Term& d = deref(t, s);
  if (d.is_var()) return d.name == v;
  for (const auto& a : d.args)
    if (occurs(v, a, s)) return true;
  return false;
}

bool unify(const Term& a, const Term& b, Subst& s) {
  const Term& x = deref(a, s);
  const Term& y = deref(b, s);
  if (x.is_var() && y.is_var() && x.name == y.name) return true;
  if (x.is_var()) {
    if (occurs(x.name, y, s)) return false;
    s[x.name] = y;
    return true;
  }
  if (y.is_var()) {
    if (occurs(y.name, x, s)) return false;
    s[y.name] = x;
    return true;
  }
  if (x.kind != y.kind) return false;
  if (x.is_num()) return x.value == y.value;
  if (x.is_const()) return x.name == y.name;
  if (x.is_compound() && x.name != y.name) return false;
  if (x.args.size() != y.args.size()) return false;
  for (std::size_t i = 0; i < x.args.size(); ++i)
    if (!unify(x.args[i], y.args[i], s)) return false;
  return true;
}

Term rename(const Term& t, const std::string& suffix) {
  if (t.is_var()) return make_var(t.name + suffix);
  if (t.args.empty()) return t;
  Term out = t;
  for (auto& a : out.args) a = rename(a, suffix);
  return out;
}

Statement rename(const Statement& st, const std::string& suffix) {
  Statement out = st;
  out.head = rename(st.head, suffix);
  out.dist = rename(st.dist, suffix);
  for (auto& c : out.choices) {
    c.prob = rename(c.prob, suffix);
    c.atom = rename(c.atom, suffix);
  }
  for (auto& l : out.body) l.atom = rename(l.atom, suffix);
  return out;
}

Statement substitute(const Statement& st, const Subst& s) {
  Statement out = st;
  out.head = substitute(st.head, s);
  out.dist = substitute(st.dist, s);
  for (auto& c : out.choices) {
    c.prob = substitute(c.prob, s);
    c.atom = substitute(c.atom, s);
  }
  for (auto& l : out.body) l.atom = substitute(l.atom, s);
  return out;
}

bool statement_ground(const Statement& st) {
  if (!is_ground(st.head) || !is_ground(st.dist)) return false;
  for (const auto& c : st.choices)
    if (!is_ground(c.prob) || !is_ground(c.atom)) return false;
  for (const auto& l : st.body)
    if (!is_ground(l.atom)) return false;
  return true;
}

std::size_t depth(const Term& t) {
  std::size_t d = 0;
  for (const auto& a : t.args) d = std::max(d, depth(a));
  return d + 1;
}

// Variant key: variables renamed in order of first occurrence.
std::string variant_key(const Term& t) {
  std::vector<std::string> vars;
  collect_vars(t, vars);
  if (vars.empty()) return to_string(t);
  Subst s;
  for (std::size_t i = 0; i < vars.size(); ++i) s[vars[i]] = make_var("_V" + std::to_string(i));
  return to_string(substitute(t, s));
}

struct Table {
  Term pattern;
  bool is_rv = false;
  std::vector<Term> answers;
  std::unordered_set<std::string> answer_keys;
};

struct Candidate {
  std::size_t stmt;
  int choice;  // -1: clause head / DC head
};

class Grounder {
 public:
  Grounder(const Program& p, const GroundConfig& cfg) : prog_(p), cfg_(cfg) {
    for (std::size_t i = 0; i < p.statements.size(); ++i) {
      const auto& st = p.statements[i];
      switch (st.kind) {
        case StmtKind::Fact:
        case StmtKind::NormalClause:
          atoms_[indicator(st.head)].push_back({i, -1});
          break;
        case StmtKind::ProbFact:
        case StmtKind::AnnotatedDisjunction:
          for (std::size_t c = 0; c < st.choices.size(); ++c)
            atoms_[indicator(st.choices[c].atom)].push_back({i, static_cast<int>(c)});
          break;
        case StmtKind::DistFact:
        case StmtKind::DistClause:
          rvs_.push_back({i, -1});
          break;
      }
    }
  }

  bool defined(const Term& atom) const { return atoms_.count(indicator(atom)) > 0; }

  std::vector<Term> solve(const Term& pattern, bool is_rv) {
    if (depth(pattern) > cfg_.max_term_depth)
      throw Error(Errc::NonTerminatingGrounding,
                  "term nesting exceeds " + std::to_string(cfg_.max_term_depth) + " while grounding");
    std::string key = (is_rv ? "r:" : "a:") + variant_key(pattern);
    auto it = index_.find(key);
    if (it != index_.end()) return tables_[it->second]->answers;
    if (tables_.size() + answer_count_ >= cfg_.memo_cap)
      throw Error(Errc::NonTerminatingGrounding,
                  "grounding memo table exceeded " + std::to_string(cfg_.memo_cap) + " entries");
    auto t = std::make_unique<Table>();
    t->pattern = pattern;
    t->is_rv = is_rv;
    std::size_t id = tables_.size();
    tables_.push_back(std::move(t));
    index_[key] = id;
    changed_ = true;
    evaluate(id);
    return tables_[id]->answers;
  }

  void fixpoint() {
    do {
      changed_ = false;
      for (std::size_t i = 0; i < tables_.size(); ++i) evaluate(i);
    } while (changed_);
  }

  GroundProgram result() {
    std::vector<std::size_t> order(records_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return records_[a].first < records_[b].first;
    });
    GroundProgram gp;
    for (std::size_t i : order) {
      const Statement& st = records_[i].second;
      std::size_t idx = gp.statements.size();
      switch (st.kind) {
        case StmtKind::Fact:
        case StmtKind::NormalClause:
          gp.atom_index[to_string(st.head)].push_back(idx);
          break;
        case StmtKind::ProbFact:
        case StmtKind::AnnotatedDisjunction:
          for (const auto& c : st.choices) gp.atom_index[to_string(c.atom)].push_back(idx);
          break;
        case StmtKind::DistFact:
        case StmtKind::DistClause:
          gp.rv_index[to_string(st.head)].push_back(idx);
          break;
      }
      gp.statements.push_back(st);
    }
    return gp;
  }

  std::vector<Term> answers_for(const Term& pattern, bool is_rv) {
    return solve(pattern, is_rv);
  }

 private:
  void evaluate(std::size_t id) {
    Term pattern = tables_[id]->pattern;
    bool is_rv = tables_[id]->is_rv;
    const std::vector<Candidate>* cands = nullptr;
    if (is_rv) {
      cands = &rvs_;
    } else {
      auto it = atoms_.find(indicator(pattern));
      if (it == atoms_.end()) return;
      cands = &it->second;
    }
    for (const auto& c : *cands) {
      const Statement& src = prog_.statements[c.stmt];
      Statement st = rename(src, "#" + std::to_string(++fresh_));
      const Term& head = c.choice < 0 ? st.head : st.choices[c.choice].atom;
      Subst s;
      if (!unify(head, pattern, s)) continue;
      solve_body(st.body, 0, s, [&](const Subst& full) { record(id, c, st, full); });
    }
  }

  void record(std::size_t id, const Candidate& c, const Statement& st, const Subst& s) {
    Statement g = substitute(st, s);
    if (!statement_ground(g))
      throw Error(Errc::NonGroundTerm,
                  "statement is not range-restricted; non-ground instance: " + to_string(g), st.line);
    // Dependencies of parameters and probability labels on random terms.
    if (g.kind == StmtKind::DistFact || g.kind == StmtKind::DistClause) {
      for (const auto& a : g.dist.args) touch_random_terms(a);
    }
    for (const auto& ch : g.choices) touch_random_terms(ch.prob);

    std::string key = std::to_string(c.stmt) + "|" + to_string(g);
    if (record_keys_.insert(key).second) {
      records_.emplace_back(c.stmt, g);
      changed_ = true;
    }
    const Term& head = c.choice < 0 ? g.head : g.choices[c.choice].atom;
    Table& t = *tables_[id];
    if (t.answer_keys.insert(to_string(head)).second) {
      t.answers.push_back(head);
      ++answer_count_;
      changed_ = true;
      if (tables_.size() + answer_count_ >= cfg_.memo_cap)
        throw Error(Errc::NonTerminatingGrounding,
                    "grounding memo table exceeded " + std::to_string(cfg_.memo_cap) + " entries");
    }
  }

  // Ground random terms referenced inside an arithmetic expression.
  void touch_random_terms(const Term& t) {
    if (t.is_num() || t.is_var()) return;
    if (t.is_list()) {
      for (const auto& a : t.args) touch_random_terms(a);
      return;
    }
    if (t.is_compound() && (is_arith_functor(t) || t.name == ":")) {
      for (const auto& a : t.args) touch_random_terms(a);
      return;
    }
    solve(t, true);
  }

  // Random subterms of a comparison, in left-to-right order.
  static void random_subterms(const Term& t, std::vector<Term>& out) {
    if (t.is_num()) return;
    if (t.is_var()) {
      out.push_back(t);
      return;
    }
    if (t.is_list()) return;
    if (t.is_compound() && (is_arith_functor(t) || is_comparison(t))) {
      for (const auto& a : t.args) random_subterms(a, out);
      return;
    }
    out.push_back(t);
  }

  void bind_random(const std::vector<Term>& terms, std::size_t k, Subst& s,
                   const std::function<void(Subst&)>& k_done, const Statement* owner = nullptr) {
    if (k == terms.size()) {
      k_done(s);
      return;
    }
    Term t = substitute(terms[k], s);
    if (t.is_var())
      throw Error(Errc::NonGroundTerm, "unbound variable " + t.name + " in comparison",
                  owner ? owner->line : 0);
    auto answers = solve(t, true);
    if (is_ground(t)) {
      // Unknown ground constants may be sample-space values; they never block the rule.
      bind_random(terms, k + 1, s, k_done, owner);
      return;
    }
    for (const auto& a : answers) {
      Subst s2 = s;
      if (unify(t, a, s2)) bind_random(terms, k + 1, s2, k_done, owner);
    }
  }

  void solve_body(const std::vector<Literal>& body, std::size_t i, const Subst& s,
                  const std::function<void(const Subst&)>& done) {
    if (i == body.size()) {
      done(s);
      return;
    }
    const Literal& lit = body[i];
    Term atom = substitute(lit.atom, s);
    if (is_comparison(atom)) {
      std::vector<Term> terms;
      if (atom.name == "delta_interval") {
        terms.push_back(atom.args[0]);
        random_subterms(atom.args[1], terms);
      } else {
        random_subterms(atom, terms);
      }
      Subst s2 = s;
      bind_random(terms, 0, s2, [&](Subst& full) { solve_body(body, i + 1, full, done); });
      return;
    }
    if (lit.negated) {
      if (!is_ground(atom))
        throw Error(Errc::NonGroundTerm, "negated literal is not ground when reached: not " + to_string(atom));
      solve(atom, false);
      solve_body(body, i + 1, s, done);
      return;
    }
    auto answers = solve(atom, false);
    for (const auto& a : answers) {
      Subst s2 = s;
      if (unify(atom, a, s2)) solve_body(body, i + 1, s2, done);
    }
  }

  const Program& prog_;
  GroundConfig cfg_;
  std::unordered_map<std::string, std::vector<Candidate>> atoms_;
  std::vector<Candidate> rvs_;
  std::vector<std::unique_ptr<Table>> tables_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::pair<std::size_t, Statement>> records_;
  std::unordered_set<std::string> record_keys_;
  std::size_t answer_count_ = 0;
  std::size_t fresh_ = 0;
  bool changed_ = false;
};

}  // namespace

GroundProgram relevant_ground_program(const Program& p, const QueryTask& task, const GroundConfig& cfg) {
  Grounder g(p, cfg);
  for (const auto& q : task.queries) {
    if (!g.defined(q))
      throw Error(Errc::UnknownPredicate, "no clause or fact defines " + indicator(q));
    g.solve(q, false);
  }
  for (const auto& [a, v] : task.evidence) g.solve(a, false);
  for (const auto& [t, v] : task.observations) {
    if (!is_ground(t))
      throw Error(Errc::MalformedObservation, "observed term is not ground: " + to_string(t));
    if (t.is_num() || is_arith_functor(t) || is_comparison(t))
      throw Error(Errc::MalformedObservation, "observation must name a random term: " + to_string(t));
    if (g.solve(t, true).empty())
      throw Error(Errc::UnknownRandomTerm, "observed term has no distribution: " + to_string(t));
  }
  g.fixpoint();
  GroundProgram gp = g.result();
  for (const auto& q : task.queries) {
    if (is_ground(q)) {
      gp.query_atoms.push_back(q);
      continue;
    }
    for (const auto& a : g.answers_for(q, false)) gp.query_atoms.push_back(a);
  }
  gp.task = task;
  return gp;
}

GroundProgram full_ground_program(const Program& p, const GroundConfig& cfg) {
  Grounder g(p, cfg);
  auto general = [](const Term& t) {
    if (!t.is_compound()) return t;
    std::vector<Term> args;
    for (std::size_t i = 0; i < t.args.size(); ++i) args.push_back(make_var("_A" + std::to_string(i)));
    return make_compound(t.name, std::move(args));
  };
  for (const auto& st : p.statements) {
    switch (st.kind) {
      case StmtKind::Fact:
      case StmtKind::NormalClause:
        g.solve(general(st.head), false);
        break;
      case StmtKind::ProbFact:
      case StmtKind::AnnotatedDisjunction:
        for (const auto& c : st.choices) g.solve(general(c.atom), false);
        break;
      case StmtKind::DistFact:
      case StmtKind::DistClause:
        g.solve(general(st.head), true);
        break;
    }
  }
  for (const auto& q : p.task.queries) g.solve(q, false);
  g.fixpoint();
  GroundProgram gp = g.result();
  gp.task = p.task;
  return gp;
}

}  // namespace dcplp
