#include "dcplp/formula.hpp"

#include <algorithm>
#include <functional>

#include "dcplp/error.hpp"

namespace dcplp {

namespace {

Formula make(FNode::Op op, int var = -1, std::vector<Formula> kids = {}) {
  auto n = std::make_shared<FNode>();
  n->op = op;
  n->var = var;
  n->kids = std::move(kids);
  return n;
}

}  // namespace

Formula f_true() {
  static const Formula t = make(FNode::Op::True);
  return t;
}

Formula f_false() {
  static const Formula f = make(FNode::Op::False);
  return f;
}

Formula f_var(int v) { return make(FNode::Op::Var, v); }

Formula f_not(Formula a) {
  if (a->op == FNode::Op::True) return f_false();
  if (a->op == FNode::Op::False) return f_true();
  if (a->op == FNode::Op::Not) return a->kids[0];
  return make(FNode::Op::Not, -1, {std::move(a)});
}

Formula f_and(std::vector<Formula> kids) {
  std::vector<Formula> out;
  for (auto& k : kids) {
    if (k->op == FNode::Op::False) return f_false();
    if (k->op == FNode::Op::True) continue;
    out.push_back(std::move(k));
  }
  if (out.empty()) return f_true();
  if (out.size() == 1) return out[0];
  return make(FNode::Op::And, -1, std::move(out));
}

Formula f_or(std::vector<Formula> kids) {
  std::vector<Formula> out;
  for (auto& k : kids) {
    if (k->op == FNode::Op::True) return f_true();
    if (k->op == FNode::Op::False) continue;
    out.push_back(std::move(k));
  }
  if (out.empty()) return f_false();
  if (out.size() == 1) return out[0];
  return make(FNode::Op::Or, -1, std::move(out));
}

Formula f_iff(Formula a, Formula b) {
  return f_and({f_or({f_not(a), b}), f_or({a, f_not(b)})});
}

Formula f_lit(int v, bool positive) { return positive ? f_var(v) : f_not(f_var(v)); }

int VarTable::find(const std::string& key) const {
  auto it = by_key.find(key);
  return it == by_key.end() ? -1 : it->second;
}

int VarTable::add(PropVar v) {
  int existing = find(v.key);
  if (existing >= 0) return existing;
  v.id = static_cast<int>(vars.size());
  by_key[v.key] = v.id;
  vars.push_back(std::move(v));
  return vars.back().id;
}

PropFormula clark_completion(const CoreProgram& p) {
  std::map<std::string, std::vector<std::size_t>> defs;
  std::vector<std::string> head_order;
  std::map<std::string, Term> atoms;
  for (std::size_t i = 0; i < p.clauses.size(); ++i) {
    std::string k = to_string(p.clauses[i].head);
    if (!defs.count(k)) head_order.push_back(k);
    defs[k].push_back(i);
    atoms[k] = p.clauses[i].head;
    for (const auto& l : p.clauses[i].body)
      if (!is_comparison(l.atom)) atoms[to_string(l.atom)] = l.atom;
  }

  // Dependencies first; a grey node reached again closes a cycle.
  std::vector<std::string> order;
  std::map<std::string, int> color;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& k) {
    int& c = color[k];
    if (c == 2) return;
    if (c == 1) {
      auto it = std::find(stack.begin(), stack.end(), k);
      std::string cyc;
      for (; it != stack.end(); ++it) cyc += *it + " -> ";
      throw Error(Errc::CyclicRuleDependency, "cyclic rule dependency: " + cyc + k);
    }
    c = 1;
    stack.push_back(k);
    auto d = defs.find(k);
    if (d != defs.end()) {
      for (std::size_t i : d->second)
        for (const auto& l : p.clauses[i].body)
          if (!is_comparison(l.atom)) visit(to_string(l.atom));
    }
    stack.pop_back();
    color[k] = 2;
    order.push_back(k);
  };
  for (const auto& k : head_order) visit(k);

  PropFormula f;
  f.table = std::make_shared<VarTable>();
  for (const auto& k : order) {
    PropVar v;
    v.kind = VarKind::Derived;
    v.atom = atoms[k];
    v.key = k;
    f.table->add(std::move(v));
  }
  auto comparison_var = [&](const Term& a) {
    std::string k = to_string(a);
    int id = f.table->find(k);
    if (id >= 0) return id;
    PropVar v;
    v.kind = VarKind::Comparison;
    v.atom = a;
    v.key = k;
    std::function<void(const Term&)> walk = [&](const Term& t) {
      if (t.is_const()) {
        int r = p.find_var(t.name);
        if (r >= 0 && std::find(v.rvs.begin(), v.rvs.end(), r) == v.rvs.end()) v.rvs.push_back(r);
      }
      for (const auto& x : t.args) walk(x);
    };
    walk(a);
    return f.table->add(std::move(v));
  };

  std::vector<Formula> conj;
  for (const auto& k : order) {
    int hv = f.table->find(k);
    std::vector<Formula> bodies;
    auto d = defs.find(k);
    if (d != defs.end()) {
      for (std::size_t i : d->second) {
        std::vector<Formula> lits;
        for (const auto& l : p.clauses[i].body) {
          int v = is_comparison(l.atom) ? comparison_var(l.atom) : f.table->find(to_string(l.atom));
          lits.push_back(f_lit(v, !l.negated));
        }
        bodies.push_back(f_and(std::move(lits)));
      }
    }
    Formula def = f_or(std::move(bodies));
    f.definitions.emplace_back(hv, def);
    conj.push_back(f_iff(f_var(hv), def));
  }
  f.root = f_and(std::move(conj));
  return f;
}

Formula atom_literal(const PropFormula& f, const Term& atom, bool positive) {
  int v = f.table->find(to_string(atom));
  if (v < 0 || f.table->vars[v].kind != VarKind::Derived) return positive ? f_false() : f_true();
  return f_lit(v, positive);
}

PropFormula conjoin(const PropFormula& f, Formula g) {
  PropFormula out = f;
  out.asserted.push_back(g);
  out.root = f_and({f.root, std::move(g)});
  return out;
}

PropFormula assert_evidence(const PropFormula& f, const QueryTask& task) {
  PropFormula out = f;
  for (const auto& [atom, value] : task.evidence) {
    int v = f.table->find(to_string(atom));
    if (v < 0 || f.table->vars[v].kind != VarKind::Derived)
      throw Error(Errc::UnknownEvidenceAtom, "evidence atom " + to_string(atom) + " does not occur in the program");
    out = conjoin(out, f_lit(v, value));
  }
  for (const auto& [term, value] : task.observations) {
    Term d = make_compound("delta_interval", {term, make_num(value)});
    int v = f.table->find(to_string(d));
    if (v < 0)
      throw Error(Errc::UnknownEvidenceAtom, "observation " + to_string(d) + " does not occur in the formula");
    out = conjoin(out, f_var(v));
  }
  return out;
}

bool evaluate(const Formula& f, const std::vector<bool>& a) {
  switch (f->op) {
    case FNode::Op::True: return true;
    case FNode::Op::False: return false;
    case FNode::Op::Var: return a[f->var];
    case FNode::Op::Not: return !evaluate(f->kids[0], a);
    case FNode::Op::And:
      for (const auto& k : f->kids)
        if (!evaluate(k, a)) return false;
      return true;
    case FNode::Op::Or:
      for (const auto& k : f->kids)
        if (evaluate(k, a)) return true;
      return false;
  }
  return false;
}

std::string var_label(const PropVar& v) {
  switch (v.kind) {
    case VarKind::Derived: return to_string(v.atom);
    case VarKind::Comparison: return to_string(v.atom);
    case VarKind::ChainBit: return v.key;
  }
  return v.key;
}

namespace {

std::string infix(const Formula& f) {
  switch (f->op) {
    case FNode::Op::True: return "T";
    case FNode::Op::False: return "F";
    case FNode::Op::Var: return std::to_string(f->var + 1);
    case FNode::Op::Not:
      if (f->kids[0]->op == FNode::Op::Var) return "-" + std::to_string(f->kids[0]->var + 1);
      return "-(" + infix(f->kids[0]) + ")";
    case FNode::Op::And:
    case FNode::Op::Or: {
      const char* sep = f->op == FNode::Op::And ? " & " : " | ";
      std::string s = "(";
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) s += sep;
        s += infix(f->kids[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

const char* kind_name(VarKind k) {
  switch (k) {
    case VarKind::Derived: return "atom";
    case VarKind::Comparison: return "cmp";
    case VarKind::ChainBit: return "bit";
  }
  return "?";
}

}  // namespace

std::string to_text(const PropFormula& f) {
  std::string s = "p dcplp " + std::to_string(f.table->size()) + " " +
                  std::to_string(f.definitions.size() + f.asserted.size()) + "\n";
  for (const auto& v : f.table->vars)
    s += "c " + std::to_string(v.id + 1) + " " + kind_name(v.kind) + " " + var_label(v) + "\n";
  for (const auto& [v, def] : f.definitions) s += std::to_string(v + 1) + " <-> " + infix(def) + "\n";
  for (const auto& a : f.asserted) s += "a " + infix(a) + "\n";
  return s;
}

}  // namespace dcplp
