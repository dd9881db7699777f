#include "dcplp/circuit.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <sstream>

#include "dcplp/error.hpp"

namespace dcplp {

namespace {

std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

std::vector<int> set_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

// ---------------------------------------------------------------- BDD

Bdd::Bdd(std::vector<int> order, std::size_t num_vars, std::size_t node_cap)
    : level_of_(num_vars, INT_MAX), node_cap_(std::min<std::size_t>(node_cap, (1u << 25) - 1)) {
  int lvl = 0;
  for (int v : order)
    if (v >= 0 && static_cast<std::size_t>(v) < num_vars && level_of_[v] == INT_MAX) level_of_[v] = lvl++;
  for (std::size_t v = 0; v < num_vars; ++v)
    if (level_of_[v] == INT_MAX) level_of_[v] = lvl++;
  nodes_.push_back({-1, 0, 0});
  nodes_.push_back({-1, 1, 1});
}

int Bdd::level(int n) const { return n <= 1 ? INT_MAX : level_of_[nodes_[n].var]; }

int Bdd::mk(int var, int lo, int hi) {
  if (lo == hi) return lo;
  std::uint64_t key = (static_cast<std::uint64_t>(var) << 50) | (static_cast<std::uint64_t>(lo) << 25) |
                      static_cast<std::uint64_t>(hi);
  auto it = unique_.find(key);
  if (it != unique_.end()) return it->second;
  if (nodes_.size() >= node_cap_)
    throw Error(Errc::CompilationBudgetExceeded,
                "compilation exceeded the node budget of " + std::to_string(node_cap_) + " nodes");
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back({var, lo, hi});
  unique_.emplace(key, id);
  return id;
}

int Bdd::var_node(int v) { return mk(v, kFalse, kTrue); }

int Bdd::negate(int a) {
  if (a == kFalse) return kTrue;
  if (a == kTrue) return kFalse;
  auto it = not_cache_.find(a);
  if (it != not_cache_.end()) return it->second;
  Node n = nodes_[a];
  int lo = negate(n.lo);
  int hi = negate(n.hi);
  int r = mk(n.var, lo, hi);
  not_cache_[a] = r;
  return r;
}

int Bdd::apply(bool is_and, int a, int b) {
  if (is_and) {
    if (a == kFalse || b == kFalse) return kFalse;
    if (a == kTrue) return b;
    if (b == kTrue) return a;
  } else {
    if (a == kTrue || b == kTrue) return kTrue;
    if (a == kFalse) return b;
    if (b == kFalse) return a;
  }
  if (a == b) return a;
  if (a > b) std::swap(a, b);
  auto& cache = is_and ? and_cache_ : or_cache_;
  std::uint64_t key = pair_key(a, b);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  int la = level(a);
  int lb = level(b);
  int top = std::min(la, lb);
  int var = la == top ? nodes_[a].var : nodes_[b].var;
  int a_lo = la == top ? nodes_[a].lo : a;
  int a_hi = la == top ? nodes_[a].hi : a;
  int b_lo = lb == top ? nodes_[b].lo : b;
  int b_hi = lb == top ? nodes_[b].hi : b;
  int lo = apply(is_and, a_lo, b_lo);
  int hi = apply(is_and, a_hi, b_hi);
  int r = mk(var, lo, hi);
  (is_and ? and_cache_ : or_cache_)[key] = r;
  return r;
}

int Bdd::conj(int a, int b) { return apply(true, a, b); }
int Bdd::disj(int a, int b) { return apply(false, a, b); }

int Bdd::from_formula(const Formula& f) {
  auto it = formula_cache_.find(f.get());
  if (it != formula_cache_.end()) return it->second.second;
  int r = kFalse;
  switch (f->op) {
    case FNode::Op::True: r = kTrue; break;
    case FNode::Op::False: r = kFalse; break;
    case FNode::Op::Var: r = var_node(f->var); break;
    case FNode::Op::Not: r = negate(from_formula(f->kids[0])); break;
    case FNode::Op::And:
      r = kTrue;
      for (const auto& k : f->kids) {
        r = conj(r, from_formula(k));
        if (r == kFalse) break;
      }
      break;
    case FNode::Op::Or:
      r = kFalse;
      for (const auto& k : f->kids) {
        r = disj(r, from_formula(k));
        if (r == kTrue) break;
      }
      break;
  }
  formula_cache_[f.get()] = {f, r};
  return r;
}

// ---------------------------------------------------------------- circuits

void Circuit::compute_var_sets() {
  var_sets.assign(nodes.size(), {});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const CNode& n = nodes[i];
    if (n.type == CNode::Type::Lit) {
      var_sets[i] = {n.var};
      continue;
    }
    std::vector<int> acc;
    for (int k : n.kids) acc = set_union(acc, var_sets[k]);
    var_sets[i] = std::move(acc);
  }
}

std::size_t Circuit::edge_count() const {
  std::size_t e = 0;
  for (const auto& n : nodes) e += n.kids.size();
  return e;
}

Compiler::Compiler(const VarTable& table, std::vector<int> order, const CompileConfig& cfg)
    : bdd_(std::move(order), table.size(), cfg.node_cap) {
  if (table.size() > cfg.var_cap)
    throw Error(Errc::CompilationBudgetExceeded,
                "formula has " + std::to_string(table.size()) + " variables, above the cap of " +
                    std::to_string(cfg.var_cap));
}

Circuit Compiler::compile(const PropFormula& f) { return to_circuit(bdd_.from_formula(f.root)); }

Circuit Compiler::to_circuit(int root) {
  Circuit c;
  std::unordered_map<int, int> memo;
  std::map<std::pair<int, bool>, int> lits;
  auto push = [&](CNode n) {
    c.nodes.push_back(std::move(n));
    return static_cast<int>(c.nodes.size() - 1);
  };
  auto lit = [&](int v, bool pos) {
    auto it = lits.find({v, pos});
    if (it != lits.end()) return it->second;
    CNode n;
    n.type = CNode::Type::Lit;
    n.var = v;
    n.positive = pos;
    int id = push(n);
    lits[{v, pos}] = id;
    return id;
  };
  std::function<int(int)> conv = [&](int b) -> int {
    auto it = memo.find(b);
    if (it != memo.end()) return it->second;
    int id;
    if (b == Bdd::kTrue || b == Bdd::kFalse) {
      CNode n;
      n.type = b == Bdd::kTrue ? CNode::Type::True : CNode::Type::False;
      id = push(n);
    } else {
      int v = bdd_.var_of(b);
      std::vector<int> branches;
      for (bool pos : {true, false}) {
        int child = pos ? bdd_.hi(b) : bdd_.lo(b);
        if (child == Bdd::kFalse) continue;
        int l = lit(v, pos);
        if (child == Bdd::kTrue) {
          branches.push_back(l);
        } else {
          int sub = conv(child);
          CNode a;
          a.type = CNode::Type::And;
          a.kids = {l, sub};
          branches.push_back(push(a));
        }
      }
      if (branches.size() == 1) {
        id = branches[0];
      } else {
        CNode o;
        o.type = CNode::Type::Or;
        o.kids = branches;
        id = push(o);
      }
    }
    memo[b] = id;
    return id;
  };
  c.root = conv(root);
  c.compute_var_sets();
  return c;
}

Circuit compile(const PropFormula& f, const CompileConfig& cfg) {
  Compiler comp(*f.table, {}, cfg);
  return comp.compile(f);
}

Circuit smooth(const Circuit& c, const std::vector<int>& scope_in) {
  std::vector<int> scope = scope_in;
  std::sort(scope.begin(), scope.end());
  scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
  Circuit in = c;
  if (in.var_sets.size() != in.nodes.size()) in.compute_var_sets();

  Circuit out;
  std::vector<int> map(in.nodes.size(), -1);
  std::map<std::pair<int, bool>, int> lits;
  std::map<int, int> gadgets;
  auto push = [&](CNode n) {
    out.nodes.push_back(std::move(n));
    return static_cast<int>(out.nodes.size() - 1);
  };
  auto lit = [&](int v, bool pos) {
    auto it = lits.find({v, pos});
    if (it != lits.end()) return it->second;
    CNode n;
    n.type = CNode::Type::Lit;
    n.var = v;
    n.positive = pos;
    int id = push(n);
    lits[{v, pos}] = id;
    return id;
  };
  auto gadget = [&](int v) {
    auto it = gadgets.find(v);
    if (it != gadgets.end()) return it->second;
    CNode o;
    o.type = CNode::Type::Or;
    o.kids = {lit(v, true), lit(v, false)};
    int id = push(o);
    gadgets[v] = id;
    return id;
  };
  auto in_scope = [&](const std::vector<int>& vars) {
    std::vector<int> r;
    std::set_intersection(vars.begin(), vars.end(), scope.begin(), scope.end(), std::back_inserter(r));
    return r;
  };
  auto cover = [&](int node, const std::vector<int>& have, const std::vector<int>& want) {
    std::vector<int> missing;
    std::set_difference(want.begin(), want.end(), have.begin(), have.end(), std::back_inserter(missing));
    if (missing.empty()) return node;
    CNode a;
    a.type = CNode::Type::And;
    if (out.nodes[node].type != CNode::Type::True) a.kids.push_back(node);
    for (int m : missing) a.kids.push_back(gadget(m));
    if (a.kids.size() == 1) return a.kids[0];
    return push(a);
  };

  for (std::size_t i = 0; i < in.nodes.size(); ++i) {
    const CNode& n = in.nodes[i];
    if (n.type == CNode::Type::Lit) {
      map[i] = lit(n.var, n.positive);
      continue;
    }
    CNode m = n;
    for (auto& k : m.kids) k = map[k];
    if (n.type == CNode::Type::Or) {
      std::vector<int> want;
      for (int k : n.kids) want = set_union(want, in_scope(in.var_sets[k]));
      for (std::size_t j = 0; j < n.kids.size(); ++j)
        m.kids[j] = cover(m.kids[j], in_scope(in.var_sets[n.kids[j]]), want);
    }
    map[i] = push(m);
  }
  int root = map[in.root];
  if (out.nodes[root].type != CNode::Type::False) root = cover(root, in_scope(in.var_sets[in.root]), scope);
  out.root = root;
  out.compute_var_sets();
  return out;
}

namespace {

// Per-node variable sets, computed on the side when the circuit has none cached.
const std::vector<std::vector<int>>& var_sets_of(const Circuit& c, Circuit& scratch) {
  if (c.var_sets.size() == c.nodes.size()) return c.var_sets;
  scratch.nodes = c.nodes;
  scratch.compute_var_sets();
  return scratch.var_sets;
}

}  // namespace

bool is_decomposable(const Circuit& c) {
  Circuit scratch;
  const auto& vs = var_sets_of(c, scratch);
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    if (c.nodes[i].type != CNode::Type::And) continue;
    std::vector<int> seen;
    for (int k : c.nodes[i].kids) {
      std::vector<int> inter;
      std::set_intersection(seen.begin(), seen.end(), vs[k].begin(), vs[k].end(),
                            std::back_inserter(inter));
      if (!inter.empty()) return false;
      seen = set_union(seen, vs[k]);
    }
  }
  return true;
}

bool is_deterministic(const Circuit& c) {
  // Literals entailed by each node, encoded 2v (positive) / 2v+1 (negative).
  std::vector<std::vector<int>> ent(c.nodes.size());
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const CNode& n = c.nodes[i];
    switch (n.type) {
      case CNode::Type::Lit: ent[i] = {2 * n.var + (n.positive ? 0 : 1)}; break;
      case CNode::Type::True:
      case CNode::Type::False: break;
      case CNode::Type::And:
        for (int k : n.kids) ent[i] = set_union(ent[i], ent[k]);
        break;
      case CNode::Type::Or: {
        bool first = true;
        for (int k : n.kids) {
          if (first) {
            ent[i] = ent[k];
            first = false;
          } else {
            std::vector<int> inter;
            std::set_intersection(ent[i].begin(), ent[i].end(), ent[k].begin(), ent[k].end(),
                                  std::back_inserter(inter));
            ent[i] = std::move(inter);
          }
        }
        for (std::size_t a = 0; a < n.kids.size(); ++a) {
          if (c.nodes[n.kids[a]].type == CNode::Type::False) continue;
          for (std::size_t b = a + 1; b < n.kids.size(); ++b) {
            if (c.nodes[n.kids[b]].type == CNode::Type::False) continue;
            const auto& x = ent[n.kids[a]];
            const auto& y = ent[n.kids[b]];
            bool clash = false;
            for (int l : x)
              if (std::binary_search(y.begin(), y.end(), l ^ 1)) {
                clash = true;
                break;
              }
            if (!clash) return false;
          }
        }
        break;
      }
    }
  }
  return true;
}

bool is_smooth(const Circuit& c, const std::vector<int>& scope_in) {
  Circuit scratch;
  const auto& vs = var_sets_of(c, scratch);
  std::vector<int> scope = scope_in;
  std::sort(scope.begin(), scope.end());
  for (const auto& n : c.nodes) {
    if (n.type != CNode::Type::Or) continue;
    std::vector<int> ref;
    bool first = true;
    for (int k : n.kids) {
      std::vector<int> r;
      std::set_intersection(vs[k].begin(), vs[k].end(), scope.begin(), scope.end(),
                            std::back_inserter(r));
      if (first) {
        ref = r;
        first = false;
      } else if (r != ref) {
        return false;
      }
    }
  }
  return true;
}

std::uint64_t model_count(const Circuit& c, int num_vars) {
  Circuit scratch;
  const auto& vs = var_sets_of(c, scratch);
  std::vector<std::uint64_t> cnt(c.nodes.size());
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const CNode& n = c.nodes[i];
    switch (n.type) {
      case CNode::Type::Lit: cnt[i] = 1; break;
      case CNode::Type::True: cnt[i] = 1; break;
      case CNode::Type::False: cnt[i] = 0; break;
      case CNode::Type::And:
        cnt[i] = 1;
        for (int k : n.kids) cnt[i] *= cnt[k];
        break;
      case CNode::Type::Or: {
        std::uint64_t s = 0;
        for (int k : n.kids) {
          std::size_t gap = vs[i].size() - vs[k].size();
          s += cnt[k] << gap;
        }
        cnt[i] = s;
        break;
      }
    }
  }
  std::size_t gap = static_cast<std::size_t>(num_vars) - vs[c.root].size();
  return cnt[c.root] << gap;
}

std::string to_dot(const Circuit& c, const std::function<std::string(int)>& var_name) {
  std::ostringstream os;
  os << "digraph circuit {\n  rankdir=BT;\n  node [fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const CNode& n = c.nodes[i];
    os << "  n" << i << " [";
    switch (n.type) {
      case CNode::Type::Lit: {
        std::string label = (n.positive ? "" : "¬") + var_name(n.var);
        std::string esc;
        for (char ch : label) {
          if (ch == '"' || ch == '\\') esc += '\\';
          esc += ch;
        }
        os << "shape=box,label=\"" << esc << "\"";
        break;
      }
      case CNode::Type::And: os << "shape=circle,label=\"⊗\""; break;
      case CNode::Type::Or: os << "shape=circle,label=\"⊕\""; break;
      case CNode::Type::True: os << "shape=box,label=\"⊤\""; break;
      case CNode::Type::False: os << "shape=box,label=\"⊥\""; break;
    }
    if (static_cast<int>(i) == c.root) os << ",penwidth=2";
    os << "];\n";
    for (int k : n.kids) os << "  n" << k << " -> n" << i << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace dcplp
