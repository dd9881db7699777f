#include "dcplp/ast.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace dcplp {

Term make_var(std::string name) {
  Term t;
  t.kind = Term::Kind::Var;
  t.name = std::move(name);
  return t;
}

Term make_const(std::string name) {
  Term t;
  t.kind = Term::Kind::Const;
  t.name = std::move(name);
  return t;
}

Term make_num(double v) {
  Term t;
  t.kind = Term::Kind::Num;
  t.value = v;
  return t;
}

Term make_int(std::int64_t v) {
  Term t = make_num(static_cast<double>(v));
  t.is_int = true;
  t.num = v;
  return t;
}

Term make_rational(std::int64_t n, std::int64_t d) {
  Term t = make_num(static_cast<double>(n) / static_cast<double>(d));
  t.num = n;
  t.den = d;
  return t;
}

Term make_compound(std::string functor, std::vector<Term> args) {
  if (args.empty()) return make_const(std::move(functor));
  Term t;
  t.kind = Term::Kind::Compound;
  t.name = std::move(functor);
  t.args = std::move(args);
  return t;
}

Term make_list(std::vector<Term> items) {
  Term t;
  t.kind = Term::Kind::List;
  t.args = std::move(items);
  return t;
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Term::Kind::Num: return a.value == b.value;
    case Term::Kind::Var:
    case Term::Kind::Const: return a.name == b.name;
    case Term::Kind::Compound:
      if (a.name != b.name) return false;
      [[fallthrough]];
    case Term::Kind::List:
      return a.args == b.args;
  }
  return false;
}

bool operator==(const Literal& a, const Literal& b) {
  return a.negated == b.negated && a.atom == b.atom;
}

std::string indicator(const Term& t) {
  return t.name + "/" + std::to_string(t.arity());
}

bool is_ground(const Term& t) {
  if (t.is_var()) return false;
  for (const auto& a : t.args)
    if (!is_ground(a)) return false;
  return true;
}

void collect_vars(const Term& t, std::vector<std::string>& out) {
  if (t.is_var()) {
    if (std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
    return;
  }
  for (const auto& a : t.args) collect_vars(a, out);
}

std::optional<CmpOp> comparison_op(const Term& t) {
  if (!t.is_compound() || t.args.size() != 2) return std::nullopt;
  const auto& n = t.name;
  if (n == "<") return CmpOp::Lt;
  if (n == ">") return CmpOp::Gt;
  if (n == "=<") return CmpOp::Leq;
  if (n == ">=") return CmpOp::Geq;
  if (n == "=:=") return CmpOp::Eq;
  if (n == "=\\=") return CmpOp::Neq;
  if (n == "delta_interval") return CmpOp::DeltaInterval;
  return std::nullopt;
}

bool is_comparison(const Term& t) { return comparison_op(t).has_value(); }

const char* cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Gt: return ">";
    case CmpOp::Leq: return "=<";
    case CmpOp::Geq: return ">=";
    case CmpOp::Eq: return "=:=";
    case CmpOp::Neq: return "=\\=";
    case CmpOp::DeltaInterval: return "delta_interval";
  }
  return "?";
}

bool is_arith_functor(const Term& t) {
  if (!t.is_compound()) return false;
  const auto& n = t.name;
  if (t.args.size() == 2)
    return n == "+" || n == "-" || n == "*" || n == "/" || n == "max" || n == "min";
  if (t.args.size() == 1) return n == "-" || n == "abs";
  return false;
}

std::optional<DistKind> dist_kind(const Term& t) {
  if (!t.is_compound()) return std::nullopt;
  const auto& n = t.name;
  const auto k = t.args.size();
  if (n == "flip" && k == 1) return DistKind::Flip;
  if (n == "finite" && k == 1 && t.args[0].is_list()) return DistKind::Finite;
  if (n == "normal" && k == 2) return DistKind::Normal;
  if (n == "beta" && k == 2) return DistKind::Beta;
  if (n == "poisson" && k == 1) return DistKind::Poisson;
  if (n == "uniform" && k == 2) return DistKind::UniformCont;
  if (n == "uniform" && k == 1 && t.args[0].is_list()) return DistKind::UniformList;
  if (n == "delta" && k == 1) return DistKind::Delta;
  return std::nullopt;
}

bool is_dist_functor_name(const std::string& n) {
  return n == "flip" || n == "finite" || n == "normal" || n == "beta" || n == "poisson" ||
         n == "uniform" || n == "delta";
}

bool is_continuous(DistKind k) {
  return k == DistKind::Normal || k == DistKind::Beta || k == DistKind::UniformCont;
}

// ---------------------------------------------------------------- printing

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

bool plain_atom(const std::string& s) {
  if (s.empty() || !(s[0] >= 'a' && s[0] <= 'z')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::string atom_text(const std::string& s) {
  if (plain_atom(s)) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  return out + "'";
}

int binary_prec(const Term& t) {
  if (!t.is_compound() || t.args.size() != 2) return 0;
  if (is_comparison(t) && t.name != "delta_interval") return 700;
  const auto& n = t.name;
  if (n == "+" || n == "-") return 500;
  if (n == "*" || n == "/") return 400;
  if (n == ":") return 650;
  return 0;
}

int term_prec(const Term& t) {
  if (t.is_num()) {
    if (t.den != 0) return 400;
    return t.value < 0 ? 200 : 0;
  }
  if (int p = binary_prec(t)) return p;
  if (t.is_compound() && t.args.size() == 1 && t.name == "-") return 200;
  return 0;
}

std::string print(const Term& t, int max_prec);

std::string wrap(const Term& t, int max_prec) {
  std::string s = print(t, 1200);
  if (term_prec(t) > max_prec) return "(" + s + ")";
  return s;
}

std::string print(const Term& t, int) {
  switch (t.kind) {
    case Term::Kind::Var: return t.name;
    case Term::Kind::Const: return atom_text(t.name);
    case Term::Kind::Num: {
      if (t.den != 0) return std::to_string(t.num) + "/" + std::to_string(t.den);
      if (t.is_int) return std::to_string(t.num);
      std::string s = format_number(t.value);
      if (s.find_first_of(".en") == std::string::npos) s += ".0";
      return s;
    }
    case Term::Kind::List: {
      std::string s = "[";
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ",";
        s += wrap(t.args[i], 999);
      }
      return s + "]";
    }
    case Term::Kind::Compound: break;
  }
  if (int p = binary_prec(t)) {
    const bool xfy = t.name == ":";
    const bool xfx = p == 700;
    std::string l = wrap(t.args[0], xfx || xfy ? p - 1 : p);
    std::string r = wrap(t.args[1], xfy ? p : p - 1);
    if (!r.empty() && r[0] == '-' && (t.name == "-" || t.name == "+")) r = "(" + r + ")";
    return l + t.name + r;
  }
  if (t.args.size() == 1 && t.name == "-") {
    std::string r = wrap(t.args[0], 200);
    if (!r.empty() && r[0] == '-') r = "(" + r + ")";
    return "-" + r;
  }
  std::string s = atom_text(t.name) + "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) s += ",";
    s += wrap(t.args[i], 999);
  }
  return s + ")";
}

}  // namespace

std::string to_string(const Term& t) { return print(t, 1200); }

std::string to_string(const Literal& l) {
  return l.negated ? "not " + to_string(l.atom) : to_string(l.atom);
}

std::string to_string(const std::vector<Literal>& body) {
  std::string s;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (i) s += ", ";
    s += to_string(body[i]);
  }
  return s;
}

std::string to_string(const Statement& st) {
  std::string s;
  switch (st.kind) {
    case StmtKind::DistFact:
    case StmtKind::DistClause:
      s = wrap(st.head, 699) + " ~ " + wrap(st.dist, 699);
      break;
    case StmtKind::ProbFact:
    case StmtKind::AnnotatedDisjunction:
      for (std::size_t i = 0; i < st.choices.size(); ++i) {
        if (i) s += "; ";
        s += wrap(st.choices[i].prob, 699) + "::" + wrap(st.choices[i].atom, 699);
      }
      break;
    case StmtKind::NormalClause:
    case StmtKind::Fact:
      s = wrap(st.head, 699);
      break;
  }
  if (!st.body.empty()) s += " :- " + to_string(st.body);
  return s + ".";
}

std::string to_string(const Program& p) {
  std::string s;
  for (const auto& st : p.statements) s += to_string(st) + "\n";
  for (const auto& q : p.task.queries) s += "query(" + to_string(q) + ").\n";
  for (const auto& [a, v] : p.task.evidence)
    s += "evidence(" + to_string(a) + "," + (v ? "true" : "false") + ").\n";
  for (const auto& [t, v] : p.task.observations)
    s += "observation(" + to_string(t) + "," + to_string(make_num(v)) + ").\n";
  return s;
}

const char* diag_name(DiagKind k) {
  switch (k) {
    case DiagKind::ReservedHead: return "ReservedHead";
    case DiagKind::RangeRestriction: return "RangeRestriction";
    case DiagKind::UnknownDistribution: return "UnknownDistribution";
    case DiagKind::BadProbability: return "BadProbability";
    case DiagKind::MalformedObservation: return "MalformedObservation";
    case DiagKind::DomainWarning: return "DomainWarning";
    case DiagKind::Dc1Violation: return "Dc1Violation";
  }
  return "Diagnostic";
}

// ---------------------------------------------------------------- validation

namespace {

bool well_formed_prob(const Term& t) {
  if (t.is_num() || t.is_const()) return true;
  if (t.is_var()) return true;
  if (is_arith_functor(t))
    return std::all_of(t.args.begin(), t.args.end(), well_formed_prob);
  // Compound random terms are allowed as probability labels.
  return t.is_compound() && !is_comparison(t) && !dist_kind(t);
}

std::optional<double> const_value(const Term& t) {
  if (t.is_num()) return t.value;
  if (!is_arith_functor(t)) return std::nullopt;
  std::vector<double> xs;
  for (const auto& a : t.args) {
    auto v = const_value(a);
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

}  // namespace

std::vector<Diagnostic> validate_syntax(const Program& p) {
  std::vector<Diagnostic> out;
  auto reserved = [](const Term& h) {
    return (h.is_compound() && h.name == "rv" && h.args.size() == 2) || is_comparison(h) ||
           (h.is_compound() && is_dist_functor_name(h.name));
  };
  for (const auto& st : p.statements) {
    std::vector<std::string> head_vars;
    std::vector<std::string> body_vars;
    for (const auto& l : st.body) collect_vars(l.atom, body_vars);
    auto in_body = [&](const std::string& v) {
      return std::find(body_vars.begin(), body_vars.end(), v) != body_vars.end();
    };
    switch (st.kind) {
      case StmtKind::NormalClause:
      case StmtKind::Fact:
        if (reserved(st.head))
          out.push_back({DiagKind::ReservedHead, "reserved predicate in head: " + indicator(st.head), st.line});
        collect_vars(st.head, head_vars);
        break;
      case StmtKind::DistFact:
      case StmtKind::DistClause: {
        collect_vars(st.head, head_vars);
        collect_vars(st.dist, head_vars);
        if (!dist_kind(st.dist))
          out.push_back({DiagKind::UnknownDistribution, "unknown distribution: " + to_string(st.dist), st.line});
        break;
      }
      case StmtKind::ProbFact:
      case StmtKind::AnnotatedDisjunction: {
        double total = 0.0;
        bool all_const = true;
        for (const auto& c : st.choices) {
          if (reserved(c.atom))
            out.push_back({DiagKind::ReservedHead, "reserved predicate in head: " + indicator(c.atom), st.line});
          collect_vars(c.atom, head_vars);
          collect_vars(c.prob, head_vars);
          if (!well_formed_prob(c.prob)) {
            out.push_back({DiagKind::BadProbability, "malformed probability: " + to_string(c.prob), st.line});
            all_const = false;
            continue;
          }
          auto v = const_value(c.prob);
          if (!v) {
            all_const = false;
            continue;
          }
          if (*v < 0.0 || *v > 1.0) {
            out.push_back({DiagKind::BadProbability, "probability outside [0,1]: " + to_string(c.prob), st.line});
            all_const = false;
          }
          total += *v;
        }
        if (all_const && total > 1.0 + 1e-9)
          out.push_back({DiagKind::BadProbability, "annotated disjunction sums to more than 1", st.line});
        break;
      }
    }
    for (const auto& v : head_vars) {
      if (v.rfind("_G", 0) == 0) continue;
      if (!in_body(v)) {
        out.push_back({DiagKind::RangeRestriction, "variable " + v + " does not occur in the body", st.line});
        break;
      }
    }
  }
  for (const auto& [t, v] : p.task.observations) {
    if (!is_ground(t) || t.is_num() || is_arith_functor(t))
      out.push_back({DiagKind::MalformedObservation, "observation must name a random term: " + to_string(t), 0});
  }
  return out;
}

}  // namespace dcplp
