#include "dcplp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dcplp/error.hpp"

namespace dcplp {

std::uint64_t Rng::operator()() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t sample, std::uint64_t var) {
  Rng a(base);
  std::uint64_t h = a();
  Rng b(h ^ (sample * 0xd1b54a32d192ed03ULL));
  h = b();
  Rng c(h ^ (var * 0x8cb92ba72f3d8dd7ULL));
  return c();
}

// ---------------------------------------------------------------- expressions

double Expr::eval(const std::vector<double>& values) const {
  double stack[64] = {};
  std::vector<double> big;
  double* st = stack;
  if (code.size() > 64) {
    big.resize(code.size());
    st = big.data();
  }
  int sp = 0;
  for (const auto& ins : code) {
    switch (ins.op) {
      case Op::Num: st[sp++] = ins.num; break;
      case Op::Var: st[sp++] = values[ins.var]; break;
      case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Op::Abs: st[sp - 1] = std::fabs(st[sp - 1]); break;
      default: {
        double y = st[--sp];
        double& x = st[sp - 1];
        switch (ins.op) {
          case Op::Add: x += y; break;
          case Op::Sub: x -= y; break;
          case Op::Mul: x *= y; break;
          case Op::Div: x /= y; break;
          case Op::Max: x = std::max(x, y); break;
          case Op::Min: x = std::min(x, y); break;
          default: break;
        }
      }
    }
  }
  return st[0];
}

bool Expr::constant() const {
  return std::none_of(code.begin(), code.end(), [](const Ins& i) { return i.op == Op::Var; });
}

std::vector<int> Expr::vars() const {
  std::vector<int> out;
  for (const auto& i : code)
    if (i.op == Op::Var && std::find(out.begin(), out.end(), i.var) == out.end()) out.push_back(i.var);
  return out;
}

namespace {

void emit(const Term& t, const CoreProgram& p, Expr& e) {
  using Op = Expr::Op;
  if (t.is_num()) {
    e.code.push_back({Op::Num, t.value, -1});
    return;
  }
  if (t.is_const()) {
    int v = p.find_var(t.name);
    if (v >= 0) {
      e.code.push_back({Op::Var, 0.0, v});
      return;
    }
    if (auto id = p.interns.lookup(t.name)) {
      e.code.push_back({Op::Num, *id, -1});
      return;
    }
    throw Error(Errc::UnknownRandomTerm, "unknown term " + t.name + " in arithmetic expression");
  }
  if (is_arith_functor(t)) {
    for (const auto& a : t.args) emit(a, p, e);
    const auto& n = t.name;
    if (t.args.size() == 1) e.code.push_back({n == "-" ? Op::Neg : Op::Abs, 0.0, -1});
    else if (n == "+") e.code.push_back({Op::Add, 0.0, -1});
    else if (n == "-") e.code.push_back({Op::Sub, 0.0, -1});
    else if (n == "*") e.code.push_back({Op::Mul, 0.0, -1});
    else if (n == "/") e.code.push_back({Op::Div, 0.0, -1});
    else if (n == "max") e.code.push_back({Op::Max, 0.0, -1});
    else e.code.push_back({Op::Min, 0.0, -1});
    return;
  }
  if (auto id = p.interns.lookup(to_string(t))) {
    e.code.push_back({Op::Num, *id, -1});
    return;
  }
  throw Error(Errc::UnknownRandomTerm, "cannot evaluate " + to_string(t));
}

}  // namespace

Expr compile_expr(const Term& t, const CoreProgram& p) {
  Expr e;
  emit(t, p, e);
  return e;
}

bool CmpExpr::eval(const std::vector<double>& values) const {
  double x = lhs.eval(values);
  double y = rhs.eval(values);
  if (std::isnan(x) || std::isnan(y)) return false;
  switch (op) {
    case CmpOp::Lt: return x < y;
    case CmpOp::Gt: return x > y;
    case CmpOp::Leq: return x <= y;
    case CmpOp::Geq: return x >= y;
    case CmpOp::Eq: return x == y;
    case CmpOp::Neq: return x != y;
    case CmpOp::DeltaInterval: return x == y;
  }
  return false;
}

std::vector<int> CmpExpr::vars() const {
  std::vector<int> out = lhs.vars();
  for (int v : rhs.vars())
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

CmpExpr compile_cmp(const Term& t, const CoreProgram& p) {
  auto op = comparison_op(t);
  if (!op) throw Error(Errc::UnknownRandomTerm, to_string(t) + " is not a comparison");
  CmpExpr c;
  c.op = *op;
  c.lhs = compile_expr(t.args[0], p);
  c.rhs = compile_expr(t.args[1], p);
  return c;
}

// ---------------------------------------------------------------- distributions

DistSpec compile_dist(const Term& dist, const CoreProgram& p) {
  auto k = dist_kind(dist);
  if (!k) throw Error(Errc::InvalidParameter, "unknown distribution " + to_string(dist));
  DistSpec d;
  d.kind = *k;
  auto value_of = [&](const Term& t) {
    Expr e = compile_expr(t, p);
    if (!e.constant()) throw Error(Errc::InvalidParameter, "sample-space value must be constant in " + to_string(dist));
    return e.eval({});
  };
  switch (*k) {
    case DistKind::Finite:
      for (const auto& item : dist.args[0].args) {
        if (item.is_compound() && item.name == ":" && item.args.size() == 2) {
          d.params.push_back(compile_expr(item.args[0], p));
          d.values.push_back(value_of(item.args[1]));
        } else {
          throw Error(Errc::InvalidParameter, "finite outcome must have the form p:v in " + to_string(dist));
        }
      }
      break;
    case DistKind::UniformList:
      for (const auto& item : dist.args[0].args) d.values.push_back(value_of(item));
      break;
    default:
      for (const auto& a : dist.args) d.params.push_back(compile_expr(a, p));
  }
  return d;
}

namespace {

[[noreturn]] void bad_param(const std::string& name, const std::string& what) {
  throw Error(Errc::InvalidParameter, (name.empty() ? std::string("distribution") : name) + ": " + what);
}

}  // namespace

DistInstance instantiate(const DistSpec& d, const std::vector<double>& values, const std::string& name) {
  DistInstance out;
  out.kind = d.kind;
  std::vector<double> ps;
  for (const auto& e : d.params) ps.push_back(e.eval(values));
  auto finite_all = [&] {
    return std::all_of(ps.begin(), ps.end(), [](double x) { return std::isfinite(x); });
  };
  switch (d.kind) {
    case DistKind::Flip:
      if (!finite_all() || ps[0] < -1e-12 || ps[0] > 1 + 1e-12) bad_param(name, "flip probability outside [0,1]");
      out.a = std::clamp(ps[0], 0.0, 1.0);
      break;
    case DistKind::Finite: {
      double total = 0.0;
      for (double q : ps) {
        if (!std::isfinite(q) || q < -1e-12) bad_param(name, "negative or undefined outcome probability");
        total += q;
      }
      if (total > 1.0 + 1e-9) bad_param(name, "outcome probabilities sum to more than 1");
      for (double& q : ps) q = std::max(q, 0.0);
      out.probs = ps;
      out.values = d.values;
      break;
    }
    case DistKind::UniformList:
      if (d.values.empty()) bad_param(name, "empty sample space");
      out.values = d.values;
      out.probs.assign(d.values.size(), 1.0 / static_cast<double>(d.values.size()));
      break;
    case DistKind::Normal:
      if (!finite_all() || ps[1] <= 0) bad_param(name, "normal needs a finite mean and a positive standard deviation");
      out.a = ps[0];
      out.b = ps[1];
      break;
    case DistKind::Beta:
      if (!finite_all() || ps[0] <= 0 || ps[1] <= 0) bad_param(name, "beta shape parameters must be positive");
      out.a = ps[0];
      out.b = ps[1];
      break;
    case DistKind::Poisson:
      if (!finite_all() || ps[0] < 0) bad_param(name, "poisson rate must be non-negative");
      out.a = ps[0];
      break;
    case DistKind::UniformCont:
      if (!finite_all() || !(ps[0] < ps[1])) bad_param(name, "uniform bounds must satisfy lo < hi");
      out.a = ps[0];
      out.b = ps[1];
      break;
    case DistKind::Delta:
      out.a = ps[0];
      break;
  }
  return out;
}

double density(const DistInstance& d, double x) {
  if (std::isnan(x)) return 0.0;
  switch (d.kind) {
    case DistKind::Flip:
      if (x == 1.0) return d.a;
      if (x == 0.0) return 1.0 - d.a;
      return 0.0;
    case DistKind::Finite:
    case DistKind::UniformList: {
      double s = 0.0;
      for (std::size_t i = 0; i < d.values.size(); ++i)
        if (d.values[i] == x) s += d.probs[i];
      return s;
    }
    case DistKind::Normal: {
      double z = (x - d.a) / d.b;
      return std::exp(-0.5 * z * z) / (d.b * std::sqrt(2.0 * M_PI));
    }
    case DistKind::Beta: {
      if (x < 0.0 || x > 1.0) return 0.0;
      double norm = d.a + d.b < 170.0 ? std::tgamma(d.a + d.b) / (std::tgamma(d.a) * std::tgamma(d.b))
                                       : std::exp(std::lgamma(d.a + d.b) - std::lgamma(d.a) - std::lgamma(d.b));
      return norm * std::pow(x, d.a - 1.0) * std::pow(1.0 - x, d.b - 1.0);
    }
    case DistKind::Poisson: {
      if (x < 0.0 || x != std::floor(x)) return 0.0;
      if (d.a == 0.0) return x == 0.0 ? 1.0 : 0.0;
      return std::exp(x * std::log(d.a) - d.a - std::lgamma(x + 1.0));
    }
    case DistKind::UniformCont:
      return x >= d.a && x <= d.b ? 1.0 / (d.b - d.a) : 0.0;
    case DistKind::Delta:
      return x == d.a ? 1.0 : 0.0;
  }
  return 0.0;
}

double draw(const DistInstance& d, Rng& rng) {
  switch (d.kind) {
    case DistKind::Flip:
      return rng.uniform01() < d.a ? 1.0 : 0.0;
    case DistKind::Finite: {
      double u = rng.uniform01();
      double acc = 0.0;
      for (std::size_t i = 0; i < d.probs.size(); ++i) {
        acc += d.probs[i];
        if (u < acc) return d.values[i];
      }
      return kUnset;
    }
    case DistKind::UniformList: {
      auto i = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(d.values.size()));
      return d.values[std::min(i, d.values.size() - 1)];
    }
    case DistKind::Normal:
      return std::normal_distribution<double>(d.a, d.b)(rng);
    case DistKind::Beta: {
      double x = std::gamma_distribution<double>(d.a, 1.0)(rng);
      double y = std::gamma_distribution<double>(d.b, 1.0)(rng);
      return x / (x + y);
    }
    case DistKind::Poisson:
      if (d.a == 0.0) return 0.0;
      return static_cast<double>(std::poisson_distribution<long long>(d.a)(rng));
    case DistKind::UniformCont:
      return std::uniform_real_distribution<double>(d.a, d.b)(rng);
    case DistKind::Delta:
      return d.a;
  }
  return kUnset;
}

bool has_finite_support(DistKind k) {
  return k == DistKind::Flip || k == DistKind::Finite || k == DistKind::UniformList || k == DistKind::Delta;
}

std::vector<std::pair<double, double>> finite_outcomes(const DistInstance& d) {
  std::vector<std::pair<double, double>> out;
  switch (d.kind) {
    case DistKind::Flip:
      out = {{1.0, d.a}, {0.0, 1.0 - d.a}};
      break;
    case DistKind::Finite:
    case DistKind::UniformList: {
      double total = 0.0;
      for (std::size_t i = 0; i < d.values.size(); ++i) {
        out.emplace_back(d.values[i], d.probs[i]);
        total += d.probs[i];
      }
      if (1.0 - total > 1e-12) out.emplace_back(kUnset, 1.0 - total);
      break;
    }
    case DistKind::Delta:
      out = {{d.a, 1.0}};
      break;
    default:
      throw Error(Errc::NotFinitelyEnumerable, "distribution has no finite support");
  }
  return out;
}

// ---------------------------------------------------------------- model

ProbModel compile_model(const CoreProgram& p, const DependencyGraph& g) {
  ProbModel m;
  for (const auto& v : p.vars) {
    m.names.push_back(v.name);
    m.dists.push_back(compile_dist(v.dist, p));
  }
  m.parents = g.parents;
  m.topo = g.topo;
  return m;
}

std::vector<int> ancestral_closure(const ProbModel& m, const std::vector<int>& roots) {
  std::vector<char> mark(m.dists.size(), 0);
  std::vector<int> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (mark[v]) continue;
    mark[v] = 1;
    for (int par : m.parents[v]) stack.push_back(par);
  }
  std::vector<int> out;
  for (int v : m.topo)
    if (mark[v]) out.push_back(v);
  return out;
}

std::map<int, double> forced_assignments(const PropFormula& f, const CoreProgram& p) {
  std::map<int, double> out;
  for (const auto& v : f.table->vars) {
    if (v.kind != VarKind::Comparison || comparison_op(v.atom) != CmpOp::DeltaInterval) continue;
    const Term& lhs = v.atom.args[0];
    const Term& rhs = v.atom.args[1];
    int rv = lhs.is_const() ? p.find_var(lhs.name) : -1;
    if (rv < 0 || !rhs.is_num())
      throw Error(Errc::MalformedObservation, "observation must pin a random variable to a number: " + to_string(v.atom));
    auto k = dist_kind(p.vars[rv].dist);
    if (!k || !is_continuous(*k)) continue;
    auto [it, inserted] = out.emplace(rv, rhs.value);
    if (!inserted && it->second != rhs.value)
      throw Error(Errc::ImpossibleObservation, p.vars[rv].name + " is observed with two different values");
  }
  return out;
}

Sampler::Sampler(const ProbModel& m, std::vector<int> vars, std::map<int, double> forced, std::uint64_t seed)
    : model_(&m), vars_(std::move(vars)), forced_(std::move(forced)), seed_(seed) {}

void Sampler::draw(std::uint64_t index, std::vector<double>& values) const {
  for (int v : vars_) {
    auto f = forced_.find(v);
    if (f != forced_.end()) {
      values[v] = f->second;
      continue;
    }
    DistInstance d = instantiate(model_->dists[v], values, model_->names[v]);
    Rng rng(stream_seed(seed_, index, static_cast<std::uint64_t>(v)));
    values[v] = dcplp::draw(d, rng);
  }
}

std::vector<double> Sampler::draw(std::uint64_t index) const {
  std::vector<double> values(model_->dists.size(), kUnset);
  draw(index, values);
  return values;
}

}  // namespace dcplp
