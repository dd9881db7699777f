#include "dcplp/semiring.hpp"

#include <cmath>
#include <limits>

#include "dcplp/ast.hpp"
#include "dcplp/error.hpp"

namespace dcplp {

namespace {

int add_orders(int a, int b) {
  int r = 0;
  if (__builtin_add_overflow(a, b, &r)) throw Error(Errc::OrderOverflow, "infinitesimal order overflow");
  return r;
}

}  // namespace

InfNum inf_add(InfNum a, InfNum b) {
  // An exact zero carries no mass at any order.
  if (a.real == 0.0 && b.real != 0.0) return b;
  if (b.real == 0.0 && a.real != 0.0) return a;
  if (a.order == b.order) return {a.real + b.real, a.order};
  return a.order < b.order ? a : b;
}

InfNum inf_mul(InfNum a, InfNum b) { return {a.real * b.real, add_orders(a.order, b.order)}; }

InfNum inf_neg(InfNum a) { return {-a.real, a.order}; }

InfNum inf_inv(InfNum a) {
  if (a.real == 0.0) throw Error(Errc::DivisionByZeroInfNum, "reciprocal of an infinitesimal number with zero real part");
  if (a.order == std::numeric_limits<int>::min()) throw Error(Errc::OrderOverflow, "infinitesimal order overflow");
  return {1.0 / a.real, -a.order};
}

InfNum inf_sub(InfNum a, InfNum b) { return inf_add(a, inf_neg(b)); }

InfNum inf_div(InfNum a, InfNum b) {
  InfNum r = inf_inv(b);
  return {a.real / b.real, add_orders(a.order, r.order)};
}

bool inf_equivalent(InfNum a, InfNum b, double tol) {
  if (a.real == 0.0 && b.real == 0.0) return true;
  if (a.order != b.order) return false;
  return std::fabs(a.real - b.real) <= tol * std::max(1.0, std::max(std::fabs(a.real), std::fabs(b.real)));
}

std::string to_string(InfNum a) { return "(" + format_number(a.real) + "," + std::to_string(a.order) + ")"; }

}  // namespace dcplp
