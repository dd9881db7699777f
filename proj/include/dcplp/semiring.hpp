#pragma once

#include <string>

namespace dcplp {

// r * eps^order
struct InfNum {
  double real = 0.0;
  int order = 0;

  bool operator==(const InfNum& o) const { return real == o.real && order == o.order; }
  bool operator!=(const InfNum& o) const { return !(*this == o); }
};

inline constexpr InfNum kZero{0.0, 0};
inline constexpr InfNum kOne{1.0, 0};

InfNum inf_add(InfNum a, InfNum b);
InfNum inf_mul(InfNum a, InfNum b);
InfNum inf_neg(InfNum a);
InfNum inf_inv(InfNum a);
InfNum inf_sub(InfNum a, InfNum b);
InfNum inf_div(InfNum a, InfNum b);

// Equality treating every value with a zero real part as the same zero.
bool inf_equivalent(InfNum a, InfNum b, double tol = 0.0);

std::string to_string(InfNum a);

}  // namespace dcplp
