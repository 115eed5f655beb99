#pragma once

#include "padelab/algebraic_function.hpp"
#include "padelab/geometry.hpp"

namespace padelab {

struct PadeTriple {
  int n = 0;
  ComplexPoly Q;  // monic
  ComplexPoly P;
  std::vector<Complex> remainder_coeffs;  // coefficients of z^{-n-1}, z^{-n-2}, ... of Q f - P
  bool normal = true;
  Real pivot_ratio = 1;  // smallest pivot relative to the Hankel matrix norm (conditioning estimate)
};

// Denominator and numerator from the Hankel system. `taylor` holds f_0..f_K
// with K >= 2n + extra; `extra` remainder coefficients are kept.
PadeTriple frobenius_solve(std::span<const Complex> taylor, int n, const PrecisionPolicy& policy, int extra = 4);
PadeTriple frobenius_solve(const BranchConfig& cfg, int n, const PrecisionPolicy& policy, int extra = 4);

// Max over m = 1..n of |[z^{-m}](Q f - P)| relative to sum_j |q_j f_{j+m}|,
// together with the mismatch of P against the polynomial part of Q f.
Real contact_residual(const PadeTriple& t, std::span<const Complex> taylor);

// Integration data for the weight rho on the star: Gauss nodes carrying
// rho(t) dt, refined until moments up to degree `max_degree` are stable.
struct RhoNodes {
  NodeSet nodes;
  Real stability;  // relative change of the moments at the last refinement
};
RhoNodes rho_nodes(const BranchConfig& cfg, const CutSystem& cut, int max_degree, const PrecisionPolicy& policy);

// Endpoint substitution power for a branch point with exponent alpha.
int endpoint_power(const Rational& alpha);

// max_k |int t^k Q rho| / int |t^k Q rho| for k = 0..n-1.
Real check_orthogonality(const PadeTriple& t, const BranchConfig& cfg, const CutSystem& cut,
                         const PrecisionPolicy& policy);

// Remainder as a Cauchy transform of Q rho over the cut.
Complex eval_remainder(const PadeTriple& t, const BranchConfig& cfg, const CutSystem& cut, const Complex& z,
                       const PrecisionPolicy& policy);
// Q f - P evaluated directly.
Complex direct_remainder(const PadeTriple& t, const BranchConfig& cfg, const CutSystem& cut, const Complex& z);

struct ClassifiedZero {
  Complex z;
  double distance;  // to the cut
  int arc;          // 0-based arc index, or -1 for a spurious zero
};

struct ZeroReport {
  std::vector<ClassifiedZero> zeros;
  double epsilon = 0;
  std::array<int, 3> per_arc{0, 0, 0};
  int spurious = 0;
};

ZeroReport classify_zeros(const std::vector<Complex>& zeros, const CutSystem& cut, double epsilon);
ZeroReport classify_zeros(const PadeTriple& t, const CutSystem& cut, double epsilon, const PrecisionPolicy& policy);
double default_spurious_epsilon(const CutSystem& cut);

}  // namespace padelab
