#pragma once

#include "padelab/pade.hpp"

namespace padelab {

// Coefficients of a h y'' + (A' h - A h' + B h) y' - n(n+1) D y, the
// differential identity satisfied by y = Q_n with h monic linear and D monic
// quadratic.
ComplexPoly ode_identity(const ComplexPoly& A, const ComplexPoly& B, const ComplexPoly& y, int n,
                         const ComplexPoly& h, const ComplexPoly& D);

struct OdeExtraction {
  int n = 0;
  Complex z1n;                    // zero of h_n
  std::array<Complex, 3> D_coeffs;  // ascending, monic
  Real residual{0};  // max identity coefficient over the largest right-hand-side coefficient
  Complex v1n, htilde_zero;  // roots of D_n, v1n nearer to v
  ComplexPoly h() const;
  ComplexPoly D() const;
};

// Least-squares fit of (z_1n, D_n) from the polynomial y = Q_n of degree n.
// Throws RankDeficient when the system is singular.
OdeExtraction extract(const ComplexPoly& A, const ComplexPoly& B, const ComplexPoly& y, int n, const Complex& v,
                      const PrecisionPolicy& policy);
OdeExtraction extract(const PadeTriple& t, const BranchConfig& cfg, const Complex& v, const PrecisionPolicy& policy);

// Closed loop at constant distance around the segment [a_i, a_j]. The radius
// is 0.3 diam, reduced until every point of `avoid` lies outside and the
// `cluster` lies wholly inside or outside, each at least 0.05 diam from the
// loop (0.01 diam if nothing else fits). Counterclockwise.
std::vector<Complex> stadium_vertices(const Complex& ai, const Complex& aj, const std::vector<Complex>& avoid,
                                      const std::vector<Complex>& cluster, double diam);

// Integral of prod (t - p_k)^{e_k} dt (e_k = +-1/2) around a closed polygon,
// branch continued from the principal one at the first vertex.
Complex sqrt_period(const std::vector<Complex>& zeros, const std::vector<Complex>& poles,
                    const std::vector<Complex>& vertices, const PrecisionPolicy& policy);

struct SineCheck {
  Complex integral;  // N times the loop integral of sqrt(D_n / (A h_n))
  Complex target;    // log(sin pi alpha_i / sin pi alpha_j)
  bool pair_enclosed = false;  // z_1n and the zero of h~_n were cut out by a keyhole
  Real deviation;    // distance mod 2 pi i and sign
  int sign = 1;      // sign of the target realising the deviation
};

Real distance_mod_2pi_i(const Complex& x, const Complex& target, int* sign = nullptr);

// Sine-formula period check on the loop around {a_i, a_j} (0-based indices).
SineCheck sine_formula_check(const OdeExtraction& e, const BranchConfig& cfg, int i, int j, double diam,
                             const PrecisionPolicy& policy);
// Same on a caller-supplied closed polygon enclosing a_i and a_j.
SineCheck sine_formula_check(const OdeExtraction& e, const BranchConfig& cfg, int i, int j,
                             const std::vector<Complex>& vertices, double diam, const PrecisionPolicy& policy);

}  // namespace padelab
