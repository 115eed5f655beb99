#include <algorithm>

#include "padelab/poly.hpp"

namespace padelab {

std::vector<Complex> poly_roots(const ComplexPoly& p, const PrecisionPolicy& policy) {
  const int n = p.degree();
  if (n < 1) throw std::invalid_argument("poly_roots: degree must be at least 1");
  const auto& a = p.coeffs();
  if (n == 1) return {-a[0] / a[1]};

  // Start on a circle around the centroid sized by the Fujiwara-type bound.
  Complex centre = -a[n - 1] / (a[n] * Real(n));
  Real radius = 0;
  for (int k = 1; k <= n; ++k) {
    Real r = pow(Real(abs(a[n - k] / a[n])), Real(1) / Real(k));
    radius = std::max(radius, r);
  }
  radius = std::max(Real(radius / 2), Real(abs(centre) * Real(1e-3) + Real(1e-3)));

  std::vector<Complex> z(n);
  for (int k = 0; k < n; ++k) {
    Real ang = 2 * pi() * Real(k) / Real(n) + Real(0.4);
    z[k] = centre + Complex(cos(ang), sin(ang)) * radius;
  }

  const Real eps = pow10(-policy.decimal_digits);
  std::vector<Real> absc(n + 1);
  for (int k = 0; k <= n; ++k) absc[k] = abs(a[k]);
  std::vector<bool> done(n, false);

  for (int sweep = 0; sweep < policy.max_iter * 5; ++sweep) {
    bool all = true;
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      Complex pv, dv;
      p.eval_with_derivative(z[i], pv, dv);
      // Horner error bound: once |p| is at rounding level the iterate is final.
      Real az = abs(z[i]);
      Real bound = 0;
      for (int k = n; k >= 0; --k) bound = bound * az + absc[k];
      if (abs(pv) <= Real(8 * (n + 1)) * eps * bound) {
        done[i] = true;
        continue;
      }
      Complex ratio = pv / dv;
      Complex s(0);
      for (int j = 0; j < n; ++j)
        if (j != i) s += Complex(1) / (z[i] - z[j]);
      Complex w = ratio / (Complex(1) - ratio * s);
      z[i] -= w;
      if (abs(w) <= policy.newton_tol * std::max(Real(1), az))
        done[i] = true;
      else
        all = false;
    }
    if (all) return z;
  }
  throw NonConvergence("poly_roots: Aberth iteration did not converge");
}

}  // namespace padelab
