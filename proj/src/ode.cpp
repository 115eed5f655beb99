#include "padelab/ode.hpp"

#include <algorithm>

#include "padelab/linalg.hpp"
#include "padelab/quadrature.hpp"

namespace padelab {

namespace {

ComplexPoly X() { return ComplexPoly::monomial(1); }

Real max_abs(const ComplexPoly& p) {
  Real m = 0;
  for (const auto& c : p.coeffs()) m = std::max(m, Real(abs(c)));
  return m;
}

}  // namespace

ComplexPoly OdeExtraction::h() const { return ComplexPoly({-z1n, Complex(1)}); }
ComplexPoly OdeExtraction::D() const { return ComplexPoly({D_coeffs[0], D_coeffs[1], D_coeffs[2]}); }

ComplexPoly ode_identity(const ComplexPoly& A, const ComplexPoly& B, const ComplexPoly& y, int n,
                         const ComplexPoly& h, const ComplexPoly& D) {
  ComplexPoly dA = A.derivative(), dy = y.derivative(), d2y = dy.derivative();
  Complex N2(Real(n) * (n + 1));
  return A * h * d2y + (dA * h - A * h.derivative() + B * h) * dy - D * y * N2;
}

OdeExtraction extract(const ComplexPoly& A, const ComplexPoly& B, const ComplexPoly& y, int n, const Complex& v,
                      const PrecisionPolicy& policy) {
  if (n < 2 || y.degree() != n) throw std::invalid_argument("extract: need deg y = n >= 2");
  ScopedPrecision sp(policy);
  Complex N2(Real(n) * (n + 1));
  ComplexPoly dA = A.derivative(), dy = y.derivative(), d2y = dy.derivative();
  // identity = rhs0 + z1 c1 + d1 c2 + d0 c3 with h = z - z1, D = z^2 + d1 z + d0
  ComplexPoly c1 = (A * d2y + (dA + B) * dy) * Complex(-1);
  ComplexPoly c2 = X() * y * (-N2);
  ComplexPoly c3 = y * (-N2);
  ComplexPoly rhs0 = A * X() * d2y + (dA * X() - A + B * X()) * dy - X() * X() * y * N2;

  const std::size_t rows = static_cast<std::size_t>(n) + 3;
  CMatrix M(rows, 3);
  std::vector<Complex> b(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    Complex row[3] = {c1.coeff(k), c2.coeff(k), c3.coeff(k)};
    Real scale = abs(rhs0.coeff(k));
    for (const auto& c : row) scale = std::max(scale, Real(abs(c)));
    if (scale == 0) scale = 1;
    for (int j = 0; j < 3; ++j) M(k, j) = row[j] / scale;
    b[k] = -rhs0.coeff(k) / scale;
  }
  auto ls = least_squares(M, b, policy.decimal_digits);

  OdeExtraction e;
  e.n = n;
  e.z1n = ls.x[0];
  e.D_coeffs = {ls.x[2], ls.x[1], Complex(1)};
  Real big = std::max({max_abs(rhs0), max_abs(c1 * e.z1n), max_abs(c2 * ls.x[1]), max_abs(c3 * ls.x[2])});
  e.residual = max_abs(ode_identity(A, B, y, n, e.h(), e.D())) / big;
  auto r = poly_roots(e.D(), policy);
  if (abs(r[1] - v) < abs(r[0] - v)) std::swap(r[0], r[1]);
  e.v1n = r[0];
  e.htilde_zero = r[1];
  return e;
}

OdeExtraction extract(const PadeTriple& t, const BranchConfig& cfg, const Complex& v, const PrecisionPolicy& policy) {
  if (!t.normal) throw RankDeficient("extract: index is not normal");
  if (cfg.p() != 3) throw std::invalid_argument("extract: three branch points required");
  ScopedPrecision sp(policy);
  return extract(poly_A(cfg), poly_B(cfg), t.Q, t.n, promote(v), policy);
}

std::vector<Complex> stadium_vertices(const Complex& ai, const Complex& aj, const std::vector<Complex>& avoid,
                                      const std::vector<Complex>& cluster, double diam) {
  // largest radius, scanning down from 0.3 diam, that keeps every avoided
  // point outside and the cluster wholly inside or outside
  std::vector<double> da, dc;
  for (const auto& p : avoid) da.push_back(to_d(dist_segment(p, ai, aj)));
  for (const auto& p : cluster) dc.push_back(to_d(dist_segment(p, ai, aj)));
  double r = -1;
  for (double margin : {0.05 * diam, 0.01 * diam}) {
    for (double rr = 0.3 * diam; rr >= 0.02 * diam && r < 0; rr -= 0.0025 * diam) {
      bool ok = true;
      for (double d : da) ok = ok && d > rr + margin;
      bool all_in = true, all_out = true;
      for (double d : dc) {
        all_in = all_in && d < rr - margin;
        all_out = all_out && d > rr + margin;
      }
      if (ok && (all_in || all_out)) r = rr;
    }
    if (r > 0) break;
  }
  if (r < 0) throw CycleThroughSingularity("stadium: no admissible radius around the pair");
  Complex d = aj - ai;
  d /= Real(abs(d));
  const int per_cap = 48, per_side = 48;
  std::vector<Complex> out;
  // right side from ai to aj, cap around aj, left side back, cap around ai
  Complex nrm = -I() * d * Real(r);
  for (int k = 0; k < per_side; ++k) out.push_back(ai + nrm + (aj - ai) * Real(k) / Real(per_side));
  for (int k = 0; k < per_cap; ++k) {
    Real th = -pi() / 2 + pi() * k / per_cap;
    out.push_back(aj + d * Complex(cos(th), sin(th)) * Real(r));
  }
  for (int k = 0; k < per_side; ++k) out.push_back(aj - nrm + (ai - aj) * Real(k) / Real(per_side));
  for (int k = 0; k < per_cap; ++k) {
    Real th = pi() / 2 + pi() * k / per_cap;
    out.push_back(ai + d * Complex(cos(th), sin(th)) * Real(r));
  }
  return out;
}

Complex sqrt_period(const std::vector<Complex>& zeros, const std::vector<Complex>& poles,
                    const std::vector<Complex>& vertices, const PrecisionPolicy& policy) {
  ScopedPrecision sp(policy);
  std::vector<Complex> centres;
  std::vector<Real> exps;
  for (const auto& z : zeros) {
    centres.push_back(promote(z));
    exps.push_back(Real(0.5));
  }
  for (const auto& p : poles) {
    centres.push_back(promote(p));
    exps.push_back(Real(-0.5));
  }
  std::vector<Complex> verts(vertices.begin(), vertices.end());
  for (auto& v : verts) v = promote(v);
  verts.push_back(verts.front());
  std::vector<Complex> logs;
  for (const auto& c : centres) logs.push_back(principal_log(verts.front() - c));
  Contour c = Contour::polyline(centres, verts, 0, logs);
  c.set_closed(true);
  auto g = [&](const Complex&, std::span<const Complex> l) { return power_product(l, exps); };
  return integrate(LogIntegrand(g), c, policy);
}

Real distance_mod_2pi_i(const Complex& x, const Complex& target, int* sign) {
  Real best = -1;
  const Real period = 2 * pi();
  for (int s : {1, -1}) {
    Complex d = x - target * Real(s);
    Real im = d.imag() - period * floor(d.imag() / period + Real(0.5));
    Real dist = sqrt(d.real() * d.real() + im * im);
    if (best < 0 || dist < best) {
      best = dist;
      if (sign) *sign = s;
    }
  }
  return best;
}

namespace {

// Inserts a spoke and a clockwise circle around the pair {p, q} at the loop
// vertex with the shortest spoke that clears the other singular points.
std::vector<Complex> with_keyhole(const std::vector<Complex>& verts, const Complex& p, const Complex& q,
                                  const std::vector<Complex>& others, double diam) {
  Complex c = (p + q) / Real(2);
  Real rho = Real(0.75) * abs(p - q);
  for (const auto& o : others) rho = std::min(rho, Real(abs(o - c)) / 2);
  if (rho <= Real(abs(p - q)) / 2) throw CycleThroughSingularity("sine check: keyhole would touch another point");
  std::size_t best = verts.size();
  Real best_len = 0;
  for (std::size_t m = 0; m < verts.size(); ++m) {
    Real len = abs(verts[m] - c);
    Complex tip = c + (verts[m] - c) * (rho / len);
    bool clear = true;
    for (const auto& o : others) clear = clear && dist_segment(o, verts[m], tip) > Real(0.01 * diam);
    if (clear && (best == verts.size() || len < best_len)) {
      best = m;
      best_len = len;
    }
  }
  if (best == verts.size()) throw CycleThroughSingularity("sine check: no admissible keyhole spoke");
  const int sides = 32;
  Complex u = (verts[best] - c) / best_len;
  std::vector<Complex> out(verts.begin(), verts.begin() + best + 1);
  for (int k = 0; k <= sides; ++k) {
    Real th = -2 * pi() * k / sides;
    out.push_back(c + u * Complex(cos(th), sin(th)) * rho);
  }
  out.insert(out.end(), verts.begin() + best, verts.end());
  return out;
}

}  // namespace

SineCheck sine_formula_check(const OdeExtraction& e, const BranchConfig& cfg, int i, int j,
                             const std::vector<Complex>& vertices, double diam, const PrecisionPolicy& policy) {
  ScopedPrecision sp(policy);
  auto pts = cfg.points();
  std::vector<Complex> zeros{e.v1n, e.htilde_zero};
  std::vector<Complex> poles{pts[0], pts[1], pts[2], e.z1n};
  // the loop must separate {a_i, a_j} from a_k and v_1n; z_1n and the zero
  // of h~_n may be enclosed together, and are then cut out by a keyhole
  auto inside = [&](const Complex& z) {
    Real d = 1e300;
    for (std::size_t m = 0; m < vertices.size(); ++m)
      d = std::min(d, dist_segment(z, vertices[m], vertices[(m + 1) % vertices.size()]));
    if (d < Real(1e-3 * diam)) throw CycleThroughSingularity("sine check: loop passes through a singular point");
    double w = 0;
    DPoint p = to_cd(z);
    for (std::size_t m = 0; m < vertices.size(); ++m)
      w += std::arg((to_cd(vertices[(m + 1) % vertices.size()]) - p) / (to_cd(vertices[m]) - p));
    return std::abs(w) > M_PI;
  };
  for (int k = 0; k < 3; ++k)
    if (inside(pts[k]) != (k == i || k == j))
      throw CycleThroughSingularity("sine check: loop must enclose exactly the chosen pair");
  if (inside(e.v1n)) throw CycleThroughSingularity("sine check: loop encloses v_1n");
  bool pair_inside = inside(e.z1n);
  if (pair_inside != inside(e.htilde_zero))
    throw CycleThroughSingularity("sine check: loop separates z_1n from the zero of h~_n");
  SineCheck s;
  s.pair_enclosed = pair_inside;
  std::vector<Complex> loop = vertices;
  if (pair_inside) loop = with_keyhole(vertices, e.z1n, e.htilde_zero, {pts[0], pts[1], pts[2], e.v1n}, diam);
  Real N = sqrt(Real(e.n) * (e.n + 1));
  s.integral = N * sqrt_period(zeros, poles, loop, policy);
  auto al = cfg.exponents_real();
  s.target = principal_log(Complex(sin(pi() * al[i]) / sin(pi() * al[j])));
  s.deviation = distance_mod_2pi_i(s.integral, s.target, &s.sign);
  return s;
}

SineCheck sine_formula_check(const OdeExtraction& e, const BranchConfig& cfg, int i, int j, double diam,
                             const PrecisionPolicy& policy) {
  ScopedPrecision sp(policy);
  auto pts = cfg.points();
  std::vector<Complex> avoid{e.v1n};
  for (int k = 0; k < 3; ++k)
    if (k != i && k != j) avoid.push_back(pts[k]);
  auto verts = stadium_vertices(pts[i], pts[j], avoid, {e.z1n, e.htilde_zero}, diam);
  return sine_formula_check(e, cfg, i, j, verts, diam, policy);
}

}  // namespace padelab
