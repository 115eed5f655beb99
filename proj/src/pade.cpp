#include "padelab/pade.hpp"

#include <algorithm>

#include "padelab/linalg.hpp"

namespace padelab {

namespace {

// Solves for q_0..q_{d-1} with q_d = 1 and q_j = 0 above d from the
// conditions on z^{-1}..z^{-n}.
bool solve_with_degree(std::span<const Complex> f, int n, int d, int digits, std::vector<Complex>& q) {
  q.assign(n + 1, Complex(0));
  q[d] = Complex(1);
  if (d == 0) {
    // Q = 1 is admissible when f_1..f_n vanish.
    Real scale = 0;
    for (std::size_t k = 0; k < f.size(); ++k) scale = std::max(scale, Real(abs(f[k])));
    for (int m = 1; m <= n; ++m)
      if (abs(f[m]) > scale * pow10(-digits / 2)) return false;
    return true;
  }
  CMatrix H(n, d);
  std::vector<Complex> rhs(n);
  for (int m = 1; m <= n; ++m) {
    for (int j = 0; j < d; ++j) H(m - 1, j) = f[j + m];
    rhs[m - 1] = -f[d + m];
  }
  if (d == n) {
    try {
      auto x = solve_dense(H, rhs, digits);
      for (int j = 0; j < d; ++j) q[j] = x[j];
    } catch (const SingularMatrix&) {
      return false;
    }
    return true;
  }
  try {
    auto ls = least_squares(H, rhs, digits);
    if (ls.residual > pow10(-digits / 2)) return false;
    for (int j = 0; j < d; ++j) q[j] = ls.x[j];
  } catch (const RankDeficient&) {
    return false;
  }
  return true;
}

Real hankel_pivot_ratio(std::span<const Complex> f, int n) {
  // smallest |pivot| / max |entry| of the Hankel matrix under partial pivoting
  if (n == 0) return 1;
  CMatrix H(n, n);
  Real norm = 0;
  for (int m = 1; m <= n; ++m)
    for (int j = 0; j < n; ++j) {
      H(m - 1, j) = f[j + m];
      norm = std::max(norm, Real(abs(f[j + m])));
    }
  Real best = norm;
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (abs(H(i, k)) > abs(H(p, k))) p = i;
    for (int j = 0; j < n; ++j) std::swap(H(k, j), H(p, j));
    Complex piv = H(k, k);
    best = std::min(best, Real(abs(piv)));
    if (piv == Complex(0)) return 0;
    for (int i = k + 1; i < n; ++i) {
      Complex m = H(i, k) / piv;
      for (int j = k; j < n; ++j) H(i, j) -= m * H(k, j);
    }
  }
  return norm == 0 ? Real(0) : best / norm;
}

}  // namespace

PadeTriple frobenius_solve(std::span<const Complex> f, int n, const PrecisionPolicy& pol, int extra) {
  if (n < 0) throw InvalidConfig("frobenius_solve: negative index");
  if (static_cast<int>(f.size()) < 2 * n + extra + 1)
    throw InvalidConfig("frobenius_solve: not enough Taylor coefficients");
  PadeTriple t;
  t.n = n;
  std::vector<Complex> q;
  int d = n;
  for (; d >= 0; --d)
    if (solve_with_degree(f, n, d, pol.decimal_digits, q)) break;
  if (d < 0) throw SingularMatrix("frobenius_solve: no denominator found");
  t.normal = d == n;
  t.pivot_ratio = hankel_pivot_ratio(f, n);
  t.Q = ComplexPoly(q);
  // P = polynomial part of Q f
  std::vector<Complex> p(n + 1, Complex(0));
  for (int i = 0; i <= n; ++i)
    for (int j = i; j <= n; ++j) p[i] += q[j] * f[j - i];
  t.P = ComplexPoly(p);
  for (int m = n + 1; m <= n + extra; ++m) {
    Complex r(0);
    for (int j = 0; j <= n; ++j) r += q[j] * f[j + m];
    t.remainder_coeffs.push_back(r);
  }
  return t;
}

PadeTriple frobenius_solve(const BranchConfig& cfg, int n, const PrecisionPolicy& pol, int extra) {
  auto f = taylor_at_infinity(cfg, 2 * n + extra);
  return frobenius_solve(f, n, pol, extra);
}

Real contact_residual(const PadeTriple& t, std::span<const Complex> f) {
  const int n = t.n;
  Real worst = 0;
  for (int m = 1; m <= n; ++m) {
    Complex s(0);
    Real a(0);
    for (int j = 0; j <= t.Q.degree(); ++j) {
      Complex term = t.Q.coeff(j) * f[j + m];
      s += term;
      a += abs(term);
    }
    if (a > 0) worst = std::max(worst, Real(abs(s) / a));
  }
  for (int i = 0; i <= n; ++i) {
    Complex s(0);
    Real a(0);
    for (int j = i; j <= t.Q.degree(); ++j) {
      Complex term = t.Q.coeff(j) * f[j - i];
      s += term;
      a += abs(term);
    }
    if (a > 0) worst = std::max(worst, Real(abs(s - t.P.coeff(i)) / a));
  }
  return worst;
}

int endpoint_power(const Rational& alpha) {
  auto den = boost::multiprecision::denominator(alpha);
  if (den > 24) return 24;
  return static_cast<int>(den.convert_to<long>());
}

namespace {

Complex jump_factor(const BranchConfig& cfg, int j) {
  // tau_j^{-2} - 1 = e^{2 pi i alpha_j} - 1
  Real a = to_real(cfg.exponents()[j]);
  return Complex(cos(2 * pi() * a), sin(2 * pi() * a)) - Complex(1);
}

struct ArcWeight {
  Contour contour;
  LogIntegrand rho;
};

std::vector<ArcWeight> arc_weights(const BranchConfig& cfg, const CutSystem& cut, const Side* avoid, int avoid_arc) {
  std::vector<ArcWeight> out;
  auto ex = f_exponents(cfg, cut);
  const int p = static_cast<int>(cfg.p());
  for (std::size_t j = 0; j < cut.arcs().size(); ++j) {
    const Arc& arc = cut.arcs()[j];
    int qs = arc.start < p ? endpoint_power(cfg.exponents()[arc.start]) : 1;
    int qe = arc.end < p ? endpoint_power(cfg.exponents()[arc.end]) : 1;
    Contour c = (avoid && static_cast<int>(j) == avoid_arc)
                    ? cut.arc_contour_avoiding(static_cast<int>(j), Side::Plus, qs, qe, *avoid)
                    : cut.arc_contour(static_cast<int>(j), Side::Plus, qs, qe);
    Complex jf = jump_factor(cfg, arc.start);
    LogIntegrand rho = [ex, jf](const Complex&, std::span<const Complex> L) {
      Complex s(0);
      for (std::size_t k = 0; k < ex.size(); ++k)
        if (ex[k] != 0) s += L[k] * ex[k];
      return jf * exp(s);
    };
    out.push_back({std::move(c), std::move(rho)});
  }
  return out;
}

}  // namespace

RhoNodes rho_nodes(const BranchConfig& cfg, const CutSystem& cut, int max_degree, const PrecisionPolicy& pol) {
  auto arcs = arc_weights(cfg, cut, nullptr, -1);
  const Real target = pow10(-(pol.decimal_digits * 4) / 5);
  std::vector<Complex> prev;
  RhoNodes out;
  out.stability = 1;
  for (int splits = 1; splits <= 64; splits *= 2) {
    NodeSet all;
    for (const auto& a : arcs) {
      auto ns = discretize(a.rho, a.contour, 64, splits);
      all.t.insert(all.t.end(), ns.t.begin(), ns.t.end());
      all.w.insert(all.w.end(), ns.w.begin(), ns.w.end());
    }
    std::vector<Complex> mom(max_degree + 1, Complex(0));
    std::vector<Real> absm(max_degree + 1, Real(0));
    for (std::size_t i = 0; i < all.t.size(); ++i) {
      Complex tk = all.w[i];
      for (int k = 0; k <= max_degree; ++k) {
        mom[k] += tk;
        absm[k] += abs(tk);
        tk *= all.t[i];
      }
    }
    if (!prev.empty()) {
      Real change = 0;
      for (int k = 0; k <= max_degree; ++k) change = std::max(change, Real(abs(mom[k] - prev[k]) / absm[k]));
      out.stability = change;
      out.nodes = std::move(all);
      if (change < target) return out;
    }
    prev = std::move(mom);
  }
  throw ToleranceNotReached("rho_nodes: moments did not stabilise");
}

Real check_orthogonality(const PadeTriple& t, const BranchConfig& cfg, const CutSystem& cut,
                         const PrecisionPolicy& pol) {
  if (t.n == 0) return 0;
  auto rn = rho_nodes(cfg, cut, 2 * t.n, pol);
  const auto& ns = rn.nodes;
  std::vector<Complex> mom(t.n, Complex(0));
  std::vector<Real> absm(t.n, Real(0));
  for (std::size_t i = 0; i < ns.t.size(); ++i) {
    Complex g = t.Q(ns.t[i]) * ns.w[i];
    for (int k = 0; k < t.n; ++k) {
      mom[k] += g;
      absm[k] += abs(g);
      g *= ns.t[i];
    }
  }
  Real worst = 0;
  for (int k = 0; k < t.n; ++k) worst = std::max(worst, Real(abs(mom[k]) / absm[k]));
  return worst;
}

Complex eval_remainder(const PadeTriple& t, const BranchConfig& cfg, const CutSystem& cut, const Complex& z,
                       const PrecisionPolicy& pol) {
  DPoint zd = to_cd(z);
  double dist = 0;
  int near = cut.nearest_arc(zd, &dist);
  if (dist <= cut.on_cut_tolerance()) throw OnCut("eval_remainder: point on the cut");
  // Bow the nearest arc away from z when the kernel would be nearly singular.
  Side zside = Side::Plus;
  bool bow = dist < 0.05 * cut.diameter();
  if (bow) {
    const Arc& a = cut.arcs()[near];
    std::size_t best = 0;
    for (std::size_t k = 0; k < a.dnodes.size(); ++k)
      if (std::abs(a.dnodes[k] - zd) < std::abs(a.dnodes[best] - zd)) best = k;
    best = std::clamp<std::size_t>(best, 1, a.dnodes.size() - 2);
    DPoint tan = a.dnodes[best + 1] - a.dnodes[best - 1];
    DPoint rel = zd - a.dnodes[best];
    zside = (tan.real() * rel.imag() - tan.imag() * rel.real()) > 0 ? Side::Plus : Side::Minus;
  }
  auto arcs = arc_weights(cfg, cut, bow ? &zside : nullptr, near);
  Complex total(0);
  for (const auto& a : arcs) {
    LogIntegrand g = [&](const Complex& s, std::span<const Complex> L) { return t.Q(s) * a.rho(s, L) / (s - z); };
    total += integrate(g, a.contour, pol);
  }
  // A counterclockwise loop around the cut collapses to int (f_- - f_+), hence the sign.
  return -total / (2 * pi() * I());
}

Complex direct_remainder(const PadeTriple& t, const BranchConfig& cfg, const CutSystem& cut, const Complex& z) {
  return t.Q(z) * eval_f(cfg, cut, z).f - t.P(z);
}

double default_spurious_epsilon(const CutSystem& cut) { return 0.05 * cut.diameter(); }

ZeroReport classify_zeros(const std::vector<Complex>& zeros, const CutSystem& cut, double eps) {
  ZeroReport r;
  r.epsilon = eps;
  for (const auto& z : zeros) {
    double d = 0;
    int a = cut.nearest_arc(to_cd(z), &d);
    ClassifiedZero cz{z, d, d <= eps ? a : -1};
    if (cz.arc >= 0 && cz.arc < 3)
      ++r.per_arc[cz.arc];
    else if (cz.arc < 0)
      ++r.spurious;
    r.zeros.push_back(cz);
  }
  return r;
}

ZeroReport classify_zeros(const PadeTriple& t, const CutSystem& cut, double eps, const PrecisionPolicy& pol) {
  if (t.Q.degree() < 1) return classify_zeros(std::vector<Complex>{}, cut, eps);
  return classify_zeros(poly_roots(t.Q, pol), cut, eps);
}

}  // namespace padelab
