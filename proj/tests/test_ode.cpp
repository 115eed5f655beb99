#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "padelab/linalg.hpp"
#include "padelab/ode.hpp"

using namespace padelab;

namespace {

GaussRational gq(const char* re, const char* im = "0") { return {parse_rational(re), parse_rational(im)}; }

BranchConfig fig1() {
  return BranchConfig({gq("-1.2"), gq("0.7", "1.75"), gq("1", "0.8")},
                      {parse_rational("-3/7"), parse_rational("1/7"), parse_rational("2/7")});
}

const StarGeometry& fig1_star() {
  static const StarGeometry g = [] {
    ScopedPrecision sp(30);
    auto p = fig1().points();
    return build_star({p[0], p[1], p[2]}, PrecisionPolicy::with_digits(30));
  }();
  return g;
}

int pade_digits(int n) { return 4 * n + 20; }

struct Fit {
  PadeTriple t;
  OdeExtraction e;
};

const Fit& fig1_fit(int n) {
  static std::map<int, Fit> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  ScopedPrecision sp(pade_digits(n));
  auto pol = PrecisionPolicy::with_digits(pade_digits(n));
  Fit f;
  f.t = frobenius_solve(fig1(), n, pol);
  f.e = extract(f.t, fig1(), Complex(fig1_star().v), pol);
  return cache.emplace(n, std::move(f)).first->second;
}

// Heine-Stieltjes problem for a fixed zero z1 of h: Newton on the monic y of
// degree n and the two free coefficients of D, from random starts.
std::optional<std::pair<ComplexPoly, ComplexPoly>> heine_stieltjes(const ComplexPoly& A, const ComplexPoly& B, int n,
                                                                const Complex& z1, int digits) {
  ComplexPoly h({-z1, Complex(1)});
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t m = n + 2;
  for (int start = 0; start < 200; ++start) {
    std::vector<Complex> x(m);
    for (auto& c : x) c = Complex(Real(u(rng)), Real(u(rng)));
    for (int it = 0; it < 60; ++it) {
      std::vector<Complex> yc(x.begin(), x.begin() + n);
      yc.push_back(Complex(1));
      ComplexPoly y(yc), D({x[n + 1], x[n], Complex(1)});
      ComplexPoly E = ode_identity(A, B, y, n, h, D);
      CMatrix J(m, m);
      std::vector<Complex> rhs(m);
      for (std::size_t k = 0; k < m; ++k) rhs[k] = -E.coeff(k);
      Complex N2(Real(n) * (n + 1));
      for (int k = 0; k < n; ++k) {
        // the identity is linear in y, so its y_k column is the identity at z^k with D fixed
        ComplexPoly col = ode_identity(A, B, ComplexPoly::monomial(k), n, h, D);
        for (std::size_t r = 0; r < m; ++r) J(r, k) = col.coeff(r);
      }
      ComplexPoly zy = ComplexPoly::monomial(1) * y;
      for (std::size_t r = 0; r < m; ++r) {
        J(r, n) = -N2 * zy.coeff(r);
        J(r, n + 1) = -N2 * y.coeff(r);
      }
      std::vector<Complex> dx;
      try {
        dx = solve_dense(J, rhs, digits);
      } catch (const SingularMatrix&) {
        break;
      }
      Real step = 0;
      for (std::size_t k = 0; k < m; ++k) {
        x[k] += dx[k];
        step = std::max(step, Real(abs(dx[k])));
      }
      if (step > 1e6) break;
      if (step < pow10(-digits + 10)) return std::make_pair(y, D);
    }
  }
  return std::nullopt;
}

Real max_abs_identity(const ComplexPoly& A, const ComplexPoly& B, const ComplexPoly& y, int n, const ComplexPoly& h,
                      const ComplexPoly& D) {
  Real m = 0;
  ComplexPoly E = ode_identity(A, B, y, n, h, D);
  for (const auto& c : E.coeffs()) m = std::max(m, Real(abs(c)));
  return m;
}

}  // namespace

TEST_CASE("extraction recovers manufactured Heine-Stieltjes data") {
  ScopedPrecision sp(60);
  auto pol = PrecisionPolicy::with_digits(60);
  auto A = poly_A(fig1()), B = poly_B(fig1());
  for (int n : {3, 4}) {
    Complex z1(Real(0.3), Real(-0.45));
    auto hs = heine_stieltjes(A, B, n, z1, 60);
    REQUIRE(hs.has_value());
    auto [y, D] = *hs;
    CHECK(max_abs_identity(A, B, y, n, ComplexPoly({-z1, Complex(1)}), D) < Real(1e-40));
    auto e = extract(A, B, y, n, Complex(0), pol);
    CHECK(e.residual < Real(1e-40));
    CHECK(abs(e.z1n - z1) < Real(1e-35));
    CHECK(abs(e.D_coeffs[0] - D.coeff(0)) < Real(1e-35));
    CHECK(abs(e.D_coeffs[1] - D.coeff(1)) < Real(1e-35));
  }
}

TEST_CASE("Fig-1: residual, the numerator oracle and the identity at z_1n") {
  for (int n : {10, 20, 40}) {
    const Fit& f = fig1_fit(n);
    const int d = pade_digits(n);
    ScopedPrecision sp(d);
    auto pol = PrecisionPolicy::with_digits(d);
    CHECK(f.e.residual < pow10(-d / 3));
    auto A = poly_A(fig1()), B = poly_B(fig1());
    // P_n solves the equation with the opposite sign of B; both fits share
    // h_n, and their D differ by B(z_1n) / (n (n+1)) in the constant term
    auto eP = extract(A, B * Complex(-1), f.t.P, n, Complex(fig1_star().v), pol);
    Real N2 = Real(n) * (n + 1);
    CHECK(eP.residual < pow10(-d / 3));
    CHECK(abs(eP.z1n - f.e.z1n) < pow10(-d / 3));
    CHECK(abs(eP.D_coeffs[1] - f.e.D_coeffs[1]) < pow10(-d / 3));
    CHECK(abs(f.e.D_coeffs[0] - eP.D_coeffs[0] - B(f.e.z1n) / N2) < pow10(-d / 3));
    // at z_1n: n(n+1) D^2 = A D' - B D for the numerator form
    Complex z = eP.z1n;
    auto D = eP.D();
    Complex lhs = N2 * D(z) * D(z), rhs = A(z) * D.derivative()(z) - B(z) * D(z);
    CHECK(abs(lhs - rhs) / abs(lhs) < pow10(-d / 3));
    // roots of D_n: v1n near v, the other near z_1n
    CHECK(abs(f.e.v1n - Complex(fig1_star().v)) * n < Real(4));
    CHECK(abs(f.e.htilde_zero - f.e.z1n) < Real(0.1));
  }
}

TEST_CASE("sine formula: homotopy invariance, pairs and sign") {
  const double diam = fig1_star().cut.diameter();
  auto pol = PrecisionPolicy::with_digits(30);
  ScopedPrecision sp(30);
  auto pts = fig1().points();
  auto al = fig1().exponents_real();
  for (int n : {20, 40}) {
    const Fit& f = fig1_fit(n);
    auto s = sine_formula_check(f.e, fig1(), 0, 1, diam, pol);
    // a thinner loop around the same pair is homotopic in the plane minus the singular points
    std::vector<Complex> avoid{f.e.v1n, pts[2]};
    auto verts = stadium_vertices(pts[0], pts[1], avoid, {f.e.z1n, f.e.htilde_zero}, 0.6 * diam);
    auto s2 = sine_formula_check(f.e, fig1(), 0, 1, verts, diam, pol);
    CHECK(abs(s2.integral - s.integral) < Real(1e-20));
    CHECK(n * s.deviation < Real(12));
    CHECK(abs(s.target.real() - log(abs(sin(pi() * al[0]) / sin(pi() * al[1])))) < Real(1e-25));
  }
  // n = 20: z_1n sits on the segment [a_1, a_2], so the pair is cut out by a keyhole
  CHECK(sine_formula_check(fig1_fit(20).e, fig1(), 0, 1, diam, pol).pair_enclosed);
  const Fit& f = fig1_fit(40);
  auto s12 = sine_formula_check(f.e, fig1(), 0, 1, diam, pol);
  auto s13 = sine_formula_check(f.e, fig1(), 0, 2, diam, pol);
  CHECK(s12.deviation < Real(0.05));
  CHECK(s13.deviation < Real(0.05));
  CHECK(abs(s13.target.real() - log(abs(sin(pi() * al[0]) / sin(pi() * al[2])))) < Real(1e-25));
  CHECK(abs(s13.target - s12.target) > Real(0.5));
  // the same loop against the wrong target is far off
  CHECK(distance_mod_2pi_i(s13.integral, s12.target) > Real(0.3));
}

TEST_CASE("sine formula: negative control with the limit differential") {
  const double diam = fig1_star().cut.diameter();
  auto pol = PrecisionPolicy::with_digits(30);
  ScopedPrecision sp(30);
  auto pts = fig1().points();
  Complex v(fig1_star().v);
  auto verts = stadium_vertices(pts[0], pts[1], {v, pts[2]}, {}, diam);
  Real N = sqrt(Real(40 * 41));
  Complex g = N * sqrt_period({v}, {pts[0], pts[1], pts[2]}, verts, pol);
  // equilibrium periods are purely imaginary
  CHECK(abs(g.real()) < Real(1e-20));
  auto al = fig1().exponents_real();
  Complex target = principal_log(Complex(sin(pi() * al[0]) / sin(pi() * al[1])));
  CHECK(distance_mod_2pi_i(g, target) > Real(0.5));
}

TEST_CASE("sine formula: inadmissible loops") {
  const double diam = fig1_star().cut.diameter();
  auto pol = PrecisionPolicy::with_digits(30);
  ScopedPrecision sp(30);
  const Fit& f = fig1_fit(40);
  auto pts = fig1().points();
  // a big circle encloses all three branch points
  std::vector<Complex> big;
  for (int k = 0; k < 64; ++k) big.push_back(Complex(cos(2 * pi() * k / 64), sin(2 * pi() * k / 64)) * Real(20));
  CHECK_THROWS_AS(sine_formula_check(f.e, fig1(), 0, 1, big, diam, pol), CycleThroughSingularity);
  // a loop through a_3
  std::vector<Complex> through{pts[2], pts[2] + Complex(Real(1)), pts[2] + Complex(Real(0), Real(1))};
  CHECK_THROWS_AS(sine_formula_check(f.e, fig1(), 0, 1, through, diam, pol), CycleThroughSingularity);
}
