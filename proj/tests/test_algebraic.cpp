#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "padelab/algebraic_function.hpp"

using namespace padelab;

namespace {

GaussRational gq(const char* re, const char* im = "0") { return {parse_rational(re), parse_rational(im)}; }

BranchConfig fig1() {
  return BranchConfig({gq("-1.2"), gq("0.7", "1.75"), gq("1", "0.8")},
                      {parse_rational("-3/7"), parse_rational("1/7"), parse_rational("2/7")});
}

BranchConfig sqrt_ratio() { return BranchConfig({gq("1"), gq("-1")}, {Rational(1, 2), Rational(-1, 2)}); }

}  // namespace

TEST_CASE("rational parsing") {
  CHECK(parse_rational("-1.2") == Rational(-6, 5));
  CHECK(parse_rational("3/7") == Rational(3, 7));
  CHECK(parse_rational("2.5e-1") == Rational(1, 4));
  CHECK(parse_rational("-3/7") == Rational(-3, 7));
  CHECK_THROWS_AS(parse_rational("abc"), InvalidConfig);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(BranchConfig({gq("1"), gq("-1")}, {Rational(1, 2), Rational(1, 2)}), InvalidConfig);
  CHECK_THROWS_AS(BranchConfig({gq("1"), gq("-1")}, {Rational(1), Rational(-1)}), InvalidConfig);
  CHECK_THROWS_AS(BranchConfig({gq("1"), gq("1")}, {Rational(1, 2), Rational(-1, 2)}), InvalidConfig);
  // 1/2 + 1/2 is an integer subset sum
  CHECK_THROWS_AS(BranchConfig({gq("1"), gq("2"), gq("3")}, {Rational(1, 2), Rational(1, 2), Rational(-1)}),
                  InvalidConfig);
  CHECK_NOTHROW(fig1());
  CHECK_THROWS_AS(BranchConfig({gq("0"), gq("1"), gq("2")}, {Rational(1, 3), Rational(1, 3), Rational(-2, 3)})
                      .require_three_point(),
                  CollinearPoints);
}

TEST_CASE("poly_A") {
  ScopedPrecision g(60);
  auto a = poly_A(sqrt_ratio());
  CHECK(a.degree() == 2);
  CHECK(abs(a.coeff(0) + Complex(1)) == 0);
  CHECK(abs(a.coeff(1)) == 0);
  auto c = BranchConfig({gq("0"), gq("1"), gq("-1")}, {Rational(1, 3), Rational(1, 3), Rational(-2, 3)});
  auto a3 = poly_A(c);
  CHECK(abs(a3.coeff(1) + Complex(1)) == 0);
  CHECK(abs(a3.coeff(0)) == 0);
  CHECK(abs(a3.coeff(3) - Complex(1)) == 0);

  auto pol = PrecisionPolicy::with_digits(60);
  auto roots = poly_roots(poly_A(fig1()), pol);
  for (const auto& p : fig1().points()) {
    Real best = 10;
    for (const auto& r : roots) best = std::min(best, Real(abs(r - p)));
    CHECK(best < Real(1e-40));
  }
}

TEST_CASE("poly_B") {
  ScopedPrecision g(60);
  auto b = poly_B(sqrt_ratio());
  CHECK(b.degree() == 0);
  CHECK(abs(b.coeff(0) - Complex(1)) < Real(1e-55));

  Real s3 = sqrt(Real(3)) / 2;
  auto cube = BranchConfig({Complex(1), Complex(Real(-0.5), s3), Complex(Real(-0.5), -s3)},
                           {Rational(1, 3), Rational(1, 3), Rational(-2, 3)});
  CHECK(poly_B(cube).degree() <= 1);

  // B = (sum alpha_j a_j) z + sum_j alpha_j prod_{i != j} a_i
  auto cfg = fig1();
  const auto& pts = *cfg.exact_points();
  const auto& al = cfg.exponents();
  GaussRational lin, con;
  for (int j = 0; j < 3; ++j) {
    lin = lin + pts[j] * al[j];
    GaussRational prod(Rational(1));
    for (int i = 0; i < 3; ++i)
      if (i != j) prod = prod * pts[i];
    con = con + prod * al[j];
  }
  auto be = poly_B_exact(cfg);
  CHECK(be[1] == lin);
  CHECK(be[0] == con);
  auto bf = poly_B(cfg);
  CHECK(bf.degree() == 1);
  CHECK(abs(bf.coeff(1) - lin.to_complex()) < Real(1e-55));
}

TEST_CASE("taylor coefficients") {
  ScopedPrecision g(60);
  auto t = taylor_exact(sqrt_ratio(), 4);
  CHECK(t[1] == GaussRational(Rational(-1)));
  CHECK(t[2] == GaussRational(Rational(1, 2)));

  auto cfg = fig1();
  auto ex = taylor_exact(cfg, 3);
  GaussRational f1;
  for (int j = 0; j < 3; ++j) f1 = f1 - (*cfg.exact_points())[j] * cfg.exponents()[j];
  CHECK(ex[1] == f1);

  // Coefficients from the discrete Fourier transform of f on a large circle.
  const int K = 40, M = 192;
  auto fk = taylor_at_infinity(cfg, K);
  auto pts = cfg.points();
  auto al = cfg.exponents_real();
  Real R = 4;
  std::vector<Complex> samples(M);
  for (int m = 0; m < M; ++m) {
    Real ang = 2 * pi() * Real(m) / M;
    Complex z = Complex(cos(ang), sin(ang)) * R;
    Complex s(0);
    for (int j = 0; j < 3; ++j) s += principal_log(Complex(1) - pts[j] / z) * al[j];
    samples[m] = exp(s);
  }
  for (int k = 1; k <= K; ++k) {
    Complex c(0);
    for (int m = 0; m < M; ++m) {
      Real ang = 2 * pi() * Real(m) * k / M;
      c += samples[m] * Complex(cos(ang), sin(ang));
    }
    c = c / Real(M) * pow(R, k);
    Real scale = std::max(Real(1), Real(abs(fk[k])));
    CHECK(abs(c - fk[k]) / scale < Real(1e-20));
  }

  // the extended-precision path matches the exact path
  auto fl = BranchConfig(cfg.points(), cfg.exponents());
  auto fk2 = taylor_at_infinity(fl, K);
  for (int k = 0; k <= K; ++k) CHECK(abs(fk2[k] - fk[k]) < Real(1e-45) * std::max(Real(1), Real(abs(fk[k]))));
}

TEST_CASE("eval_f on the segment cut") {
  ScopedPrecision g(60);
  auto cfg = sqrt_ratio();
  auto cut = segment_cut(cfg);
  auto fk = taylor_at_infinity(cfg, 40);
  Complex z(Real(7), Real(6));
  Complex series(0);
  for (int k = 40; k >= 0; --k) series = series / z + fk[k];
  auto v = eval_f(cfg, cut, z);
  CHECK(abs(v.f - series) < Real(1e-10));

  std::mt19937 gen(5);
  std::uniform_real_distribution<double> d(-2.5, 2.5);
  for (int i = 0; i < 100; ++i) {
    Complex p(Real(d(gen)), Real(d(gen)));
    if (cut.distance(to_cd(p)) < 0.05) continue;
    auto fv = eval_f(cfg, cut, p);
    CHECK(abs(fv.f_half * fv.f_half - fv.f) < Real(1e-45));
    // alpha -> -alpha gives 1/f
    auto inv = eval_f(cfg.negated(), cut, p);
    CHECK(abs(inv.f * fv.f - Complex(1)) < Real(1e-45));
    // direct formula on the segment cut: sqrt((z-1)/(z+1)) with principal
    // branch is well defined off [-1, 1]
    Complex direct = sqrt((p - Complex(1)) / (p + Complex(1)));
    if ((p.real() < -1 || p.real() > 1) || abs(p.imag()) > Real(0.05)) {
      Complex diff = abs(direct - fv.f) < abs(direct + fv.f) ? direct - fv.f : direct + fv.f;
      CHECK(abs(diff) < Real(1e-45));
    }
  }

  // closed loop around the whole cut returns the start value
  auto logs0 = cut.route(Complex(3)).end_logs();
  auto loop = Contour::circle(cut.centres(), Complex(0), Real(3), logs0);
  auto logs1 = loop.end_logs();
  auto f0 = f_from_logs(cfg, cut, logs0).f, f1 = f_from_logs(cfg, cut, logs1).f;
  CHECK(abs(f0 - f1) < Real(1e-50));
}

TEST_CASE("eval_f path independence") {
  ScopedPrecision g(60);
  auto cfg = sqrt_ratio();
  auto cut = segment_cut(cfg);
  Complex z(Real(0.2), Real(-0.4));
  auto v1 = eval_f(cfg, cut, z).f;
  // a different path: from infinity down the imaginary axis then across
  Contour c = Contour::from_infinity(cut.centres(), Complex(Real(0), Real(-9)));
  c.append_polyline({Complex(Real(-3), Real(-2)), Complex(Real(0.2), Real(-1)), z});
  auto v2 = f_from_logs(cfg, cut, c.end_logs()).f;
  CHECK(abs(v1 - v2) < Real(1e-50));
}

TEST_CASE("boundary values and rho on the segment") {
  ScopedPrecision g(60);
  auto cfg = sqrt_ratio();
  auto cut = segment_cut(cfg);
  const Arc& arc = cut.arcs()[0];
  Real a1 = to_real(cfg.exponents()[0]);
  Complex tau = exp(-I() * pi() * a1);
  Complex t = Complex(0, 2) * sin(pi() * a1);
  for (double s : {0.2, 0.5, 0.7}) {
    auto node = arc.node_at(s);
    auto bp = boundary_f_and_rho(cfg, cut, 0, node, Side::Plus);
    auto bm = boundary_f_and_rho(cfg, cut, 0, node, Side::Minus);
    CHECK(abs(bp.rho - (Complex(1) / (tau * tau) - Complex(1)) * bp.f_side.value) < Real(1e-45));
    CHECK(abs(bp.rho - t * tau * bm.f_side.value) < Real(1e-45));
    // the segment oracle: f_+ on the upper side of [1 -> -1]... orientation a_1=1 to a_2=-1,
    // so the plus side is below the real axis
    Complex x = arc.nodes[node];
    Complex lower = sqrt((x - Complex(1) - Complex(0, 1e-30)) / (x + Complex(1) - Complex(0, 1e-30)));
    CHECK(abs(abs(lower) - abs(bp.f_side.value)) < Real(1e-20));
  }
  CHECK_THROWS_AS(boundary_f_and_rho(cfg, cut, 0, 0, Side::Plus), TooCloseToEndpoint);
}
