#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "padelab/geometry.hpp"

using namespace padelab;

namespace {

std::array<Complex, 3> cube_roots() {
  Real s3 = sqrt(Real(3)) / 2;
  return {Complex(1), Complex(Real(-0.5), s3), Complex(Real(-0.5), -s3)};
}

std::array<Complex, 3> fig1_points() {
  return {Complex(Real(-1.2)), Complex(Real(0.7), Real(1.75)), Complex(Real(1), Real(0.8))};
}

Real re_residual(const Complex& aj, const Complex& v, const std::array<Complex, 3>& a, const PrecisionPolicy& pol) {
  std::vector<Complex> centres{a[0], a[1], a[2], v};
  Complex mid = (aj + v) / 2;
  std::vector<Complex> logs;
  for (const auto& c : centres) logs.push_back(principal_log(mid - c));
  auto c = Contour::polyline(centres, {aj, mid, v}, 1, logs, 2, 2);
  return abs(integrate([](const Complex&, std::span<const Complex> L) { return T_from_logs(L); }, c, pol).real());
}

}  // namespace

TEST_CASE("centre: symmetric configurations") {
  ScopedPrecision g(40);
  auto pol = PrecisionPolicy::with_digits(40);
  auto v = solve_center(cube_roots(), pol);
  CHECK(abs(v) < Real(1e-18));

  std::array<Complex, 3> refl{Complex(1), Complex(-1), Complex(Real(0), Real(1.3))};
  auto w = solve_center(refl, pol);
  CHECK(abs(w.real()) < Real(1e-18));
  CHECK_THROWS_AS(solve_center({Complex(0), Complex(1), Complex(2)}, pol), CollinearPoints);
}

TEST_CASE("centre: residual certificate at 60 digits") {
  ScopedPrecision g(60);
  auto pol = PrecisionPolicy::with_digits(60);
  auto a = fig1_points();
  auto v = solve_center(a, pol);
  // residuals re-evaluated with a finer quadrature tolerance
  auto fine = pol;
  fine.quad_rel_tol = pol.quad_rel_tol / 1000;
  for (int j = 0; j < 3; ++j) CHECK(re_residual(a[j], v, a, fine) < Real(1e-30));
}

TEST_CASE("star: cube roots") {
  ScopedPrecision g(40);
  auto pol = PrecisionPolicy::with_digits(40);
  auto s = build_star(cube_roots(), pol);
  for (int j = 0; j < 3; ++j) {
    CHECK(abs(s.masses[j] - Real(1) / 3) < Real(1e-15));
    // straight radial arcs
    for (const auto& z : s.cut.arcs()[j].nodes) {
      Complex d = z * conj_c(s.a[j]);
      CHECK(abs(d.imag()) < Real(1e-15));
    }
  }
  Real cap = Real(1) / Real(abs(s.c));
  CHECK(abs(cap - pow(Real(4), Real(-1) / 3)) < Real(1e-15));
  auto k = kappas(s.masses);
  CHECK(abs(k.kappa[1] * k.kappa[2] - k.kappa[0]) < Real(1e-30));
}

TEST_CASE("star: Fig-1 configuration") {
  ScopedPrecision g(40);
  auto pol = PrecisionPolicy::with_digits(40);
  auto s = build_star(fig1_points(), pol);
  Real msum = s.masses[0] + s.masses[1] + s.masses[2];
  CHECK(abs(msum - 1) < Real(1e-10));
  for (auto m : s.masses) CHECK(m > 0);

  // arc nodes lie on the level curve
  auto Tf = [](const Complex&, std::span<const Complex> L) { return T_from_logs(L); };
  for (int j = 0; j < 3; ++j) {
    const auto& arc = s.cut.arcs()[j];
    for (std::size_t k = 1; k + 1 < arc.nodes.size(); k += 7) {
      auto logs = s.cut.side_logs(j, k, Side::Plus);
      std::vector<Complex> verts(arc.nodes.begin(), arc.nodes.begin() + k + 1);
      auto c = Contour::polyline(s.cut.centres(), verts, k, logs, 2, 1);
      CHECK(abs(integrate(Tf, c, pol).real()) < 10 * pol.newton_tol);
    }
  }

  // jumps of Phi across each arc; this labelling runs clockwise
  CHECK(s.orientation == -1);
  auto k = kappas(s.masses, s.orientation);
  for (int j = 0; j < 3; ++j) {
    auto node = s.cut.arcs()[j].node_at(0.5);
    Complex pp = phi_boundary(s, j, node, Side::Plus, pol);
    Complex pm = phi_boundary(s, j, node, Side::Minus, pol);
    CHECK(abs(pp * pm - k.kappa[j]) < Real(1e-22));
    CHECK(abs(Real(abs(pp)) - 1) < Real(1e-25));
  }
  for (Complex z : {Complex(Real(2), Real(2)), Complex(Real(-0.3), Real(-1)), Complex(Real(0.1), Real(0.9))})
    CHECK(abs(phi(s, z, pol)) > Real(1));

  // Phi(z)/z at radii R and 2R
  for (double R : {20.0, 40.0}) {
    Complex z1(Real(R * 0.6), Real(R * 0.8));
    Complex r1 = phi(s, z1, pol) / z1, r2 = phi(s, z1 * 2, pol) / (z1 * 2);
    CHECK(abs(r1 - r2) < Real(10.0 / R));
    CHECK(abs(r2 - s.c) < Real(10.0 / R));
  }

  // regions: far side of a_3 in D_+
  Complex z3 = s.a[2] + (s.a[2] - s.v) / Real(3);
  CHECK(region_of(s, z3) == Region::DPlus);
  Complex opp = s.v - (s.a[2] - s.v);
  CHECK(region_of(s, opp) == Region::DMinus);
}

TEST_CASE("star: scaling and translation") {
  ScopedPrecision g(30);
  auto pol = PrecisionPolicy::with_digits(30);
  auto a = fig1_points();
  auto s = build_star(a, pol);
  std::array<Complex, 3> b;
  Complex shift(Real(0.3), Real(-0.7));
  for (int j = 0; j < 3; ++j) b[j] = a[j] * 2 + shift;
  auto t = build_star(b, pol);
  CHECK(abs(t.v - (s.v * 2 + shift)) < Real(1e-12));
  CHECK(abs(Real(abs(s.c)) / Real(abs(t.c)) - 2) < Real(1e-12));
  for (int j = 0; j < 3; ++j) CHECK(abs(t.masses[j] - s.masses[j]) < Real(1e-12));
}

TEST_CASE("reflection symmetric regions") {
  ScopedPrecision g(30);
  auto pol = PrecisionPolicy::with_digits(30);
  // a_3 on the symmetry axis, a_1 and a_2 mirror images
  std::array<Complex, 3> a{Complex(Real(1), Real(-0.2)), Complex(Real(-1), Real(-0.2)), Complex(Real(0), Real(1.5))};
  auto s = build_star(a, pol);
  CHECK(abs(s.v.real()) < Real(1e-12));
  CHECK(abs(s.masses[0] - s.masses[1]) < Real(1e-12));
  // the splitting contour is symmetric, so mirror images share a region
  for (Complex z : {Complex(Real(0.4), Real(2.5)), Complex(Real(1.6), Real(-1.2)), Complex(Real(0.3), Real(0.1))}) {
    Complex zb(-z.real(), z.imag());
    CHECK(region_of(s, z) != Region::NearBoundary);
    CHECK(region_of(s, z) == region_of(s, zb));
  }
  CHECK(region_of(s, Complex(Real(0.0), Real(2.5))) == Region::DPlus);
  CHECK(region_of(s, Complex(Real(0.0), Real(-2.5))) == Region::DMinus);
}

TEST_CASE("jump constants: counterclockwise labelling") {
  ScopedPrecision g(30);
  auto pol = PrecisionPolicy::with_digits(30);
  std::array<Complex, 3> a{Complex(Real(-1.2)), Complex(Real(1), Real(0.8)), Complex(Real(0.7), Real(1.75))};
  auto s = build_star(a, pol);
  CHECK(s.orientation == 1);
  auto k = kappas(s.masses, s.orientation);
  for (int j = 0; j < 3; ++j) {
    auto node = s.cut.arcs()[j].node_at(0.4);
    Complex pp = phi_boundary(s, j, node, Side::Plus, pol);
    Complex pm = phi_boundary(s, j, node, Side::Minus, pol);
    CHECK(abs(pp * pm - k.kappa[j]) < Real(1e-20));
  }
}
