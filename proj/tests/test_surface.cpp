#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "padelab/surface.hpp"

using namespace padelab;

namespace {

constexpr int kDigits = 30;

GaussRational gq(const char* re, const char* im = "0") { return {parse_rational(re), parse_rational(im)}; }

BranchConfig fig1() {
  return BranchConfig({gq("-1.2"), gq("0.7", "1.75"), gq("1", "0.8")},
                      {parse_rational("-3/7"), parse_rational("1/7"), parse_rational("2/7")});
}

BranchConfig cube_roots(std::vector<Rational> ex) {
  Real s3 = sqrt(Real(3)) / 2;
  return BranchConfig({Complex(1), Complex(Real(-0.5), s3), Complex(Real(-0.5), -s3)}, std::move(ex));
}

std::array<Complex, 3> points3(const BranchConfig& c) {
  auto p = c.points();
  return {p[0], p[1], p[2]};
}

struct Fixture {
  BranchConfig cfg;
  StarGeometry raw;
  SurfaceBundle bundle;
};

Fixture make(const BranchConfig& cfg) {
  ScopedPrecision sp(kDigits);
  auto pol = PrecisionPolicy::with_digits(kDigits);
  auto g = build_star(points3(cfg), pol);
  SurfaceBundle b(cfg, g, pol);
  return {cfg, g, b};
}

const Fixture& fig1_fixture() {
  static Fixture f = make(fig1());
  return f;
}

const Fixture& cube_fixture() {
  static Fixture f = make(cube_roots({Rational(1, 5), Rational(2, 5), Rational(-3, 5)}));
  return f;
}

const ParametrixData& fig1_parametrix(int n) {
  static std::map<int, ParametrixData> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_parametrix(fig1_fixture().bundle, n)).first;
  return it->second;
}

Complex mod_2pi_i(const Complex& z) {
  Real t = 2 * pi();
  return z - Complex(Real(0), t * round(z.imag() / t));
}

IndexConstants constants(const SurfaceBundle& b, int n) {
  return index_constants(b.cfg, kappas(b.geometry.masses, b.geometry.orientation), n);
}

// Closed loop around c of radius r traversed `turns` times, logs from a
// route of the given sheet.
Contour loop_around(const SurfaceBundle& b, const Complex& c, const Real& r, int sheet, int turns) {
  Complex start = c + Complex(r, Real(0));
  auto logs = surface_path(b, {start, sheet, false}).end_logs();
  std::vector<Complex> verts;
  const int sides = 48 * turns;
  for (int k = 0; k <= sides; ++k) {
    Real th = 2 * pi() * turns * k / sides;
    verts.push_back(c + r * Complex(cos(th), sin(th)));
  }
  Contour loop = Contour::polyline(b.geometry.cut.centres(), verts, 0, logs);
  loop.set_closed(true);
  return loop;
}

}  // namespace

TEST_CASE("period identities and tau") {
  ScopedPrecision sp(kDigits);
  for (const Fixture* f : {&fig1_fixture(), &cube_fixture()}) {
    const auto& P = f->bundle.periods;
    Complex s0(0), s1(0), s2(0);
    for (int j = 0; j < 3; ++j) {
      s0 += P.M[j][0];
      s1 += P.M[j][1];
      s2 += P.M[j][2];
      CHECK(abs(P.M[j][0]) > Real(1e-3));
    }
    CHECK(abs(s0) < Real(1e-10));
    CHECK(abs(s1 - Complex(Real(0.5))) < Real(1e-10));
    CHECK(abs(s2 - P.S / 2) < Real(1e-10));
    CHECK(P.tau.imag() < 0);
  }
  // the clockwise Fig-1 labelling is handled in the mirror frame
  CHECK(fig1_fixture().bundle.mirrored);
  CHECK_FALSE(cube_fixture().bundle.mirrored);
}

TEST_CASE("cycle periods by two contours") {
  ScopedPrecision sp(kDigits);
  const auto& b = fig1_fixture().bundle;
  auto inv_w = [](const Complex&, std::span<const Complex> L) { return Complex(1) / w_from_logs(L); };
  for (auto [cyc, j] : {std::pair{Cycle::A, 0}, std::pair{Cycle::B, 2}}) {
    Complex expect = -4 * pi() * I() * b.periods.M[j][0];
    Complex circ = integrate(inv_w, circle_cycle(b.geometry, cyc), b.policy);
    Contour hug = hugging_cycle(b.geometry, cyc, 0.01 * b.geometry.cut.diameter());
    Complex h = integrate(inv_w, hug, b.policy);
    CHECK(abs(circ - expect) < Real(1e-10));
    CHECK(abs(h - expect) < Real(1e-10));
    // w returns to its starting branch along the cycle
    Complex w0 = w_from_logs(hug.start_logs()), w1 = w_from_logs(hug.end_logs());
    CHECK(abs(w1 - w0) < Real(1e-20) * abs(w0));
  }
}

TEST_CASE("index constants") {
  ScopedPrecision sp(kDigits);
  const auto& b = fig1_fixture().bundle;
  auto k = constants(b, 17);
  CHECK(abs(k.tau_j[0] * k.tau_j[1] * k.tau_j[2] - Complex(1)) < Real(1e-25));
  for (int j = 0; j < 3; ++j) {
    int jp = (j + 1) % 3, jm = (j + 2) % 3;
    Complex id = k.tau_j[jp] * k.t_j[jm] + k.t_j[j] + k.t_j[jp] / k.tau_j[jm];
    CHECK(abs(id) < Real(1e-25));
    CHECK(abs(abs(k.s_nj[j]) - abs(k.t_j[j])) < Real(1e-25));
  }
  BranchConfig half({gq("1"), gq("-1"), gq("0", "1")}, {Rational(1, 2), Rational(-1, 4), Rational(-1, 4)});
  auto kh = index_constants(half, kappas({Real(1) / 3, Real(1) / 3, Real(1) / 3}), 3);
  CHECK(abs(kh.t_j[0] - Complex(Real(0), Real(2))) < Real(1e-25));
}

TEST_CASE("abel map and lattice") {
  ScopedPrecision sp(kDigits);
  const auto& b = fig1_fixture().bundle;
  CHECK(abel_map(b, {Complex(0), 1, true}) == Complex(0));
  auto nu = [&](const Complex&, std::span<const Complex> L) {
    return -Complex(1) / (2 * b.periods.M[2][0] * w_from_logs(L));
  };
  Complex pb = integrate(nu, circle_cycle(b.geometry, Cycle::B), b.policy);
  Complex pa = integrate(nu, circle_cycle(b.geometry, Cycle::A), b.policy);
  CHECK(abs(pb - 2 * pi() * I()) < Real(1e-10));
  CHECK(abs(pa - 2 * pi() * I() * b.periods.tau) < Real(1e-10));
  Complex z(Real(13.7), Real(-41.2));
  Complex r1 = b.lattice.reduce_near_zero(z);
  CHECK(abs(b.lattice.reduce_near_zero(r1) - r1) == 0);
  // coarse grid agrees with the full-precision map modulo the lattice
  for (std::size_t i = 0; i < b.grid.z.size(); i += 613) {
    SurfacePoint p{Complex(Real(b.grid.z[i].real()), Real(b.grid.z[i].imag())), b.grid.sheet[i], false};
    if (b.geometry.cut.distance(b.grid.z[i]) < 0.01 * b.geometry.cut.diameter()) continue;
    Complex d = abel_map(b, p) - Complex(Real(b.grid.value[i].real()), Real(b.grid.value[i].imag()));
    CHECK(abs(b.lattice.reduce_near_zero(d)) < Real(1e-6));
  }
}

TEST_CASE("jacobi inversion") {
  ScopedPrecision sp(kDigits);
  const auto& b = fig1_fixture().bundle;
  // zero logs: the target is -2 pi i tau, a lattice point
  IndexConstants fake = constants(b, 5);
  fake.s_nj = {Complex(1), Complex(1), Complex(1)};
  auto pinv = jacobi_inversion(b, fake);
  CHECK(pinv.pathological);
  CHECK(pinv.z_n.at_infinity);
  CHECK(pinv.z_n.sheet == 1);
  CHECK_THROWS_AS(parametrix(b, fake, pinv, szego_function(b, fake, pinv), eta_differential(b, pinv)),
                  PathologicalIndex);

  for (int n : {20, 41, 42, 61}) {
    auto inv = jacobi_inversion(b, constants(b, n));
    REQUIRE_FALSE(inv.pathological);
    CHECK(inv.residual < b.policy.newton_tol * 10);
    // w^2 = A V at z_n
    Complex av(1);
    for (const auto& c : b.geometry.cut.centres()) av *= inv.z_n.z - c;
    CHECK(abs(inv.w_n * inv.w_n - av) < Real(1e-20) * abs(av));
    if (b.geometry.cut.distance(to_cd(inv.z_n.z)) > 0.01) {
      Complex d = abel_map(b, inv.z_n) - inv.target;
      CHECK(abs(b.lattice.reduce_near_zero(d)) < b.policy.newton_tol * 10);
    }
  }
  // n = 42 carries a spurious zero far from the cut, n = 41 does not
  CHECK(jacobi_inversion(b, constants(b, 42)).z_n.sheet == 1);
  CHECK(jacobi_inversion(b, constants(b, 41)).z_n.sheet == 2);
}

TEST_CASE("Szego function") {
  ScopedPrecision sp(kDigits);
  const auto& b = fig1_fixture().bundle;
  auto k = constants(b, 20);
  auto inv = jacobi_inversion(b, k);
  auto s = szego_function(b, k, inv);
  CHECK(abs(s.beta3 - (1 + b.periods.tau) * s.beta2) == 0);
  Complex target[3] = {k.s_nj[0], -k.s_nj[1], k.s_nj[0] * exp(s.beta3)};
  for (int j = 0; j < 3; ++j)
    for (double f : {0.15, 0.3, 0.5, 0.7, 0.85}) {
      auto node = b.geometry.cut.arcs()[j].node_at(f);
      Complex prod = exp(szego_log_boundary(b, s, j, node, Side::Plus) + szego_log_boundary(b, s, j, node, Side::Minus));
      CHECK(abs(prod / target[j] - 1) < Real(1e-8));
    }
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-4, 4);
  int checked = 0;
  while (checked < 20) {
    Complex z(Real(U(rng)), Real(U(rng)));
    if (b.geometry.cut.distance(to_cd(z)) < 0.02 * b.geometry.cut.diameter()) continue;
    Complex d = szego_log(b, s, z) - szego_log_differential(b, s, z);
    Real t = pi();
    Complex m = d - Complex(Real(0), t * round(d.imag() / t));  // F up to sign
    CHECK(abs(m) < Real(1e-10));
    ++checked;
  }
  Real lo = 1e300, hi = 0;
  for (int i = -6; i <= 6; ++i)
    for (int j = -6; j <= 6; ++j) {
      Complex z(Real(0.67 * i + 0.013), Real(0.67 * j + 0.007));
      if (b.geometry.cut.distance(to_cd(z)) < 1e-3) continue;
      Real a = abs(szego_value(b, s, z));
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  CHECK(lo > Real(1e-6));
  CHECK(hi < Real(1e6));
  Complex far(Real(3000), Real(4000));
  CHECK(abs(szego_log(b, s, far) - s.log_F_infinity) < Real(1e-3));
}

TEST_CASE("eta differential") {
  ScopedPrecision sp(kDigits);
  const auto& b = fig1_fixture().bundle;
  for (int n : {20, 61}) {
    auto k = constants(b, n);
    auto inv = jacobi_inversion(b, k);
    auto e = eta_differential(b, inv);
    auto s = szego_function(b, k, inv);
    CHECK(abs(eta_period(b, e, Cycle::B)) < Real(1e-10));
    Complex a = mod_2pi_i(eta_period(b, e, Cycle::A) - (s.beta1 + s.beta3 - log(k.s_nj[2])));
    CHECK(abs(a) < Real(1e-8));
    if (n == 61) continue;
    // residues: -1/2 at a_j (two turns), +1 at z_n
    for (int j = 0; j < 3; ++j) {
      Complex r = eta_integral(b, e, loop_around(b, b.geometry.a[j], Real(0.05), 1, 2));
      CHECK(abs(r + pi() * I()) < Real(1e-10));
    }
    Real r = Real(0.3 * std::min(b.geometry.cut.distance(to_cd(e.z_n)), 0.1));
    Complex res = eta_integral(b, e, loop_around(b, e.z_n, r, inv.z_n.sheet, 1));
    CHECK(abs(res - 2 * pi() * I()) < Real(1e-10));
  }
  // eta^*: fixed coefficient 1/(4 M_3^0) and the stated a-period
  EtaData es = eta_differential(b, jacobi_inversion(b, constants(b, 20)));
  es.infinity_sheet = 1;
  es.delta1 = 0;
  es.delta1 = -eta_period(b, es, Cycle::B) / b.periods.b_period;
  CHECK(abs(es.delta1 * 4 * b.periods.M[2][0] - Complex(1)) < Real(1e-10));
  Complex pa = mod_2pi_i(eta_period(b, es, Cycle::A) - pi() * I() * (1 - b.periods.tau));
  CHECK(abs(pa) < Real(1e-10));
}

TEST_CASE("parametrix N") {
  ScopedPrecision sp(kDigits);
  const auto& b = fig1_fixture().bundle;
  const auto& p = fig1_parametrix(20);
  // u_1 -> 1 and u_2 = O(1/z)
  Complex dir(Real(0.6), Real(0.8));
  Real R = 40;
  Complex u1a = u1_value(b, p, dir * R), u1b = u1_value(b, p, dir * R * 2);
  CHECK(abs(u1b - 1) < abs(u1a - 1));
  CHECK(abs(u1b - 1) < Real(0.02));
  Complex g1 = n12_value(b, p, dir * R), g2 = n12_value(b, p, dir * R * 2);
  CHECK(abs(g2) < abs(g1));
  CHECK(abs(dir * R * 2 * g2 - p.u2_limit) < Real(0.02) * abs(p.u2_limit));

  auto k = p.constants;
  for (int j = 0; j < 3; ++j)
    for (double f : {0.2, 0.5, 0.8}) {
      auto node = b.geometry.cut.arcs()[j].node_at(f);
      Mat2 Np = eval_N_boundary(b, p, j, node, Side::Plus), Nm = eval_N_boundary(b, p, j, node, Side::Minus);
      const Complex& sj = k.s_nj[j];
      Mat2 J{{{-Nm[0][1] / sj, Nm[0][0] * sj}, {-Nm[1][1] / sj, Nm[1][0] * sj}}};
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(abs(Np[r][c] - J[r][c]) < Real(1e-8) * (abs(J[r][c]) + 1));
    }

  ParametrixData flipped = p;
  flipped.szego = flip_sign(p.szego);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-3.5, 3.5);
  int checked = 0;
  while (checked < 20) {
    Complex z(Real(U(rng)), Real(U(rng)));
    if (b.geometry.cut.distance(to_cd(z)) < 0.02 * b.geometry.cut.diameter()) continue;
    Mat2 N = eval_N(b, p, z);
    CHECK(abs(N[0][0] * N[1][1] - N[0][1] * N[1][0] - 1) < Real(1e-8));
    if (checked < 4) {
      Mat2 F = eval_N(b, flipped, z);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(abs(F[r][c] - N[r][c]) < Real(1e-20) * (abs(N[r][c]) + 1));
    }
    ++checked;
  }
  Mat2 Nf = eval_N(b, p, dir * Real(500));
  CHECK(abs(Nf[0][0] - 1) < Real(0.01));
  CHECK(abs(Nf[1][1] - 1) < Real(0.01));
  CHECK(abs(Nf[0][1]) < Real(0.01));
  CHECK(abs(Nf[1][0]) < Real(0.01));
}

TEST_CASE("strong asymptotics of Q_n and R_n") {
  ScopedPrecision sp(kDigits);
  const auto& fx = fig1_fixture();
  const auto& b = fx.bundle;
  std::vector<Complex> probes{Complex(Real(3.5), Real(1)), Complex(Real(-3), Real(2)), Complex(Real(0.5), Real(-2.5))};
  Real errQ[2][3], errR[2][3];
  int idx = 0;
  for (int n : {20, 40}) {
    const auto& p = fig1_parametrix(n);
    int dp = 4 * n + 20;
    PadeTriple t;
    Complex sign(0);
    for (int i = 0; i < 3; ++i) {
      Prediction pr = predict(b, p, probes[i]);
      Complex Q, R;
      {
        ScopedPrecision hp(dp);
        if (i == 0) t = frobenius_solve(fx.cfg, n, PrecisionPolicy::with_digits(dp));
        auto pts = fx.cfg.points();
        CutSystem cut = rebase_cut(fx.raw.cut, {pts[0], pts[1], pts[2], promote(fx.raw.v)});
        Q = t.Q(promote(probes[i]));
        R = direct_remainder(t, fx.cfg, cut, promote(probes[i]));
      }
      if (i == 0) sign = (R / pr.r_frak).real() > 0 ? Complex(1) : Complex(-1);
      errQ[idx][i] = abs(Q / pr.chi - 1);
      errR[idx][i] = abs(sign * R / pr.r_frak - 1);
    }
    ++idx;
  }
  for (int i = 0; i < 3; ++i) {
    CHECK(errQ[1][i] / errQ[0][i] < Real(0.7));
    CHECK(errQ[1][i] < Real(0.05));
    CHECK(errR[1][i] / errR[0][i] < Real(0.7));
    CHECK(errR[1][i] < Real(0.05));
  }
  // chi z^-n and r z^(n+1) approach finite limits
  const auto& p = fig1_parametrix(20);
  Complex dir(Real(0.6), Real(0.8));
  Complex c1[2], c2[2];
  for (int i = 0; i < 2; ++i) {
    Complex z = dir * Real(200 * (i + 1));
    Prediction pr = predict(b, p, z);
    c1[i] = pr.chi * exp(-20 * log(z));
    c2[i] = pr.r_frak * exp(21 * log(z));
  }
  CHECK(abs(c1[1] / c1[0] - 1) < Real(0.05));
  CHECK(abs(c2[1] / c2[0] - 1) < Real(0.05));
}

TEST_CASE("Nuttall boundary relations") {
  ScopedPrecision sp(kDigits);
  const auto& b = fig1_fixture().bundle;
  const auto& p = fig1_parametrix(20);
  std::vector<double> fr{0.15, 0.3, 0.5, 0.7, 0.85};
  Real dev = nuttall_boundary_check(b, p, fr);
  CHECK(dev < Real(1e-6));
  ParametrixData flipped = p;
  flipped.szego = flip_sign(p.szego);
  CHECK(abs(nuttall_boundary_check(b, flipped, fr) - dev) < Real(1e-6));
  // negative control: kappa perturbed by 1 percent
  auto kap = kappas(b.geometry.masses, b.geometry.orientation);
  for (auto& x : kap.kappa) x *= Real(1.01);
  auto k = index_constants(b.cfg, kap, 20);
  auto inv = jacobi_inversion(b, k);
  auto bad = parametrix(b, k, inv, szego_function(b, k, inv), eta_differential(b, inv));
  CHECK(nuttall_boundary_check(b, bad, {0.5}) > Real(0.1));
}

TEST_CASE("dependence on n through kappa^n only") {
  ScopedPrecision sp(kDigits);
  // equal masses: kappa_j are cube roots of unity, so n and n + 3 coincide
  const auto& b = cube_fixture().bundle;
  auto p1 = build_parametrix(b, 4);
  auto p2 = build_parametrix(b, 7);
  CHECK(abs(p1.eta.delta1 - p2.eta.delta1) < Real(1e-15));
  CHECK(abs(p1.szego.F_infinity - p2.szego.F_infinity) < Real(1e-15));
  CHECK(abs(p1.inversion.z_n.z - p2.inversion.z_n.z) < Real(1e-15));
  Complex z(Real(1.7), Real(0.9));
  Mat2 N1 = eval_N(b, p1, z), N2 = eval_N(b, p2, z);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) CHECK(abs(N1[r][c] - N2[r][c]) < Real(1e-15));
}
