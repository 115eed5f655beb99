#include "padelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "padelab/linalg.hpp"

namespace padelab {

std::vector<Real> T_exponents() { return {Real(-0.5), Real(-0.5), Real(-0.5), Real(0.5)}; }
std::vector<Real> w_exponents() { return {Real(0.5), Real(0.5), Real(0.5), Real(0.5)}; }

Complex T_from_logs(std::span<const Complex> logs) {
  return exp((logs[kV] - logs[0] - logs[1] - logs[2]) / 2);
}

Complex w_from_logs(std::span<const Complex> logs) { return exp((logs[0] + logs[1] + logs[2] + logs[kV]) / 2); }

namespace {

std::vector<Complex> centres_of(const std::array<Complex, 3>& a, const Complex& v) { return {a[0], a[1], a[2], v}; }

std::vector<Complex> principal_logs(const Complex& z, const std::vector<Complex>& centres) {
  std::vector<Complex> out;
  for (const auto& c : centres) out.push_back(principal_log(z - c));
  return out;
}

double scale_of(const std::array<Complex, 3>& a) {
  double d = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) d = std::max(d, std::abs(to_cd(a[i]) - to_cd(a[j])));
  return d;
}

void check_points(const std::array<Complex, 3>& a) {
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (a[i] == a[j]) throw CollinearPoints("branch points must be distinct");
  Complex d1 = a[1] - a[0], d2 = a[2] - a[0];
  Real cr = d1.real() * d2.imag() - d1.imag() * d2.real();
  if (abs(cr) <= Real(abs(d1) * abs(d2)) * Real(1e-12)) throw CollinearPoints("branch points are collinear");
}

// Re-part residuals and their v-derivatives for the two defining integrals.
void center_residuals(const std::array<Complex, 3>& a, const Complex& v, const PrecisionPolicy& pol,
                      std::array<Complex, 2>& I, std::array<Complex, 2>& dI) {
  auto centres = centres_of(a, v);
  for (int j = 0; j < 2; ++j) {
    Complex mid = (a[j] + v) / 2;
    auto c = Contour::polyline(centres, {a[j], mid, v}, 1, principal_logs(mid, centres), 2, 2);
    I[j] = integrate([](const Complex&, std::span<const Complex> L) { return T_from_logs(L); }, c, pol);
    dI[j] = integrate(
        [](const Complex&, std::span<const Complex> L) {
          // -T / (2 (t - v))
          return -exp((-L[kV] - L[0] - L[1] - L[2]) / 2) / 2;
        },
        c, pol);
  }
}

bool newton_center(const std::array<Complex, 3>& a, Complex v, const PrecisionPolicy& pol, Complex& out) {
  std::array<Complex, 2> I, dI;
  auto rnorm = [&](const std::array<Complex, 2>& x) { return std::max(Real(abs(x[0].real())), Real(abs(x[1].real()))); };
  double scale = scale_of(a);
  for (int it = 0; it < pol.max_iter; ++it) {
    center_residuals(a, v, pol, I, dI);
    Real r = rnorm(I);
    if (r < pol.newton_tol) {
      out = v;
      return true;
    }
    // d Re I / dx = Re I', d Re I / dy = -Im I'
    Real j00 = dI[0].real(), j01 = -dI[0].imag(), j10 = dI[1].real(), j11 = -dI[1].imag();
    Real det = j00 * j11 - j01 * j10;
    if (det == 0) return false;
    Real dx = -(j11 * I[0].real() - j01 * I[1].real()) / det;
    Real dy = -(-j10 * I[0].real() + j00 * I[1].real()) / det;
    Complex step(dx, dy);
    Real lam = 1;
    bool moved = false;
    for (int ls = 0; ls < 12; ++ls) {
      Complex cand = v + step * lam;
      bool inside = true;
      for (const auto& p : a)
        if (abs(cand - p) < Real(1e-6 * scale)) inside = false;
      if (inside) {
        std::array<Complex, 2> Ic, dIc;
        try {
          center_residuals(a, cand, pol, Ic, dIc);
          if (rnorm(Ic) < r || lam < Real(1e-3)) {
            v = cand;
            moved = true;
            break;
          }
        } catch (const Error&) {
        }
      }
      lam /= 2;
    }
    if (!moved) return false;
  }
  return false;
}

}  // namespace

Complex solve_center(const std::array<Complex, 3>& a, const PrecisionPolicy& pol) {
  check_points(a);
  Complex v;
  if (newton_center(a, (a[0] + a[1] + a[2]) / 3, pol, v)) return v;
  const int w[][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}, {4, 1, 1}, {1, 4, 1}, {1, 1, 4}, {3, 2, 1}, {1, 3, 2}, {2, 1, 3}};
  for (const auto& wt : w) {
    Complex start = (a[0] * Real(wt[0]) + a[1] * Real(wt[1]) + a[2] * Real(wt[2])) / Real(wt[0] + wt[1] + wt[2]);
    if (newton_center(a, start, pol, v)) return v;
  }
  throw NewtonDiverged("solve_center: Newton failed from the centroid and all grid starts");
}

namespace {

// Traces a level curve Re(kappa * int_{start}^z T) = 0 from a singular start.
struct TraceResult {
  std::vector<Complex> nodes;
};

TraceResult trace_level(const std::vector<Complex>& centres, const Complex& start, const Complex& dir0,
                        const Complex& kappa, const std::function<bool(const Complex&, Real)>& done,
                        const Real& tol, double scale, const PrecisionPolicy& pol) {
  TraceResult out;
  out.nodes.push_back(start);
  const double hmax = 0.02 * scale, hmin = 1e-9 * scale;
  const double max_turn = 3.0 * M_PI / 180.0;
  auto Tf = [](const Complex&, std::span<const Complex> L) { return T_from_logs(L); };

  Complex z_prev = start;
  std::vector<Complex> logs_prev;  // empty at the singular start
  Complex H_prev(0);
  Complex dir = dir0 / Real(abs(dir0));
  double h = 0.01 * scale;

  for (int step = 0; step < 20000; ++step) {
    bool accepted = false;
    Complex z_new, H_new;
    std::vector<Complex> logs_new;
    Complex u = dir;
    if (!logs_prev.empty()) {
      Complex kT = kappa * T_from_logs(logs_prev);
      u = I() * conj_c(kT) / Real(abs(kT));
      if ((u * conj_c(dir)).real() < 0) u = -u;
    }
    while (!accepted) {
      if (h < hmin) throw StepCollapse("trace: step size underflow");
      Complex z = z_prev + u * Real(h);
      bool ok = false;
      for (int it = 0; it < 30; ++it) {
        std::vector<Complex> logs_z;
        Contour seg;
        if (logs_prev.empty()) {
          logs_z = principal_logs(z, centres);
          seg = Contour::polyline(centres, {z_prev, z}, 1, logs_z, 2, 1);
        } else {
          logs_z = continue_logs(logs_prev, z_prev, z, centres);
          seg = Contour::polyline(centres, {z_prev, z}, 0, logs_prev);
        }
        Complex H = H_prev + integrate(Tf, seg, pol);
        Complex kT = kappa * T_from_logs(logs_z);
        Real g = (kappa * H).real();
        if (abs(g) < tol) {
          z_new = z;
          H_new = H;
          logs_new = logs_z;
          ok = true;
          break;
        }
        z -= g * conj_c(kT) / Real(norm(kT));
        if (abs(z - z_prev) > Real(3 * h)) break;
      }
      if (!ok) {
        h /= 2;
        continue;
      }
      Complex chord = z_new - z_prev;
      double turn = std::abs(std::arg(to_cd(chord / dir)));
      if (out.nodes.size() > 1 && turn > max_turn) {
        h /= 2;
        continue;
      }
      accepted = true;
    }
    Complex chord = z_new - z_prev;
    dir = chord / Real(abs(chord));
    out.nodes.push_back(z_new);
    z_prev = z_new;
    logs_prev = logs_new;
    H_prev = H_new;
    if (done(z_new, Real(h))) break;
    h = std::min(h * 1.5, hmax);
  }
  return out;
}

Ray make_ray(std::vector<Complex> nodes) {
  Ray r;
  r.nodes = std::move(nodes);
  for (const auto& z : r.nodes) r.dnodes.push_back(to_cd(z));
  return r;
}

}  // namespace

TracedStar trace_arcs(const Complex& v, const std::array<Complex, 3>& a, const PrecisionPolicy& pol) {
  auto centres = centres_of(a, v);
  const double scale = scale_of(a);
  TracedStar out;
  Real tol_arc = pol.newton_tol;
  Real tol_ray = pow10(-pol.decimal_digits / 4);
  Complex A_v = (v - a[0]) * (v - a[1]) * (v - a[2]);

  for (int j = 0; j < 3; ++j) {
    // A'(a_j)
    Complex Ap(1);
    for (int k = 0; k < 3; ++k)
      if (k != j) Ap *= a[j] - a[k];
    Complex d0 = -Ap / (a[j] - v);
    auto done = [&](const Complex& z, Real h) {
      Real dv = abs(z - v);
      return dv <= Real(1.5) * h || dv < Real(0.02 * scale);
    };
    auto tr = trace_level(centres, a[j], d0, Complex(1), done, tol_arc, scale, pol);
    tr.nodes.push_back(v);
    Arc arc;
    arc.nodes = std::move(tr.nodes);
    arc.start = j;
    arc.end = kV;
    arc.finalize();
    out.arcs.push_back(std::move(arc));

    // gamma_j^perp leaves a_j opposite to the arc.
    Real rt = 0;
    for (const auto& p : a) rt = std::max(rt, Real(abs(p - v)));
    out.truncation_radius = to_d(rt) * 4;
    Real R = rt * 4;
    auto far = [&, R](const Complex& z, Real) { return abs(z - v) > R; };
    auto ray = trace_level(centres, a[j], -d0, -I(), far, tol_ray, scale, pol);
    out.rays_a[j] = make_ray(std::move(ray.nodes));
  }

  // Gamma_j^perp from v: the ray direction nearest the continuation of Gamma_j through v.
  Real argA = atan2(A_v.imag(), A_v.real());
  for (int j = 0; j < 3; ++j) {
    const auto& nodes = out.arcs[j].nodes;
    Complex e = nodes.back() - nodes[nodes.size() - 2];
    double best = 1e9;
    Complex dir;
    for (int m = 0; m < 3; ++m) {
      Real ang = (argA + 2 * pi() * m) / 3;
      Complex cand(cos(ang), sin(ang));
      double diff = std::abs(std::arg(to_cd(cand / e)));
      if (diff < best) {
        best = diff;
        dir = cand;
      }
    }
    Real R = Real(out.truncation_radius);
    auto far = [&, R](const Complex& z, Real) { return abs(z - v) > R; };
    auto ray = trace_level(centres, v, dir, -I(), far, tol_ray, scale, pol);
    out.rays_v[j] = make_ray(std::move(ray.nodes));
  }
  return out;
}

std::array<Real, 3> masses(const StarGeometry& g, const PrecisionPolicy& pol) {
  std::array<Real, 3> m;
  for (int j = 0; j < 3; ++j) {
    auto c = g.cut.arc_contour(j, Side::Minus, 2, 2);
    Complex val = integrate([](const Complex&, std::span<const Complex> L) { return T_from_logs(L); }, c, pol);
    val /= I() * pi();
    m[j] = val.real();
    if (abs(val.imag()) > Real(1e-8)) throw Error("masses: equilibrium mass has a non-negligible imaginary part");
  }
  return m;
}

namespace {

Complex T_minus_inv_t(const Complex& t, std::span<const Complex> L) { return T_from_logs(L) - Complex(1) / t; }

}  // namespace

Complex capacity_constant(const StarGeometry& g, const PrecisionPolicy& pol) {
  // P on Gamma_1^perp at moderate distance from v.
  const Ray& ray = g.rays_v[0];
  double target = 0.25 * g.cut.diameter();
  std::size_t k = 1;
  for (std::size_t i = 1; i < ray.nodes.size(); ++i)
    if (std::abs(std::abs(ray.dnodes[i] - ray.dnodes[0]) - target) <
        std::abs(std::abs(ray.dnodes[k] - ray.dnodes[0]) - target))
      k = i;
  Complex P = ray.nodes[k];
  Contour route = g.cut.route(P);
  auto logsP = route.end_logs();
  std::vector<Complex> verts(ray.nodes.begin(), ray.nodes.begin() + k + 1);
  verts.front() = g.v;
  auto along = Contour::polyline(g.cut.centres(), verts, k, logsP, 2, 1);
  Complex G = integrate([](const Complex&, std::span<const Complex> L) { return T_from_logs(L); }, along, pol);
  Complex J = integrate(T_minus_inv_t, route, pol);
  return exp(G - J) / P;
}

Complex phi_on_route(const StarGeometry& g, const Contour& route, const PrecisionPolicy& pol) {
  Complex J = integrate(T_minus_inv_t, route, pol);
  return g.c * route.end_point() * exp(J);
}

Complex phi(const StarGeometry& g, const Complex& z, const PrecisionPolicy& pol) {
  return phi_on_route(g, g.cut.route(z), pol);
}

Complex phi_boundary(const StarGeometry& g, int arc, std::size_t node, Side side, const PrecisionPolicy& pol) {
  return phi_on_route(g, g.cut.side_route(arc, node, side), pol);
}

JumpConstants kappas(const std::array<Real, 3>& m, int orientation) {
  auto e = [orientation](const Real& x) {
    Real t = 2 * pi() * x * orientation;
    return Complex(cos(t), sin(t));
  };
  return {{e(m[2] - m[1]), e(-m[1]), e(m[2])}};
}

int star_orientation(const std::array<Complex, 3>& a, const Complex& v) {
  auto ang = [&](const Complex& z) {
    double t = std::arg(to_cd((z - v) / (a[0] - v)));
    return t < 0 ? t + 2 * M_PI : t;
  };
  return ang(a[1]) < ang(a[2]) ? 1 : -1;
}

namespace {

double winding(const DPolyline& closed, const DPoint& z) {
  double total = 0;
  for (std::size_t i = 0; i + 1 < closed.size(); ++i) total += std::arg((closed[i + 1] - z) / (closed[i] - z));
  return total / (2 * M_PI);
}

DPolyline build_split(const StarGeometry& g, bool ccw) {
  const DPolyline& r1 = g.rays_a[0].dnodes;
  const DPolyline& r2 = g.rays_a[1].dnodes;
  const DPolyline& g1 = g.cut.arcs()[0].dnodes;
  const DPolyline& g2 = g.cut.arcs()[1].dnodes;
  const double R = 1e3 * g.cut.diameter() + 10 * g.truncation_radius;
  auto extend = [&](const DPolyline& r) {
    DPoint d = r.back() - r[r.size() - 2];
    d /= std::abs(d);
    DPoint z = r.back();
    double b = (std::conj(z) * d).real();
    double L = -b + std::sqrt(b * b - std::norm(z) + R * R);
    return z + L * d;
  };
  DPolyline out;
  DPoint s = extend(r1);
  out.push_back(s);
  for (std::size_t i = r1.size(); i-- > 0;) out.push_back(r1[i]);
  for (std::size_t i = 1; i < g1.size(); ++i) out.push_back(g1[i]);
  for (std::size_t i = g2.size() - 1; i-- > 0;) out.push_back(g2[i]);
  for (std::size_t i = 1; i < r2.size(); ++i) out.push_back(r2[i]);
  DPoint e = extend(r2);
  out.push_back(e);
  double th0 = std::arg(e), th1 = std::arg(s);
  double sweep = th1 - th0;
  if (ccw) {
    while (sweep <= 0) sweep += 2 * M_PI;
  } else {
    while (sweep >= 0) sweep -= 2 * M_PI;
  }
  for (int k = 1; k < 256; ++k) out.push_back(std::polar(R, th0 + sweep * k / 256.0));
  out.push_back(s);
  return out;
}

}  // namespace

Region region_of(const StarGeometry& g, const Complex& zc) {
  DPoint z = to_cd(zc);
  double tol = g.cut.on_cut_tolerance();
  if (g.cut.distance(z) < tol) return Region::NearBoundary;
  for (int j = 0; j < 2; ++j)
    if (dist_point_polyline(z, g.rays_a[j].dnodes) < tol) return Region::NearBoundary;
  return std::abs(winding(g.split_closed, z)) > 0.5 ? Region::DPlus : Region::DMinus;
}

StarGeometry build_star(const std::array<Complex, 3>& a, const PrecisionPolicy& pol) {
  StarGeometry g;
  g.digits = pol.decimal_digits;
  g.a = a;
  g.v = solve_center(a, pol);
  g.orientation = star_orientation(a, g.v);
  auto tr = trace_arcs(g.v, a, pol);
  g.cut = CutSystem(centres_of(a, g.v), tr.arcs);
  g.rays_v = tr.rays_v;
  g.rays_a = tr.rays_a;
  g.truncation_radius = tr.truncation_radius;
  g.masses = masses(g, pol);
  g.c = capacity_constant(g, pol);
  // D_+ is the side holding Gamma_3.
  const Arc& g3 = g.cut.arcs()[2];
  DPoint probe = g3.dnodes[g3.dnodes.size() / 2];
  for (bool ccw : {true, false}) {
    auto cl = build_split(g, ccw);
    if (std::abs(winding(cl, probe)) > 0.5) {
      g.split_closed = std::move(cl);
      break;
    }
  }
  return g;
}

StarGeometry mirror_star(const StarGeometry& g) {
  StarGeometry m = g;
  auto cz = [](std::vector<Complex>& v) {
    for (auto& z : v) z = conj_c(z);
  };
  auto cd = [](DPolyline& v) {
    for (auto& z : v) z = std::conj(z);
  };
  for (auto& z : m.a) z = conj_c(z);
  m.v = conj_c(g.v);
  m.c = conj_c(g.c);
  m.orientation = -g.orientation;
  std::vector<Complex> centres = g.cut.centres();
  cz(centres);
  std::vector<Arc> arcs = g.cut.arcs();
  for (auto& a : arcs) {
    cz(a.nodes);
    a.finalize();
  }
  m.cut = CutSystem(centres, arcs);
  for (auto* rays : {&m.rays_v, &m.rays_a})
    for (auto& r : *rays) {
      cz(r.nodes);
      cd(r.dnodes);
    }
  cd(m.split_closed);
  return m;
}

CutSystem rebase_cut(const CutSystem& cut, const std::vector<Complex>& centres) {
  std::vector<Complex> c;
  for (const auto& z : centres) c.push_back(promote(z));
  std::vector<Arc> arcs = cut.arcs();
  for (auto& a : arcs) {
    for (auto& z : a.nodes) z = promote(z);
    a.nodes.front() = c.at(a.start);
    a.nodes.back() = c.at(a.end);
    a.finalize();
  }
  return CutSystem(c, arcs);
}

void write_arcs_csv(const StarGeometry& g, std::ostream& os) {
  os << "arc_id,s,re,im\n";
  os.precision(17);
  for (std::size_t j = 0; j < g.cut.arcs().size(); ++j) {
    const auto& d = g.cut.arcs()[j].dnodes;
    std::vector<double> len(d.size(), 0.0);
    for (std::size_t i = 1; i < d.size(); ++i) len[i] = len[i - 1] + std::abs(d[i] - d[i - 1]);
    for (std::size_t i = 0; i < d.size(); ++i)
      os << (j + 1) << ',' << len[i] / len.back() << ',' << d[i].real() << ',' << d[i].imag() << '\n';
  }
}

}  // namespace padelab
