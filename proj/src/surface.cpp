#include "padelab/surface.hpp"

#include <algorithm>
#include <cmath>

namespace padelab {

namespace {

using CD = std::complex<double>;

Complex inv_w(const Complex&, std::span<const Complex> L) { return Complex(1) / w_from_logs(L); }

Complex from_cd(const CD& z) { return Complex(Real(z.real()), Real(z.imag())); }

// Angles of polygon vertices on a circular arc, at most `step` apart.
std::vector<Complex> arc_vertices(const Complex& centre, double r, double th0, double sweep, double step) {
  int n = std::max(1, static_cast<int>(std::ceil(std::abs(sweep) / step)));
  std::vector<Complex> out;
  for (int k = 1; k <= n; ++k) out.push_back(centre + from_cd(std::polar(r, th0 + sweep * k / n)));
  return out;
}

double wrap(double a) {
  while (a > M_PI) a -= 2 * M_PI;
  while (a <= -M_PI) a += 2 * M_PI;
  return a;
}

// Sweep from angle a to b the long way round.
double long_sweep(double a, double b) {
  double d = wrap(b - a);
  return d > 0 ? d - 2 * M_PI : d + 2 * M_PI;
}

int count_crossings(const CutSystem& cut, const CD& p, const CD& q) {
  auto cross = [](const CD& u, const CD& v) { return u.real() * v.imag() - u.imag() * v.real(); };
  int n = 0;
  for (const auto& a : cut.arcs())
    for (std::size_t i = 0; i + 1 < a.dnodes.size(); ++i) {
      const CD &c = a.dnodes[i], &d = a.dnodes[i + 1];
      double d1 = cross(q - p, c - p), d2 = cross(q - p, d - p);
      double d3 = cross(d - c, p - c), d4 = cross(d - c, q - c);
      if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) ++n;
    }
  return n;
}

// Appends start -> far circle -> z (then `finish`) to c, never crossing the arcs.
void join_far(const CutSystem& cut, Contour& c, const Complex& z, const std::vector<Complex>& finish) {
  auto e1 = cut.escape(c.end_point());
  auto e2 = cut.escape(z);
  std::vector<Complex> verts;
  if (e1.size() > 1) verts.push_back(e1[1]);
  verts.push_back(e1[0]);
  CD f1 = to_cd(e1[0]), f2 = to_cd(e2[0]);
  double R = std::max(std::abs(f1), std::abs(f2));
  CD g1 = f1 * (R / std::abs(f1)), g2 = f2 * (R / std::abs(f2));
  if (std::abs(g1 - f1) > 1e-9 * R) verts.push_back(from_cd(g1));
  double th = std::arg(g1), sweep = wrap(std::arg(g2) - th);
  auto arcv = arc_vertices(Complex(0), R, th, sweep, M_PI / 18);
  if (!arcv.empty()) arcv.pop_back();
  verts.insert(verts.end(), arcv.begin(), arcv.end());
  verts.push_back(from_cd(g2));
  if (std::abs(g2 - f2) > 1e-9 * R) verts.push_back(e2[0]);
  if (e2.size() > 1) verts.push_back(e2[1]);
  verts.push_back(z);
  verts.insert(verts.end(), finish.begin(), finish.end());
  // drop repeated vertices
  std::vector<Complex> clean;
  for (const auto& p : verts)
    if (clean.empty() ? abs(p - c.end_point()) > 0 : abs(p - clean.back()) > 0) clean.push_back(p);
  c.append_polyline(clean);
}

// From infinity on sheet 1 across the midpoint of Gamma_2 onto sheet 2.
Contour sheet2_prefix(const CutSystem& cut) {
  const Arc& a = cut.arcs()[1];
  std::size_t node = a.node_at(0.5);
  Contour c = cut.side_route(1, node, Side::Plus);
  Complex n = I() * a.tangent(node);
  c.append_polyline({a.nodes[node] - n * Real(1e-3 * cut.diameter())});
  return c;
}

Complex boundary_offset(const CutSystem& cut, int arc, std::size_t node, Side side) {
  const Arc& a = cut.arcs().at(arc);
  Complex n = side == Side::Plus ? I() * a.tangent(node) : -I() * a.tangent(node);
  double spacing = std::min(std::abs(a.dnodes[node + 1] - a.dnodes[node]), std::abs(a.dnodes[node] - a.dnodes[node - 1]));
  double to_end = std::min(std::abs(a.dnodes[node] - a.dnodes.front()), std::abs(a.dnodes[node] - a.dnodes.back()));
  double eps = std::min({1e-3 * cut.diameter(), 0.25 * spacing, 0.1 * to_end});
  return a.nodes[node] + n * Real(eps);
}

}  // namespace

std::array<Real, 2> Lattice::coords(const Complex& z) const {
  Real a = wb.real(), b = wa.real(), c = wb.imag(), d = wa.imag();
  Real det = a * d - b * c;
  return {(d * z.real() - b * z.imag()) / det, (a * z.imag() - c * z.real()) / det};
}

Complex Lattice::reduce_near_zero(const Complex& z) const {
  auto x = coords(z);
  Complex base = z - wb * Real(round(x[0])) - wa * Real(round(x[1]));
  Complex best = base;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      Complex c = base - wb * Real(i) - wa * Real(j);
      if (abs(c) < abs(best)) best = c;
    }
  return best;
}

Complex w_sheet1(const CutSystem& cut, const Complex& z) { return w_from_logs(cut.route(z).end_logs()); }

Complex w_boundary(const CutSystem& cut, int arc, std::size_t node, Side side) {
  return w_from_logs(cut.side_logs(arc, node, side));
}

Periods compute_periods(const StarGeometry& g, const PrecisionPolicy& pol) {
  Periods p;
  for (int j = 0; j < 3; ++j) {
    auto c = g.cut.arc_contour(j, Side::Plus, 2, 2);
    for (int k = 0; k < 3; ++k) {
      Complex v = integrate(
          [k](const Complex& t, std::span<const Complex> L) { return pow(t, k) / w_from_logs(L); }, c, pol);
      p.M[j][k] = -v / (2 * pi() * I());
    }
  }
  p.tau = p.M[0][0] / p.M[2][0];
  p.S = (g.v + g.a[0] + g.a[1] + g.a[2]) / 2;
  p.a_period = -4 * pi() * I() * p.M[0][0];
  p.b_period = -4 * pi() * I() * p.M[2][0];
  return p;
}

Contour hugging_cycle(const StarGeometry& g, Cycle cyc, double h) {
  const int j = cyc == Cycle::A ? 0 : 2;
  const Arc& arc = g.cut.arcs()[j];
  const CD a = arc.dnodes.front(), v = arc.dnodes.back();
  const double r = 2 * h;
  std::vector<std::size_t> idx;
  for (std::size_t k = 1; k + 1 < arc.dnodes.size(); ++k) {
    const CD& z = arc.dnodes[k];
    if (std::abs(z - a) < r || std::abs(z - v) < r) continue;
    if (!idx.empty() && std::abs(z - arc.dnodes[idx.back()]) < h) continue;
    idx.push_back(k);
  }
  if (idx.size() < 2) throw CycleThroughSingularity("hugging cycle: offset too large for the arc");
  std::vector<Complex> left, right;
  for (auto k : idx) {
    Complex n = I() * arc.tangent(k) * Real(h);
    left.push_back(arc.nodes[k] + n);
    right.push_back(arc.nodes[k] - n);
  }
  std::reverse(right.begin(), right.end());
  std::vector<Complex> verts = left;
  const Complex va = g.cut.centres()[arc.start], vv = g.cut.centres()[arc.end];
  double th = std::arg(to_cd(left.back() - vv));
  double rr = std::abs(to_cd(left.back() - vv));
  auto cap = arc_vertices(vv, rr, th, long_sweep(th, std::arg(to_cd(right.front() - vv))), M_PI / 12);
  cap.pop_back();
  verts.insert(verts.end(), cap.begin(), cap.end());
  verts.insert(verts.end(), right.begin(), right.end());
  th = std::arg(to_cd(right.back() - va));
  rr = std::abs(to_cd(right.back() - va));
  cap = arc_vertices(va, rr, th, long_sweep(th, std::arg(to_cd(left.front() - va))), M_PI / 12);
  cap.pop_back();
  verts.insert(verts.end(), cap.begin(), cap.end());
  verts.push_back(left.front());
  auto logs = g.cut.route(left.front()).end_logs();
  Contour c = Contour::polyline(g.cut.centres(), verts, 0, logs);
  c.set_closed(true);
  return c;
}

Contour circle_cycle(const StarGeometry& g, Cycle cyc) {
  const int j = cyc == Cycle::A ? 0 : 2;
  Complex aj = g.a[j];
  Complex mid = (aj + g.v) / 2;
  Real r = abs(aj - g.v) * Real(0.65);
  for (int k = 0; k < 3; ++k)
    if (k != j && abs(g.a[k] - mid) < r * Real(1.02))
      throw CycleThroughSingularity("circle cycle encloses or touches another branch point");
  Real phi0 = atan2((aj - g.v).imag(), (aj - g.v).real());
  Complex start = mid + Complex(cos(phi0), sin(phi0)) * r;
  auto logs = g.cut.route(start).end_logs();
  return Contour::circle(g.cut.centres(), mid, r, logs, 96, phi0, true);
}

Contour surface_path(const SurfaceBundle& b, const SurfacePoint& p) {
  if (p.at_infinity) throw std::logic_error("surface_path: point at infinity");
  const CutSystem& cut = b.geometry.cut;
  if (p.sheet == 1) return cut.route(p.z);
  if (cut.distance(to_cd(p.z)) <= cut.on_cut_tolerance()) throw OnCut("surface_path: point on the cut");
  Contour c = sheet2_prefix(cut);
  join_far(cut, c, p.z, {});
  return c;
}

Contour surface_path_boundary(const SurfaceBundle& b, int arc, std::size_t node, Side side, int sheet) {
  const CutSystem& cut = b.geometry.cut;
  if (sheet == 1) return cut.side_route(arc, node, side);
  Contour c = sheet2_prefix(cut);
  join_far(cut, c, boundary_offset(cut, arc, node, side), {cut.arcs()[arc].nodes[node]});
  return c;
}

Complex abel_map(const SurfaceBundle& b, const SurfacePoint& p) {
  if (p.at_infinity) return p.sheet == 1 ? Complex(0) : b.abel_inf2;
  Complex I0 = integrate(inv_w, surface_path(b, p), b.policy);
  return -I0 / (2 * b.periods.M[2][0]);
}

namespace {

Complex abel_inf2_value(const SurfaceBundle& b) {
  const CutSystem& cut = b.geometry.cut;
  Contour c = sheet2_prefix(cut);
  auto e = cut.escape(c.end_point());
  std::vector<Complex> verts;
  if (e.size() > 1) verts.push_back(e[1]);
  verts.push_back(e[0]);
  c.append_polyline(verts);
  Complex I0 = integrate(inv_w, c, b.policy);
  // tail from the far point to infinity on sheet 2, where w = -w_sheet1
  Contour tail = Contour::from_infinity(cut.centres(), e[0]);
  Complex It = integrate([](const Complex&, std::span<const Complex> L) { return -Complex(1) / w_from_logs(L); },
                         tail, b.policy);
  return -(I0 - It) / (2 * b.periods.M[2][0]);
}

Complex abel_v_value(const SurfaceBundle& b) {
  const StarGeometry& g = b.geometry;
  // approach v along the bisector of Gamma_1 and Gamma_2 inside their sector
  auto dir = [&](int j) {
    const auto& d = g.cut.arcs()[j].dnodes;
    CD u = d[d.size() - 2] - d.back();
    return u / std::abs(u);
  };
  CD d1 = dir(0), d2 = dir(1);
  CD bis = d1 + d2;
  if (std::abs(bis) < 1e-8) bis = d1 * CD(0, 1);
  bis /= std::abs(bis);
  double rho = 1e9;
  for (const auto& a : g.a) rho = std::min(rho, std::abs(to_cd(a - g.v)));
  rho *= 0.1;
  Complex q = g.v + from_cd(bis * rho);
  if (g.cut.distance(to_cd(q)) < 0.2 * rho) q = g.v - from_cd(bis * rho);
  Contour c = g.cut.route(q);
  c.append_polyline({g.v}, 2);
  Complex I0 = integrate(inv_w, c, b.policy);
  return -I0 / (2 * b.periods.M[2][0]);
}

// sqrt(A V) in double, continued from the previous value.
CD w_continue(const std::vector<CD>& centres, const CD& t, const CD& prev) {
  CD p = 1;
  for (const auto& c : centres) p *= t - c;
  CD s = std::sqrt(p);
  return std::abs(s - prev) <= std::abs(s + prev) ? s : -s;
}

AbelGrid build_grid(const SurfaceBundle& b) {
  const int nr = 64, nth = 64;
  std::vector<CD> cen;
  for (const auto& c : b.geometry.cut.centres()) cen.push_back(to_cd(c));
  CD c0 = 0;
  for (const auto& c : cen) c0 += c / double(cen.size());
  const double R0 = 0.5 * b.geometry.cut.diameter();
  const CD scale = -1.0 / (2.0 * to_cd(b.periods.M[2][0]));
  const CD inf2 = to_cd(b.abel_inf2);
  static const double gx[8] = {0.019855071751231856, 0.10166676129318664, 0.2372337950418355, 0.4082826787521751,
                               0.5917173212478249, 0.7627662049581645, 0.8983332387068134, 0.9801449282487681};
  static const double gw[8] = {0.05061426814518813, 0.11119051722668724, 0.15685332293894363, 0.18134189168918100,
                               0.18134189168918100, 0.15685332293894363, 0.11119051722668724, 0.05061426814518813};
  AbelGrid g;
  for (int sheet = 1; sheet <= 2; ++sheet) {
    const double sg = sheet == 1 ? 1.0 : -1.0;
    for (int j = 0; j < nth; ++j) {
      CD e = std::polar(1.0, 2 * M_PI * (j + 0.5) / nth);
      auto radius = [&](int i) { return R0 * std::tan(M_PI * (i + 0.5) / (2.0 * nr)); };
      CD z = c0 + radius(nr - 1) * e;
      // tail from infinity: t = z / u, w principal near infinity
      CD val = sheet == 1 ? CD(0) : inf2;
      CD tail = 0;
      for (int k = 0; k < 8; ++k) {
        double u = gx[k];
        CD t = z / u;
        CD p = 1;
        for (const auto& c : cen) p *= 1.0 - c / t;
        CD w = sg * t * t * std::sqrt(p);
        tail += gw[k] * (-z / (u * u)) / w;
      }
      val += scale * tail;
      CD pr = 1;
      for (const auto& c : cen) pr *= 1.0 - c / z;
      CD w = sg * z * z * std::sqrt(pr);
      int sh = sheet;
      std::vector<std::pair<CD, int>> ray;
      std::vector<CD> vals;
      ray.push_back({z, sh});
      vals.push_back(val);
      for (int i = nr - 2; i >= 0; --i) {
        CD zn = c0 + radius(i) * e;
        CD seg = 0;
        CD wprev = w;
        for (int k = 0; k < 8; ++k) {
          CD t = z + (zn - z) * gx[k];
          wprev = w_continue(cen, t, wprev);
          seg += gw[k] / wprev;
        }
        seg *= zn - z;
        w = w_continue(cen, zn, wprev);
        if (count_crossings(b.geometry.cut, z, zn) % 2) sh = 3 - sh;
        val += scale * seg;
        z = zn;
        ray.push_back({z, sh});
        vals.push_back(val);
      }
      for (std::size_t i = 0; i < ray.size(); ++i) {
        g.z.push_back(ray[i].first);
        g.sheet.push_back(ray[i].second);
        g.value.push_back(vals[i]);
      }
    }
  }
  return g;
}

}  // namespace

SurfaceBundle::SurfaceBundle(const BranchConfig& c, const StarGeometry& g, const PrecisionPolicy& pol)
    : cfg(g.orientation == -1 ? c.conjugated() : c),
      geometry(g.orientation == -1 ? mirror_star(g) : g),
      mirrored(g.orientation == -1),
      policy(pol) {
  cfg.require_three_point();
  ScopedPrecision sp(pol);
  periods = compute_periods(geometry, policy);
  lattice.wb = 2 * pi() * I();
  lattice.wa = 2 * pi() * I() * periods.tau;
  abel_v = abel_v_value(*this);
  abel_inf2 = abel_inf2_value(*this);
  grid = build_grid(*this);
}

IndexConstants index_constants(const BranchConfig& cfg, const JumpConstants& kappa, int n) {
  IndexConstants k;
  k.n = n;
  auto al = cfg.exponents_real();
  for (int j = 0; j < 3; ++j) {
    Real x = pi() * al[j];
    k.tau_j[j] = Complex(cos(x), -sin(x));
    k.t_j[j] = Complex(Real(0), 2 * sin(x));
    k.s_nj[j] = k.t_j[j] * pow(kappa.kappa[j], n);
  }
  return k;
}

}  // namespace padelab

namespace padelab {

namespace {

// Newton state for the Abel map, continued step by step from a seed. Away
// from the branch points the branch of w is carried by continued logs; within
// a small disc around a branch point b the uniformizer s = sqrt(z - b) is used
// and w = s g(s) with g analytic and nonvanishing.
class AbelWalker {
 public:
  AbelWalker(const SurfaceBundle& b, const SurfacePoint& seed) : b_(&b), cut_(&b.geometry.cut) {
    k_ = -Complex(1) / (2 * b.periods.M[2][0]);
    const auto& cs = cut_->centres();
    for (std::size_t i = 0; i < cs.size(); ++i) {
      Real m = -1;
      for (std::size_t j = 0; j < cs.size(); ++j)
        if (j != i && (m < 0 || abs(cs[j] - cs[i]) < m)) m = abs(cs[j] - cs[i]);
      radius_.push_back(m * Real(0.15));
    }
    for (const auto& c : cs) c0_ += c / Real(cs.size());
    Contour c = surface_path(b, seed);
    z_ = seed.z;
    A_ = k_ * integrate(inv_w, c, b.policy);
    L_ = c.end_logs();
    maybe_enter_disc();
  }

  const Complex& value() const { return A_; }
  const Complex& z() const { return z_; }
  Complex w() const { return disc_ < 0 ? w_from_logs(L_) : s_ * g(s_); }
  // dA / dvar for the current Newton variable.
  Complex deriv() const {
    if (disc_ >= 0) return 2 * k_ / g(s_);
    Complex d = k_ / w_from_logs(L_);
    if (far()) d *= -(z_ - c0_) * (z_ - c0_);  // variable 1/(z - c0)
    return d;
  }
  // Trial state after a Newton increment in the current variable.
  AbelWalker step(const Complex& dvar) const {
    AbelWalker n = *this;
    if (disc_ >= 0) {
      Complex s1 = s_ + dvar;
      Complex ds = s1 - s_;
      auto f = [&](const Real& u) { return 2 * ds / g(s_ + ds * u); };
      n.A_ = A_ + k_ * integrate_unit(f, b_->policy.quad_rel_tol);
      n.s_ = s1;
      n.z_ = centre() + s1 * s1;
      if (abs(n.z_ - centre()) > radius_[disc_]) n.leave_disc();
      return n;
    }
    Complex z1 = far() ? c0_ + Complex(1) / (Complex(1) / (z_ - c0_) + dvar) : z_ + dvar;
    Contour c = Contour::polyline(cut_->centres(), {z_, z1}, 0, L_);
    n.A_ = A_ + k_ * integrate(inv_w, c, b_->policy);
    n.L_ = c.end_logs();
    n.z_ = z1;
    n.maybe_enter_disc();
    return n;
  }
  // Largest admissible |dvar|.
  Real cap() const {
    if (disc_ >= 0) return sqrt(radius_[disc_]) / 2;
    Real d = -1;
    for (const auto& c : cut_->centres())
      if (d < 0 || abs(z_ - c) < d) d = abs(z_ - c);
    d /= 2;
    if (far()) return d / (abs(z_ - c0_) * abs(z_ - c0_));
    return d;
  }

 private:
  bool far() const { return abs(z_ - c0_) > Real(4 * cut_->diameter()); }
  const Complex& centre() const { return cut_->centres()[disc_]; }
  // g(s) = w / s up to the fixed sign sigma_
  Complex g(const Complex& s) const {
    const auto& cs = cut_->centres();
    Complex t = centre() + s * s;
    Complex r = sigma_;
    for (std::size_t j = 0; j < cs.size(); ++j)
      if (static_cast<int>(j) != disc_) r *= base_[j] * sqrt((t - cs[j]) / (centre() - cs[j]));
    return r;
  }
  void maybe_enter_disc() {
    const auto& cs = cut_->centres();
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (abs(z_ - cs[i]) < radius_[i] / 2) {
        disc_ = static_cast<int>(i);
        base_.assign(cs.size(), Complex(1));
        for (std::size_t j = 0; j < cs.size(); ++j)
          if (j != i) base_[j] = sqrt(cs[i] - cs[j]);
        s_ = sqrt(z_ - cs[i]);
        sigma_ = Complex(1);
        Complex ratio = w_from_logs(L_) / (s_ * g(s_));
        sigma_ = ratio.real() > 0 ? Complex(1) : Complex(-1);
        return;
      }
  }
  void leave_disc() {
    Complex w0 = s_ * g(s_);
    const auto& cs = cut_->centres();
    L_.assign(cs.size(), Complex(0));
    for (std::size_t j = 0; j < cs.size(); ++j) L_[j] = log(z_ - cs[j]);
    if (abs(w_from_logs(L_) + w0) < abs(w_from_logs(L_) - w0)) L_[disc_] += 2 * pi() * I();
    disc_ = -1;
  }

  const SurfaceBundle* b_;
  const CutSystem* cut_;
  Complex k_, c0_{0};
  std::vector<Real> radius_;
  Complex z_, A_;
  std::vector<Complex> L_;
  int disc_ = -1;
  Complex s_, sigma_{1};
  std::vector<Complex> base_;
};

std::optional<AbelWalker> newton_abel(const SurfaceBundle& b, const Complex& target, const SurfacePoint& seed) {
  const Real tol = b.policy.newton_tol * 10;
  AbelWalker p(b, seed);
  Complex r = b.lattice.reduce_near_zero(p.value() - target);
  for (int it = 0; it < 80; ++it) {
    if (abs(r) < tol) return p;
    Complex dv = -r / p.deriv();
    Real cap = p.cap();
    if (abs(dv) > cap) dv *= cap / abs(dv);
    bool improved = false;
    for (int half = 0; half < 30 && !improved; ++half, dv /= 2) {
      AbelWalker q = p.step(dv);
      Complex rn = b.lattice.reduce_near_zero(q.value() - target);
      if (abs(rn) < abs(r)) {
        p = q;
        r = rn;
        improved = true;
      }
    }
    if (!improved) return std::nullopt;
  }
  return abs(r) < tol ? std::optional<AbelWalker>(p) : std::nullopt;
}

// Sheet of (z, w): compared with sheet 1 at z, or at a nearby point off the cut.
int sheet_of(const CutSystem& cut, const Complex& z, const Complex& w) {
  Complex zz = z;
  double dist = 0;
  int arc = cut.nearest_arc(to_cd(z), &dist);
  if (dist <= 2 * cut.on_cut_tolerance()) {
    const Arc& a = cut.arcs()[arc];
    std::size_t best = 0;
    for (std::size_t k = 0; k < a.dnodes.size(); ++k)
      if (std::abs(a.dnodes[k] - to_cd(z)) < std::abs(a.dnodes[best] - to_cd(z))) best = k;
    CD away = to_cd(z) - a.dnodes[best];
    if (std::abs(away) == 0) away = CD(0, 1) * (a.dnodes[std::min(best + 1, a.dnodes.size() - 1)] - a.dnodes[best]);
    zz = z + from_cd(away / std::abs(away) * (4 * cut.on_cut_tolerance()));
    // continue w from z to zz along the short segment
    Complex w1 = w_sheet1(cut, zz);
    Complex wz = w * sqrt(w1 * w1 / (w * w));  // analytic continuation over a short step
    return abs(wz - w1) < abs(wz + w1) ? 1 : 2;
  }
  Complex w1 = w_sheet1(cut, z);
  return abs(w - w1) < abs(w + w1) ? 1 : 2;
}

}  // namespace

InversionResult jacobi_inversion(const SurfaceBundle& b, const IndexConstants& k) {
  ScopedPrecision sp(b.policy);
  InversionResult out;
  const Complex tpi = 2 * pi() * I();
  const Complex& tau = b.periods.tau;
  Complex L21 = principal_log(k.s_nj[1] / k.s_nj[0]);
  Complex L23 = principal_log(k.s_nj[1] / k.s_nj[2]);
  Complex T00 = -tpi * tau - tau * L21 - L23;
  auto x0 = b.lattice.coords(-b.abel_v);
  auto xt = b.lattice.coords(T00 - b.abel_v);
  const Real edge = pow10(-12);
  for (int i = 0; i < 2; ++i) {
    Real f = xt[i] - floor(xt[i]);
    if (f < edge || f > 1 - edge) throw AmbiguousBranch("jacobi_inversion: target on the boundary of the cell");
  }
  int k2 = static_cast<int>(floor(xt[0]).convert_to<long>() - floor(x0[0]).convert_to<long>());
  int k1 = static_cast<int>(floor(xt[1]).convert_to<long>() - floor(x0[1]).convert_to<long>());
  out.log_branch_choices = {k1, k2};
  out.log21 = L21 + tpi * Real(k1);
  out.log23 = L23 + tpi * Real(k2);
  out.target = -tpi * tau * (1 + out.log21 / tpi) - out.log23;

  const Real ptol = sqrt(b.policy.newton_tol);
  if (abs(b.lattice.reduce_near_zero(out.target)) < ptol) {
    out.pathological = true;
    out.z_n = {Complex(0), 1, true};
    return out;
  }
  if (abs(b.lattice.reduce_near_zero(out.target - b.abel_inf2)) < ptol) {
    out.pathological = true;
    out.z_n = {Complex(0), 2, true};
    return out;
  }

  // seeds from the coarse table, best first
  const CD tcd = to_cd(out.target);
  std::vector<std::pair<double, std::size_t>> order;
  Lattice ld = b.lattice;
  for (std::size_t i = 0; i < b.grid.z.size(); ++i) {
    CD d = b.grid.value[i] - tcd;
    auto x = ld.coords(from_cd(d));
    double a = to_d(x[0]), c = to_d(x[1]);
    a -= std::round(a);
    c -= std::round(c);
    CD red = a * to_cd(ld.wb) + c * to_cd(ld.wa);
    order.push_back({std::abs(red), i});
  }
  std::partial_sort(order.begin(), order.begin() + 8, order.end());
  for (int s = 0; s < 8; ++s) {
    std::size_t i = order[s].second;
    SurfacePoint seed{from_cd(b.grid.z[i]), b.grid.sheet[i], false};
    std::optional<AbelWalker> res;
    try {
      res = newton_abel(b, out.target, seed);
    } catch (const OnCut&) {
      continue;
    }
    if (!res) continue;
    out.w_n = res->w();
    out.z_n = {res->z(), sheet_of(b.geometry.cut, res->z(), out.w_n), false};
    out.residual = abs(b.lattice.reduce_near_zero(res->value() - out.target));
    return out;
  }
  throw NewtonDiverged("jacobi_inversion: no seed converged");
}

}  // namespace padelab

namespace padelab {

namespace {

constexpr double kHugOffset = 0.01;  // times diam

Contour single_leg(const Contour& c, const Leg& leg) {
  Contour one(c.centres());
  one.legs().push_back(leg);
  return one;
}

// Planar winding number of a closed polyline contour around z.
int winding(const Contour& c, const CD& z) {
  double total = 0;
  for (const auto& leg : c.legs()) total += std::arg((to_cd(leg.b) - z) / (to_cd(leg.a) - z));
  return static_cast<int>(std::lround(total / (2 * M_PI)));
}

// Branch of w at the point of the leg nearest to z, and that distance.
std::pair<Complex, double> w_nearest(const Contour& one, const Complex& z) {
  const Leg& leg = one.legs().front();
  Complex best_w;
  double best = -1;
  std::vector<Complex> L;
  for (int i = 0; i <= 16; ++i) {
    Complex t, dt;
    one.eval_leg(leg, Real(i) / 16, t, dt, L);
    double d = std::abs(to_cd(t - z));
    if (best < 0 || d < best) {
      best = d;
      best_w = w_from_logs(L);
    }
  }
  return {best_w, best};
}

}  // namespace

Complex EtaData::integrand(const Complex& t, const Complex& w) const {
  Complex s(0);
  for (const auto& c : centres) s += Complex(1) / (t - c);
  s /= -4;
  if (infinity_sheet == 0) s += (Complex(1) + w_n / w) / (2 * (t - z_n)) + (t / 2 + delta1) / w;
  else if (infinity_sheet == 2) s += (t + delta1) / w;
  else s += delta1 / w;
  return s;
}

Complex eta_integral(const SurfaceBundle& b, const EtaData& e, const Contour& c) {
  ScopedPrecision sp(b.policy);
  Complex total(0);
  const Real c1 = e.infinity_sheet == 0 ? Real(0.5) : e.infinity_sheet == 2 ? Real(1) : Real(0);
  for (const auto& leg : c.legs()) {
    Contour one = single_leg(c, leg);
    if (leg.kind == Leg::Kind::FromInfinity) {
      total += integrate([&](const Complex& t, std::span<const Complex> L) { return e.integrand(t, w_from_logs(L)); },
                         one, b.policy);
      continue;
    }
    // logarithmic parts in closed form, the rest by quadrature
    auto La = one.start_logs(), Lb = one.end_logs();
    Complex av(0);
    for (std::size_t k = 0; k < e.centres.size(); ++k) av += Lb[k] - La[k];
    total -= av / 4;
    Real lambda = 0;
    if (e.infinity_sheet == 0) {
      auto [wn, d] = w_nearest(one, e.z_n);
      (void)d;
      lambda = (e.w_n / wn).real() > 0 ? Real(1) : Real(-1);
      total += (1 + lambda) / 2 * log((leg.b - e.z_n) / (leg.a - e.z_n));
    }
    total += integrate(
        [&](const Complex& t, std::span<const Complex> L) {
          Complex w = w_from_logs(L);
          Complex r = (c1 * t + e.delta1) / w;
          if (e.infinity_sheet == 0) r += (e.w_n / w - lambda) / (2 * (t - e.z_n));
          return r;
        },
        one, b.policy);
  }
  return total;
}

Complex eta_period(const SurfaceBundle& b, const EtaData& e, Cycle cyc) {
  ScopedPrecision sp(b.policy);
  Contour loop = hugging_cycle(b.geometry, cyc, kHugOffset * b.geometry.cut.diameter());
  Complex p = eta_integral(b, e, loop);
  if (e.infinity_sheet == 0) {
    int wd = winding(loop, to_cd(e.z_n));
    if (wd != 0) {
      // z_n lies between the loop and the arc: remove its residue when the
      // loop passes it on the sheet of the pole
      Complex wbest;
      double dbest = -1;
      for (const auto& leg : loop.legs()) {
        auto [w, d] = w_nearest(single_leg(loop, leg), e.z_n);
        if (dbest < 0 || d < dbest) {
          dbest = d;
          wbest = w;
        }
      }
      if ((e.w_n / wbest).real() > 0) p -= 2 * pi() * I() * Real(wd);
    }
  }
  return p;
}

EtaData eta_differential(const SurfaceBundle& b, const InversionResult& inv) {
  ScopedPrecision sp(b.policy);
  EtaData e;
  e.centres = b.geometry.cut.centres();
  if (inv.z_n.at_infinity) {
    e.infinity_sheet = inv.z_n.sheet;
  } else {
    e.z_n = inv.z_n.z;
    e.w_n = inv.w_n;
  }
  e.delta1 = 0;
  Complex p0 = eta_period(b, e, Cycle::B);
  e.delta1 = -p0 / b.periods.b_period;
  return e;
}

// ---- Szego function ----

SzegoData flip_sign(const SzegoData& s) {
  SzegoData t = s;
  t.sign = -s.sign;
  t.F_infinity = -s.F_infinity;
  t.log_F_infinity = s.log_F_infinity + pi() * I();
  return t;
}

SzegoData szego_function(const SurfaceBundle& b, const IndexConstants& k, const InversionResult& inv) {
  ScopedPrecision sp(b.policy);
  const auto& M = b.periods.M;
  const Complex& tau = b.periods.tau;
  SzegoData s;
  s.beta1 = principal_log(k.s_nj[0]);
  s.beta2 = pi() * I() + inv.log21;
  s.beta3 = (1 + tau) * s.beta2;
  s.Xi = s.beta2 * ((M[0][2] - tau * M[2][2]) - b.periods.S * (M[0][1] - tau * M[2][1]));
  s.log_F_infinity = s.beta1 / 2 - s.beta2 * (M[0][1] - tau * M[2][1] - Real(0.5));
  s.F_infinity = exp(s.log_F_infinity);
  return s;
}

namespace {

// l_j(z) / w(z) = (1/(2 pi i)) int_{Gamma_j} dt / (w_+(t) (t - z)).
Complex ell_kernel(const SurfaceBundle& b, int j, const Complex& z, const Side* avoid) {
  const CutSystem& cut = b.geometry.cut;
  Contour c = avoid ? cut.arc_contour_avoiding(j, Side::Plus, 2, 2, *avoid) : cut.arc_contour(j, Side::Plus, 2, 2);
  Complex v = integrate(
      [&](const Complex& t, std::span<const Complex> L) { return Complex(1) / (w_from_logs(L) * (t - z)); }, c,
      b.policy);
  return v / (2 * pi() * I());
}

Side side_of(const Arc& a, const CD& z) {
  std::size_t best = 0;
  for (std::size_t k = 0; k < a.dnodes.size(); ++k)
    if (std::abs(a.dnodes[k] - z) < std::abs(a.dnodes[best] - z)) best = k;
  best = std::clamp<std::size_t>(best, 1, a.dnodes.size() - 2);
  CD tan = a.dnodes[best + 1] - a.dnodes[best - 1];
  CD rel = z - a.dnodes[best];
  return (tan.real() * rel.imag() - tan.imag() * rel.real()) > 0 ? Side::Plus : Side::Minus;
}

Complex lambda_from_ells(const SurfaceBundle& b, const SzegoData& s, const Complex& l1, const Complex& l3) {
  Complex L = s.beta1 / 2 - s.beta2 * (l1 - b.periods.tau * l3 - Real(0.5));
  if (s.sign < 0) L += pi() * I();
  return L;
}

}  // namespace

Complex szego_log(const SurfaceBundle& b, const SzegoData& s, const Complex& z) {
  ScopedPrecision sp(b.policy);
  const CutSystem& cut = b.geometry.cut;
  double dist = 0;
  int near = cut.nearest_arc(to_cd(z), &dist);
  if (dist <= cut.on_cut_tolerance()) throw OnCut("szego_log: point on the cut");
  bool bow = dist < 0.05 * cut.diameter();
  Side zs = bow ? side_of(cut.arcs()[near], to_cd(z)) : Side::Plus;
  Complex w = w_sheet1(cut, z);
  Complex l[2];
  int js[2] = {0, 2};
  for (int i = 0; i < 2; ++i) l[i] = w * ell_kernel(b, js[i], z, (bow && near == js[i]) ? &zs : nullptr);
  return lambda_from_ells(b, s, l[0], l[1]);
}

Complex szego_log_boundary(const SurfaceBundle& b, const SzegoData& s, int arc, std::size_t node, Side side) {
  ScopedPrecision sp(b.policy);
  const CutSystem& cut = b.geometry.cut;
  Complex z = cut.arcs()[arc].nodes[node];
  Complex w = w_boundary(cut, arc, node, side);
  Complex l[2];
  int js[2] = {0, 2};
  for (int i = 0; i < 2; ++i) {
    bool on = js[i] == arc;
    bool near = !on && cut.arcs()[js[i]].dnodes.size() > 1 &&
                dist_point_polyline(to_cd(z), cut.arcs()[js[i]].dnodes) < 0.05 * cut.diameter();
    Side zs = near ? side_of(cut.arcs()[js[i]], to_cd(z)) : side;
    l[i] = w * ell_kernel(b, js[i], z, (on || near) ? &zs : nullptr);
  }
  return lambda_from_ells(b, s, l[0], l[1]);
}

Complex szego_log_differential(const SurfaceBundle& b, const SzegoData& s, const Complex& z) {
  ScopedPrecision sp(b.policy);
  const CutSystem& cut = b.geometry.cut;
  const Complex a1 = cut.centres()[0];
  // approach a_1 straight from the side opposite Gamma_1
  const Arc& arc = cut.arcs()[0];
  CD d = arc.dnodes[1] - arc.dnodes[0];
  Complex q = a1 - from_cd(d / std::abs(d) * (0.05 * cut.diameter()));
  Contour ca = cut.route(q);
  ca.append_polyline({a1}, 2);
  Complex Ia = integrate(inv_w, ca, b.policy);
  Complex Iz = integrate(inv_w, cut.route(z), b.policy);
  Complex L = s.beta1 / 2 + s.Xi * (Iz - Ia);
  if (s.sign < 0) L += pi() * I();
  return L;
}

Complex szego_value(const SurfaceBundle& b, const SzegoData& s, const Complex& z) {
  return exp(szego_log(b, s, z));
}

// ---- u_1, N~_12, q and N ----

namespace {

struct Branch {
  Complex log_value, w;
};

Branch branch_along(const SurfaceBundle& b, const EtaData& e, const Contour& c) {
  return {eta_integral(b, e, c), w_from_logs(c.end_logs())};
}

Complex q_value(const ParametrixData& p, const Complex& z, const Complex& w) {
  return p.qa + p.qb * ((w + p.eta.w_n) / (z - p.eta.z_n) - z);
}

Mat2 assemble(const ParametrixData& p, const Complex& z, const Branch& u1, const Branch& g, const Complex& logF) {
  Complex lf = p.szego.log_F_infinity;
  Mat2 N;
  N[0][0] = exp(lf + u1.log_value - logF);
  N[0][1] = exp(lf + g.log_value + logF);
  N[1][0] = q_value(p, z, u1.w) * exp(u1.log_value - lf - logF);
  N[1][1] = q_value(p, z, g.w) * exp(g.log_value + logF - lf);
  return N;
}

}  // namespace

ParametrixData parametrix(const SurfaceBundle& b, const IndexConstants& k, const InversionResult& inv,
                          const SzegoData& s, const EtaData& e) {
  ScopedPrecision sp(b.policy);
  if (inv.pathological) throw PathologicalIndex("parametrix: z_n at infinity");
  ParametrixData p;
  p.eta = e;
  p.szego = s;
  p.constants = k;
  p.inversion = inv;
  const CutSystem& cut = b.geometry.cut;
  // lim z N~_12(z) at infinity from a far point on sheet 2
  Complex F = from_cd(CD(0.6, 0.8) * (8 * cut.diameter() + cut.max_centre_modulus()));
  Contour path = surface_path(b, {F, 2, false});
  Complex logG = eta_integral(b, e, path);
  Complex wF = w_from_logs(path.end_logs());
  Contour tail = Contour::from_infinity(cut.centres(), F);
  Real sigma = (wF / w_from_logs(tail.end_logs())).real() > 0 ? Real(1) : Real(-1);
  Complex It = integrate(
      [&](const Complex& t, std::span<const Complex> L) {
        return e.integrand(t, sigma * w_from_logs(L)) + Complex(1) / t;
      },
      tail, b.policy);
  p.u2_limit = exp(logG + log(F) - It);
  p.qb = -Complex(1) / (2 * p.u2_limit);
  p.qa = -p.qb * (e.z_n - b.periods.S);
  if (inv.z_n.sheet == 1) p.predicted_spurious = inv.z_n.z;
  return p;
}

Complex u1_value(const SurfaceBundle& b, const ParametrixData& p, const Complex& z) {
  return exp(eta_integral(b, p.eta, surface_path(b, {z, 1, false})));
}

Complex n12_value(const SurfaceBundle& b, const ParametrixData& p, const Complex& z) {
  return exp(eta_integral(b, p.eta, surface_path(b, {z, 2, false})));
}

Mat2 eval_N(const SurfaceBundle& b, const ParametrixData& p, const Complex& z) {
  ScopedPrecision sp(b.policy);
  Branch u1 = branch_along(b, p.eta, surface_path(b, {z, 1, false}));
  Branch g = branch_along(b, p.eta, surface_path(b, {z, 2, false}));
  return assemble(p, z, u1, g, szego_log(b, p.szego, z));
}

Mat2 eval_N_boundary(const SurfaceBundle& b, const ParametrixData& p, int arc, std::size_t node, Side side) {
  ScopedPrecision sp(b.policy);
  Complex z = b.geometry.cut.arcs()[arc].nodes[node];
  Branch u1 = branch_along(b, p.eta, surface_path_boundary(b, arc, node, side, 1));
  Branch g = branch_along(b, p.eta, surface_path_boundary(b, arc, node, side, 2));
  return assemble(p, z, u1, g, szego_log_boundary(b, p.szego, arc, node, side));
}

ParametrixData build_parametrix(const SurfaceBundle& b, int n) {
  ScopedPrecision sp(b.policy);
  auto kap = kappas(b.geometry.masses, b.geometry.orientation);
  IndexConstants k = index_constants(b.cfg, kap, n);
  InversionResult inv = jacobi_inversion(b, k);
  if (inv.pathological) throw PathologicalIndex("build_parametrix: z_n at infinity");
  EtaData e = eta_differential(b, inv);
  SzegoData s = szego_function(b, k, inv);
  return parametrix(b, k, inv, s, e);
}

Prediction predict(const SurfaceBundle& b, const ParametrixData& p, const Complex& z_caller) {
  ScopedPrecision sp(b.policy);
  Complex z = b.to_canonical(z_caller);
  const StarGeometry& g = b.geometry;
  if (g.cut.distance(to_cd(z)) <= g.cut.on_cut_tolerance()) throw OnCut("predict: point on the cut");
  Mat2 N = eval_N(b, p, z);
  Complex ph = phi(g, z, b.policy);
  Complex fh = eval_f(b.cfg, g.cut, z).f_half;
  const int n = p.constants.n;
  Complex chi = exp(Real(n) * log(ph / g.c)) * N[0][0] / fh;
  Complex r = exp(-Real(n) * log(g.c * ph)) * N[0][1] * fh;
  return {b.from_canonical(chi), b.from_canonical(r)};
}

Real nuttall_boundary_check(const SurfaceBundle& b, const ParametrixData& p, const std::vector<double>& fractions) {
  ScopedPrecision sp(b.policy);
  const StarGeometry& g = b.geometry;
  const int n = p.constants.n;
  Real worst = 0;
  for (int j = 0; j < 3; ++j)
    for (double s : fractions) {
      std::size_t node = g.cut.arcs()[j].node_at(s);
      Complex chi[2], wr[2];
      Side sides[2] = {Side::Plus, Side::Minus};
      Complex wplus;
      Complex rho;
      for (int i = 0; i < 2; ++i) {
        Mat2 N = eval_N_boundary(b, p, j, node, sides[i]);
        Complex ph = phi_boundary(g, j, node, sides[i], b.policy);
        auto logs = g.cut.side_logs(j, node, sides[i]);
        Complex fh = f_from_logs(b.cfg, g.cut, logs).f_half;
        Complex w = w_from_logs(logs);
        if (i == 0) {
          wplus = w;
          rho = boundary_f_and_rho(b.cfg, g.cut, j, node, Side::Plus).rho;
        }
        chi[i] = exp(Real(n) * log(ph / g.c)) * N[0][0] / fh;
        wr[i] = w * exp(-Real(n) * log(g.c * ph)) * N[0][1] * fh;
      }
      Complex sigma = rho * wplus;
      worst = std::max(worst, Real(abs(sigma * chi[0] - wr[1]) / abs(wr[1])));
      worst = std::max(worst, Real(abs(sigma * chi[1] - wr[0]) / abs(wr[0])));
    }
  return worst;
}

}  // namespace padelab
