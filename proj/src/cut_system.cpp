#include "padelab/cut_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace padelab {

namespace {

double cross(const DPoint& u, const DPoint& v) { return u.real() * v.imag() - u.imag() * v.real(); }

double dist_seg(const DPoint& z, const DPoint& a, const DPoint& b) {
  DPoint d = b - a;
  double l2 = std::norm(d);
  if (l2 == 0) return std::abs(z - a);
  double s = std::clamp(((z - a) * std::conj(d)).real() / l2, 0.0, 1.0);
  return std::abs(z - (a + s * d));
}

bool seg_cross(const DPoint& p1, const DPoint& p2, const DPoint& q1, const DPoint& q2) {
  double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

double dist_point_polyline(const DPoint& z, const DPolyline& pl) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < pl.size(); ++i) best = std::min(best, dist_seg(z, pl[i], pl[i + 1]));
  if (pl.size() == 1) best = std::abs(z - pl[0]);
  return best;
}

bool segment_hits_polyline(const DPoint& p, const DPoint& q, const DPolyline& pl) {
  for (std::size_t i = 0; i + 1 < pl.size(); ++i)
    if (seg_cross(p, q, pl[i], pl[i + 1])) return true;
  // Touching counts as a hit: reject segments passing within a hair of a node.
  double tiny = 1e-12 * (std::abs(q - p) + 1);
  for (const auto& n : pl)
    if (dist_seg(n, p, q) < tiny) return true;
  return false;
}

void Arc::finalize(std::size_t coarse_legs) {
  dnodes.clear();
  for (const auto& z : nodes) dnodes.push_back(to_cd(z));
  std::vector<double> len(dnodes.size(), 0.0);
  for (std::size_t i = 1; i < dnodes.size(); ++i) len[i] = len[i - 1] + std::abs(dnodes[i] - dnodes[i - 1]);
  coarse.clear();
  coarse.push_back(0);
  for (std::size_t k = 1; k < coarse_legs; ++k) {
    double target = len.back() * double(k) / double(coarse_legs);
    std::size_t idx = std::lower_bound(len.begin(), len.end(), target) - len.begin();
    idx = std::min(idx, dnodes.size() - 2);
    if (idx > coarse.back()) coarse.push_back(idx);
  }
  if (coarse.back() != dnodes.size() - 1) coarse.push_back(dnodes.size() - 1);
}

Complex Arc::tangent(std::size_t k) const {
  std::size_t lo = k == 0 ? 0 : k - 1;
  std::size_t hi = std::min(k + 1, nodes.size() - 1);
  Complex d = nodes[hi] - nodes[lo];
  return d / Real(abs(d));
}

std::size_t Arc::node_at(double s) const {
  std::vector<double> len(dnodes.size(), 0.0);
  for (std::size_t i = 1; i < dnodes.size(); ++i) len[i] = len[i - 1] + std::abs(dnodes[i] - dnodes[i - 1]);
  double target = s * len.back();
  std::size_t best = 1;
  for (std::size_t i = 1; i + 1 < len.size(); ++i)
    if (std::abs(len[i] - target) < std::abs(len[best] - target)) best = i;
  return best;
}

CutSystem::CutSystem(std::vector<Complex> centres, std::vector<Arc> arcs)
    : centres_(std::move(centres)), arcs_(std::move(arcs)) {
  for (auto& a : arcs_)
    if (a.dnodes.size() != a.nodes.size() || a.coarse.empty()) a.finalize();
  diameter_ = 0;
  rmax_ = 0;
  for (const auto& a : centres_) {
    rmax_ = std::max(rmax_, std::abs(to_cd(a)));
    for (const auto& b : centres_) diameter_ = std::max(diameter_, std::abs(to_cd(a) - to_cd(b)));
  }
  for (const auto& arc : arcs_)
    for (const auto& z : arc.dnodes) rmax_ = std::max(rmax_, std::abs(z));
  if (diameter_ == 0) diameter_ = 1;
}

double CutSystem::distance(const DPoint& z) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : arcs_) best = std::min(best, dist_point_polyline(z, a.dnodes));
  return best;
}

int CutSystem::nearest_arc(const DPoint& z, double* d) const {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < arcs_.size(); ++j) {
    double dj = dist_point_polyline(z, arcs_[j].dnodes);
    if (dj < bd) {
      bd = dj;
      best = static_cast<int>(j);
    }
  }
  if (d) *d = bd;
  return best;
}

bool CutSystem::clear(const DPoint& p, const DPoint& q, const std::vector<DPolyline>& extra) const {
  for (const auto& a : arcs_)
    if (segment_hits_polyline(p, q, a.dnodes)) return false;
  for (const auto& pl : extra)
    if (segment_hits_polyline(p, q, pl)) return false;
  return true;
}

double CutSystem::far_radius(const std::vector<DPolyline>& extra) const {
  double r = 2 * rmax_ + diameter_;
  for (const auto& pl : extra)
    for (const auto& z : pl) r = std::max(r, 1.2 * std::abs(z));
  return r;
}

namespace {

// Point where the ray z + L d (L > 0) meets |t| = R.
DPoint ray_to_circle(const DPoint& z, const DPoint& d, double R) {
  double b = (std::conj(z) * d).real();
  double L = -b + std::sqrt(b * b - std::norm(z) + R * R);
  return z + L * d;
}

}  // namespace

std::vector<Complex> CutSystem::escape(const Complex& zc, const std::vector<DPolyline>& extra) const {
  const DPoint z = to_cd(zc);
  const double R = std::max(far_radius(extra), 1.5 * std::abs(z));
  const int ndir = 64;
  auto score = [&](const DPoint& p, const DPoint& q) {
    double s = std::numeric_limits<double>::infinity();
    for (const auto& c : centres_) s = std::min(s, dist_seg(to_cd(c), p, q));
    return s;
  };
  double best = -1;
  DPoint best_far;
  for (int k = 0; k < ndir; ++k) {
    double ang = 2 * M_PI * (k + 0.5) / ndir;
    DPoint far = ray_to_circle(z, std::polar(1.0, ang), R);
    if (!clear(z, far, extra)) continue;
    double s = score(z, far);
    if (s > best) {
      best = s;
      best_far = far;
    }
  }
  if (best >= 0) return {Complex(Real(best_far.real()), Real(best_far.imag()))};

  // Two legs: a short hop to a point with a clear escape.
  for (double hop : {0.1, 0.25, 0.5, 1.0}) {
    for (int k = 0; k < 32; ++k) {
      DPoint mid = z + std::polar(hop * diameter_, 2 * M_PI * (k + 0.25) / 32);
      if (!clear(z, mid, extra)) continue;
      for (int m = 0; m < ndir; ++m) {
        DPoint far = ray_to_circle(mid, std::polar(1.0, 2 * M_PI * (m + 0.5) / ndir), R);
        if (!clear(mid, far, extra)) continue;
        return {Complex(Real(far.real()), Real(far.imag())), Complex(Real(mid.real()), Real(mid.imag()))};
      }
    }
  }
  throw OnCut("no cut-avoiding path to the requested point");
}

Contour CutSystem::route(const Complex& z, const std::vector<DPolyline>& extra) const {
  double dz = distance(to_cd(z));
  if (dz <= on_cut_tolerance()) throw OnCut("point lies on the cut");
  auto v = escape(z, extra);
  Contour c = Contour::from_infinity(centres_, v.front());
  std::vector<Complex> rest(v.begin() + 1, v.end());
  rest.push_back(z);
  c.append_polyline(rest);
  return c;
}

Contour CutSystem::side_route(int arc, std::size_t node, Side side) const {
  const Arc& a = arcs_.at(arc);
  if (node == 0 || node + 1 >= a.nodes.size()) throw TooCloseToEndpoint("side values need an interior node");
  Complex t = a.tangent(node);
  Complex n = side == Side::Plus ? I() * t : -I() * t;
  // Offset small against the local node spacing and the distance to the ends.
  double spacing = std::min(std::abs(a.dnodes[node + 1] - a.dnodes[node]), std::abs(a.dnodes[node] - a.dnodes[node - 1]));
  double to_end = std::min(std::abs(a.dnodes[node] - a.dnodes.front()), std::abs(a.dnodes[node] - a.dnodes.back()));
  double eps = std::min({1e-3 * diameter_, 0.25 * spacing, 0.1 * to_end});
  Complex zp = a.nodes[node] + n * Real(eps);
  auto v = escape(zp);
  Contour c = Contour::from_infinity(centres_, v.front());
  std::vector<Complex> rest(v.begin() + 1, v.end());
  rest.push_back(zp);
  rest.push_back(a.nodes[node]);
  c.append_polyline(rest);
  return c;
}

std::vector<Complex> CutSystem::side_logs(int arc, std::size_t node, Side side) const {
  return side_route(arc, node, side).end_logs();
}

Contour CutSystem::arc_contour(int arc, Side side, int q_start, int q_end) const {
  return arc_contour_impl(arc, side, q_start, q_end, nullptr);
}

Contour CutSystem::arc_contour_avoiding(int arc, Side side, int q_start, int q_end, Side avoid_side) const {
  return arc_contour_impl(arc, side, q_start, q_end, &avoid_side);
}

Contour CutSystem::arc_contour_impl(int arc, Side side, int q_start, int q_end, const Side* avoid_side) const {
  const Arc& a = arcs_.at(arc);
  std::vector<Complex> verts;
  for (auto idx : a.coarse) verts.push_back(a.nodes[idx]);
  if (verts.size() < 3) throw std::logic_error("arc_contour: arc too coarse");
  std::size_t anchor = verts.size() / 2;
  std::size_t anchor_node = a.coarse[anchor];
  auto logs = side_logs(arc, anchor_node, side);
  if (avoid_side) {
    // Bow the interior vertices to the side opposite the kernel point.
    Real chord = abs(a.nodes.back() - a.nodes.front());
    Real bump = chord * Real(0.15);
    std::vector<double> len(a.dnodes.size(), 0.0);
    for (std::size_t i = 1; i < a.dnodes.size(); ++i) len[i] = len[i - 1] + std::abs(a.dnodes[i] - a.dnodes[i - 1]);
    for (std::size_t k = 1; k + 1 < verts.size(); ++k) {
      Complex t = a.tangent(a.coarse[k]);
      Complex n = *avoid_side == Side::Plus ? -I() * t : I() * t;
      double s = len[a.coarse[k]] / len.back();
      Complex shifted = verts[k] + n * (bump * Real(std::sin(M_PI * s)));
      if (k == anchor) logs = continue_logs(logs, verts[k], shifted, centres_);
      verts[k] = shifted;
    }
  }
  return Contour::polyline(centres_, verts, anchor, std::move(logs), q_start, q_end);
}

}  // namespace padelab
