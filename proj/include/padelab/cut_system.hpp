#pragma once

#include "padelab/quadrature.hpp"

namespace padelab {

using DPoint = std::complex<double>;
using DPolyline = std::vector<DPoint>;

// One arc of the cut, traced from centre `start` to centre `end`.
struct Arc {
  std::vector<Complex> nodes;
  DPolyline dnodes;
  int start = -1, end = -1;
  std::vector<std::size_t> coarse;  // node indices used for quadrature

  void finalize(std::size_t coarse_legs = 8);
  Complex tangent(std::size_t k) const;  // unit tangent at node k
  // Node index closest to the normalized arclength position s in (0, 1).
  std::size_t node_at(double s) const;
};

enum class Side { Plus, Minus };  // plus = left of the arc orientation

// Branch centres plus the arcs making the functions single-valued.
class CutSystem {
 public:
  CutSystem() = default;
  CutSystem(std::vector<Complex> centres, std::vector<Arc> arcs);

  const std::vector<Complex>& centres() const { return centres_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  double diameter() const { return diameter_; }
  double max_centre_modulus() const { return rmax_; }

  double distance(const DPoint& z) const;
  // Arc with the smallest distance to z (distance returned through d).
  int nearest_arc(const DPoint& z, double* d = nullptr) const;

  // Straight segment [p, q] avoids the arcs and the extra obstacles.
  bool clear(const DPoint& p, const DPoint& q, const std::vector<DPolyline>& extra = {}) const;

  // Contour from infinity to z that never crosses the arcs (or obstacles).
  Contour route(const Complex& z, const std::vector<DPolyline>& extra = {}) const;
  // Contour from infinity to node k of arc j, approaching from the given side.
  Contour side_route(int arc, std::size_t node, Side side) const;
  // Logs at node k of arc j, continued from the given side.
  std::vector<Complex> side_logs(int arc, std::size_t node, Side side) const;

  // The arc as a contour through its coarse nodes with boundary values
  // continued from `side`; ends flagged with the given substitution powers.
  Contour arc_contour(int arc, Side side, int q_start, int q_end) const;
  // Same, with the interior bowed out to the side opposite `avoid_side` so a
  // Cauchy kernel at a point near the arc on that side stays regular.
  Contour arc_contour_avoiding(int arc, Side side, int q_start, int q_end, Side avoid_side) const;

  // Far point reachable from z by a straight segment (or two) that avoids
  // the arcs and obstacles; the intermediate vertex, if any, is returned too.
  std::vector<Complex> escape(const Complex& z, const std::vector<DPolyline>& extra = {}) const;

  double far_radius(const std::vector<DPolyline>& extra = {}) const;
  double on_cut_tolerance() const { return 1e-4 * diameter_; }

 private:
  Contour arc_contour_impl(int arc, Side side, int q_start, int q_end, const Side* avoid_side) const;
  std::vector<Complex> centres_;
  std::vector<Arc> arcs_;
  double diameter_ = 1, rmax_ = 1;
};

double dist_point_polyline(const DPoint& z, const DPolyline& pl);
bool segment_hits_polyline(const DPoint& p, const DPoint& q, const DPolyline& pl);

}  // namespace padelab
