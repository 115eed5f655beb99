#pragma once

#include <array>
#include <iosfwd>

#include "padelab/cut_system.hpp"

namespace padelab {

// Centres used by every star computation: a_1, a_2, a_3, v.
constexpr int kV = 3;

struct JumpConstants {
  std::array<Complex, 3> kappa;
};

enum class Region { DPlus, DMinus, NearBoundary };

struct Ray {
  std::vector<Complex> nodes;  // starting at v or a_j
  DPolyline dnodes;
};

struct StarGeometry {
  std::array<Complex, 3> a;
  Complex v;
  CutSystem cut;               // centres {a_1, a_2, a_3, v}, arcs oriented a_j -> v
  std::array<Ray, 3> rays_v;   // Gamma_j^perp from v, opposite Gamma_j
  std::array<Ray, 3> rays_a;   // gamma_j^perp from a_j
  std::array<Real, 3> masses;
  Complex c;
  double truncation_radius = 0;
  int orientation = 1;         // +1 if a_1, a_2, a_3 run counterclockwise around v
  DPolyline split_closed;      // closed boundary of D_+ (truncated far away)
  int digits = 0;
};

// exponents of T = ((z - v)/A)^{1/2} and w = (A (z - v))^{1/2} against the centres
std::vector<Real> T_exponents();
std::vector<Real> w_exponents();
Complex T_from_logs(std::span<const Complex> logs);
Complex w_from_logs(std::span<const Complex> logs);

Complex solve_center(const std::array<Complex, 3>& points, const PrecisionPolicy& policy);

struct TracedStar {
  std::vector<Arc> arcs;
  std::array<Ray, 3> rays_v, rays_a;
  double truncation_radius = 0;
};
TracedStar trace_arcs(const Complex& v, const std::array<Complex, 3>& points, const PrecisionPolicy& policy);

std::array<Real, 3> masses(const StarGeometry& g, const PrecisionPolicy& policy);
Complex capacity_constant(const StarGeometry& g, const PrecisionPolicy& policy);
Complex phi(const StarGeometry& g, const Complex& z, const PrecisionPolicy& policy);
// Boundary value of Phi at node k of arc j from the given side.
Complex phi_boundary(const StarGeometry& g, int arc, std::size_t node, Side side, const PrecisionPolicy& policy);
// Phi from a route already ending at the point (route may end on an arc).
Complex phi_on_route(const StarGeometry& g, const Contour& route, const PrecisionPolicy& policy);

Region region_of(const StarGeometry& g, const Complex& z);
// Phi_+ Phi_- on Gamma_j; for a clockwise labelling the constants are conjugated.
JumpConstants kappas(const std::array<Real, 3>& m, int orientation = 1);
int star_orientation(const std::array<Complex, 3>& points, const Complex& v);

// Full pipeline: centre, arcs, rays, masses, c, region data.
StarGeometry build_star(const std::array<Complex, 3>& points, const PrecisionPolicy& policy);

// Mirror image under z -> conj(z); arcs keep their labels and orientation.
StarGeometry mirror_star(const StarGeometry& g);

// Copy of the cut with endpoints snapped to the given (higher precision) centres.
CutSystem rebase_cut(const CutSystem& cut, const std::vector<Complex>& centres);

void write_arcs_csv(const StarGeometry& g, std::ostream& os);

}  // namespace padelab
