#pragma once

#include <array>
#include <optional>

#include "padelab/pade.hpp"

namespace padelab {

// Point of w^2 = A V; sheet 1 is fixed by w / z^2 -> 1 at infinity.
struct SurfacePoint {
  Complex z;
  int sheet = 1;
  bool at_infinity = false;
};

struct Periods {
  std::array<std::array<Complex, 3>, 3> M;  // M[j][k] = M_{j+1}^k
  Complex tau, S;
  Complex a_period, b_period;  // of z^0 dz / w: -4 pi i M_1^0 and -4 pi i M_3^0
};

// 2 pi i Z + 2 pi i tau Z
struct Lattice {
  Complex wb, wa;  // b- and a-periods of the normalized differential
  // Real coordinates of z in the basis (wb, wa).
  std::array<Real, 2> coords(const Complex& z) const;
  // z minus the nearest lattice vector.
  Complex reduce_near_zero(const Complex& z) const;
};

// Coarse Abel-map table in double precision used to seed Newton.
struct AbelGrid {
  std::vector<std::complex<double>> z;
  std::vector<int> sheet;
  std::vector<std::complex<double>> value;  // Abel map, defined mod the lattice
};

// Everything that does not depend on n. Labellings that run clockwise around
// v are handled in the mirror frame z -> conj(z), where the star has the
// counterclockwise orientation the surface formulas assume.
struct SurfaceBundle {
  SurfaceBundle(const BranchConfig& cfg, const StarGeometry& g, const PrecisionPolicy& policy);

  BranchConfig cfg;       // canonical frame
  StarGeometry geometry;  // canonical frame
  bool mirrored = false;
  PrecisionPolicy policy;
  Periods periods;
  Lattice lattice;
  Complex abel_v;     // one lattice corner of the fundamental cell
  Complex abel_inf2;  // Abel map at infinity on sheet 2
  AbelGrid grid;

  Complex to_canonical(const Complex& z) const { return mirrored ? conj_c(z) : z; }
  Complex from_canonical(const Complex& z) const { return mirrored ? conj_c(z) : z; }
};

// w on sheet 1 at a point off the cut, and at an arc node from one side.
Complex w_sheet1(const CutSystem& cut, const Complex& z);
Complex w_boundary(const CutSystem& cut, int arc, std::size_t node, Side side);

Periods compute_periods(const StarGeometry& g, const PrecisionPolicy& policy);

// Closed cycles starting on sheet 1. The a-cycle surrounds {a_1, v}, the
// b-cycle {a_3, v}; both run clockwise so that the periods of z^k dz / w are
// -4 pi i M_1^k and -4 pi i M_3^k.
enum class Cycle { A, B };
// Thin loop hugging Gamma_1 (a) or Gamma_3 (b) at offset h.
Contour hugging_cycle(const StarGeometry& g, Cycle c, double h);
// Polygonal circle of radius 1.3 times the half distance of the two points.
Contour circle_cycle(const StarGeometry& g, Cycle c);

// Path from infinity on sheet 1 to the point; sheet-2 targets are reached
// through the midpoint of Gamma_2. The path never crosses Gamma_1, Gamma_3.
Contour surface_path(const SurfaceBundle& b, const SurfacePoint& p);
// Same, ending at an arc node approached from one side on the given sheet.
Contour surface_path_boundary(const SurfaceBundle& b, int arc, std::size_t node, Side side, int sheet);

// Integral of dnu_0^* = -dz / (2 M_3^0 w) from infinity on sheet 1.
Complex abel_map(const SurfaceBundle& b, const SurfacePoint& p);

struct IndexConstants {
  int n = 0;
  std::array<Complex, 3> tau_j, t_j, s_nj;
};
IndexConstants index_constants(const BranchConfig& cfg, const JumpConstants& kappa, int n);

struct InversionResult {
  SurfacePoint z_n;
  Complex w_n;
  std::array<int, 2> log_branch_choices{0, 0};  // added to the principal logs of s2/s1 and s2/s3
  bool pathological = false;
  Complex target;    // right-hand side of the Abel equation
  Real residual{0};  // |abel_map(z_n) - target|
  // log(s2/s1) and log(s2/s3) on the selected branches
  Complex log21, log23;
};
InversionResult jacobi_inversion(const SurfaceBundle& b, const IndexConstants& k);

// Scalar function F = exp(Lambda) with piecewise constant F_+ F_- on the arcs.
struct SzegoData {
  Complex beta1, beta2, beta3, Xi;
  Complex F_infinity, log_F_infinity;
  int sign = 1;  // global sign of F
};
// Same function with F replaced by -F.
SzegoData flip_sign(const SzegoData& s);
SzegoData szego_function(const SurfaceBundle& b, const IndexConstants& k, const InversionResult& inv);
Complex szego_log(const SurfaceBundle& b, const SzegoData& s, const Complex& z);
Complex szego_log_boundary(const SurfaceBundle& b, const SzegoData& s, int arc, std::size_t node, Side side);
// Abelian-integral form beta_1/2 + Xi int_{a_1}^z dt / w.
Complex szego_log_differential(const SurfaceBundle& b, const SzegoData& s, const Complex& z);
Complex szego_value(const SurfaceBundle& b, const SzegoData& s, const Complex& z);

// Meromorphic differential deta = h(z) dz with zero b-period.
struct EtaData {
  std::vector<Complex> centres;  // zeros of A V
  Complex z_n, w_n, delta1;
  // 0: z_n finite; 1: z_n at infinity on sheet 1 (eta = eta^*); 2: on sheet 2
  int infinity_sheet = 0;
  // Integrand at t for a branch of w given directly.
  Complex integrand(const Complex& t, const Complex& w) const;
};
EtaData eta_differential(const SurfaceBundle& b, const InversionResult& inv);
// Integral of deta along a contour whose continued logs fix the branch of w.
Complex eta_integral(const SurfaceBundle& b, const EtaData& e, const Contour& c);
// Period over the thin loop around Gamma_1 (a) or Gamma_3 (b) in the limit of
// zero offset, i.e. with z_n kept outside the loop.
Complex eta_period(const SurfaceBundle& b, const EtaData& e, Cycle c);

using Mat2 = std::array<std::array<Complex, 2>, 2>;

struct ParametrixData {
  EtaData eta;
  SzegoData szego;
  IndexConstants constants;
  InversionResult inversion;
  Complex qa, qb;    // q = a + b ((w + w_n) / (z - z_n) - z)
  Complex u2_limit;  // lim z u_2(z) at infinity
  std::optional<Complex> predicted_spurious;  // canonical frame
};
ParametrixData parametrix(const SurfaceBundle& b, const IndexConstants& k, const InversionResult& inv,
                          const SzegoData& s, const EtaData& e);

// u_1 = N~_11 and the holomorphic branch N~_12 on C minus the cut.
Complex u1_value(const SurfaceBundle& b, const ParametrixData& p, const Complex& z);
Complex n12_value(const SurfaceBundle& b, const ParametrixData& p, const Complex& z);
Mat2 eval_N(const SurfaceBundle& b, const ParametrixData& p, const Complex& z);
Mat2 eval_N_boundary(const SurfaceBundle& b, const ParametrixData& p, int arc, std::size_t node, Side side);

// Full per-index construction.
ParametrixData build_parametrix(const SurfaceBundle& b, int n);

struct Prediction {
  Complex chi, r_frak;
};
// z in the caller's frame.
Prediction predict(const SurfaceBundle& b, const ParametrixData& p, const Complex& z);

// max relative deviation of sigma chi_+ = (w r)_- and sigma chi_- = (w r)_+
// at interior nodes (canonical frame), arcs sampled at the given fractions.
Real nuttall_boundary_check(const SurfaceBundle& b, const ParametrixData& p, const std::vector<double>& fractions);

}  // namespace padelab
