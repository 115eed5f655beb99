#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <optional>

#include "padelab/cut_system.hpp"
#include "padelab/poly.hpp"

namespace padelab {

using Rational = mp::mpq_rational;

struct GaussRational {
  Rational re, im;
  GaussRational() = default;
  GaussRational(Rational r, Rational i = Rational(0)) : re(std::move(r)), im(std::move(i)) {}
  GaussRational operator+(const GaussRational& o) const { return {re + o.re, im + o.im}; }
  GaussRational operator-(const GaussRational& o) const { return {re - o.re, im - o.im}; }
  GaussRational operator*(const GaussRational& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  GaussRational operator*(const Rational& s) const { return {re * s, im * s}; }
  bool operator==(const GaussRational& o) const { return re == o.re && im == o.im; }
  Complex to_complex() const;
};

// Parses "-1.25", "3e-2" or "7/4" exactly.
Rational parse_rational(const std::string& s);
Real to_real(const Rational& q);

class BranchConfig {
 public:
  BranchConfig(std::vector<Complex> points, std::vector<Rational> exponents);
  BranchConfig(std::vector<GaussRational> points, std::vector<Rational> exponents);

  std::size_t p() const { return exponents_.size(); }
  // Branch points at the current working precision.
  std::vector<Complex> points() const;
  const std::vector<Rational>& exponents() const { return exponents_; }
  std::vector<Real> exponents_real() const;
  const std::optional<std::vector<GaussRational>>& exact_points() const { return exact_; }

  // Extra conditions for the three-point geometry and surface stages.
  void require_three_point() const;
  // Same configuration with all exponents negated.
  BranchConfig negated() const;
  // Mirror image z -> conj(z) of the branch points.
  BranchConfig conjugated() const;

 private:
  void validate() const;
  std::vector<Complex> points_;
  std::optional<std::vector<GaussRational>> exact_;
  std::vector<Rational> exponents_;
};

ComplexPoly poly_A(const BranchConfig& cfg);
ComplexPoly poly_B(const BranchConfig& cfg);
std::vector<GaussRational> poly_B_exact(const BranchConfig& cfg);

// f_0 .. f_K of f = 1 + sum f_k z^{-k}; exact when the points are rational.
std::vector<Complex> taylor_at_infinity(const BranchConfig& cfg, int K);
std::vector<GaussRational> taylor_exact(const BranchConfig& cfg, int K);

// Exponents of f against the cut's centres (zeros for centres that are not
// branch points of f, e.g. the star's junction).
std::vector<Real> f_exponents(const BranchConfig& cfg, const CutSystem& cut, const Real& scale = Real(1));

struct FValue {
  Complex f, f_half;
};

// Branch with f(inf) = 1 on C minus the cut.
FValue eval_f(const BranchConfig& cfg, const CutSystem& cut, const Complex& z);
FValue f_from_logs(const BranchConfig& cfg, const CutSystem& cut, std::span<const Complex> logs);

struct BoundaryValue {
  Complex z;
  Side side;
  Complex value;
};

struct BoundaryRho {
  BoundaryValue f_side;
  Complex rho;  // f_- - f_+
};

// One-sided limits at an interior node of an arc.
BoundaryRho boundary_f_and_rho(const BranchConfig& cfg, const CutSystem& cut, int arc, std::size_t node, Side side);

// Cut for p = 2: the segment [a_1, a_2] oriented from a_1 to a_2.
CutSystem segment_cut(const BranchConfig& cfg, int nodes = 65);

}  // namespace padelab
