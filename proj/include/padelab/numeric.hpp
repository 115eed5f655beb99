#pragma once

#include <boost/multiprecision/complex_adaptor.hpp>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace padelab {

namespace mp = boost::multiprecision;

using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;
using Complex = mp::number<mp::complex_adaptor<mp::mpfr_float_backend<0>>, mp::et_off>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define PADELAB_ERROR(Name)             \
  struct Name : Error {                 \
    using Error::Error;                 \
  }

PADELAB_ERROR(InvalidConfig);
PADELAB_ERROR(SingularMatrix);
PADELAB_ERROR(RankDeficient);
PADELAB_ERROR(NonConvergence);
PADELAB_ERROR(ToleranceNotReached);
PADELAB_ERROR(SingularInterior);
PADELAB_ERROR(OnCut);
PADELAB_ERROR(TooCloseToEndpoint);
PADELAB_ERROR(CollinearPoints);
PADELAB_ERROR(NewtonDiverged);
PADELAB_ERROR(StepCollapse);
PADELAB_ERROR(NearBranchPoint);
PADELAB_ERROR(AmbiguousBranch);
PADELAB_ERROR(PathologicalIndex);
PADELAB_ERROR(CycleThroughSingularity);

#undef PADELAB_ERROR

struct PrecisionPolicy {
  int decimal_digits = 50;
  Real quad_rel_tol;
  Real newton_tol;
  int max_iter = 200;

  // Tolerances derived from the digit count.
  static PrecisionPolicy with_digits(int digits);
  void validate() const;
};

// Sets the working precision for the lifetime of the guard.
class ScopedPrecision {
 public:
  explicit ScopedPrecision(int digits);
  explicit ScopedPrecision(const PrecisionPolicy& p) : ScopedPrecision(p.decimal_digits) {}
  ~ScopedPrecision();
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;

 private:
  unsigned saved_;
};

// Copies carrying the current default precision (arithmetic on two
// low-precision operands would otherwise stay at their precision).
Real promote(const Real& x);
Complex promote(const Complex& z);

Real pi();
Complex I();
Real pow10(int e);
Real eps_digits(int digits);
inline Real mag(const Complex& z) { return abs(z); }
inline Complex cplx(const Real& re, const Real& im = Real(0)) { return Complex(re, im); }
Complex cplx_parse(const std::string& re, const std::string& im);
Complex conj_c(const Complex& z);
Complex principal_log(const Complex& z);

std::complex<double> to_cd(const Complex& z);
double to_d(const Real& x);
std::string to_str(const Real& x, int digits = 20);

// Distance from z to the segment [a, b].
Real dist_segment(const Complex& z, const Complex& a, const Complex& b);

// 1 if the open segments [p1,p2] and [q1,q2] cross.
bool segments_cross(const Complex& p1, const Complex& p2, const Complex& q1, const Complex& q2);

}  // namespace padelab
