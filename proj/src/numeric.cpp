#include "padelab/numeric.hpp"

#include <algorithm>
#include <sstream>

namespace padelab {

PrecisionPolicy PrecisionPolicy::with_digits(int digits) {
  ScopedPrecision guard(std::max(digits, 30));
  PrecisionPolicy p;
  p.decimal_digits = digits;
  p.quad_rel_tol = pow10(-(digits / 2 + 10));
  p.newton_tol = pow10(-(digits / 2 + 5));
  p.max_iter = 200;
  return p;
}

void PrecisionPolicy::validate() const {
  if (decimal_digits < 30) throw InvalidConfig("decimal_digits must be at least 30");
  if (!(quad_rel_tol > 0) || quad_rel_tol > Real(1e-6))
    throw InvalidConfig("quad_rel_tol must lie in (0, 1e-6]");
  if (!(newton_tol > 0) || newton_tol > Real(1e-6))
    throw InvalidConfig("newton_tol must lie in (0, 1e-6]");
  if (max_iter < 1) throw InvalidConfig("max_iter must be positive");
}

ScopedPrecision::ScopedPrecision(int digits) : saved_(Real::default_precision()) {
  Real::default_precision(static_cast<unsigned>(digits));
}

ScopedPrecision::~ScopedPrecision() { Real::default_precision(saved_); }

Real pi() { return boost::math::constants::pi<Real>(); }

Complex I() { return Complex(Real(0), Real(1)); }

Real pow10(int e) { return pow(Real(10), e); }

Real eps_digits(int digits) { return pow10(-digits); }

Complex cplx_parse(const std::string& re, const std::string& im) {
  return Complex(Real(re), Real(im));
}

Complex conj_c(const Complex& z) { return Complex(z.real(), -z.imag()); }

Complex principal_log(const Complex& z) {
  return Complex(log(abs(z)), atan2(z.imag(), z.real()));
}

std::complex<double> to_cd(const Complex& z) {
  return {z.real().convert_to<double>(), z.imag().convert_to<double>()};
}

double to_d(const Real& x) { return x.convert_to<double>(); }

std::string to_str(const Real& x, int digits) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

Real dist_segment(const Complex& z, const Complex& a, const Complex& b) {
  Complex d = b - a;
  Real len2 = norm(d);
  if (len2 == 0) return abs(z - a);
  Real s = ((z - a) * conj_c(d)).real() / len2;
  if (s < 0) s = 0;
  if (s > 1) s = 1;
  return abs(z - (a + d * s));
}

namespace {
Real cross2(const Complex& u, const Complex& v) { return u.real() * v.imag() - u.imag() * v.real(); }
}  // namespace

bool segments_cross(const Complex& p1, const Complex& p2, const Complex& q1, const Complex& q2) {
  Real d1 = cross2(p2 - p1, q1 - p1);
  Real d2 = cross2(p2 - p1, q2 - p1);
  Real d3 = cross2(q2 - q1, p1 - q1);
  Real d4 = cross2(q2 - q1, p2 - q1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

Real promote(const Real& x) {
  Real y = x;
  y.precision(Real::default_precision());
  return y;
}

Complex promote(const Complex& z) { return Complex(promote(z.real()), promote(z.imag())); }

}  // namespace padelab
