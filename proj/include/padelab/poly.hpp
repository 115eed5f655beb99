#pragma once

#include "padelab/numeric.hpp"

namespace padelab {

// Dense polynomial, ascending coefficients.
class ComplexPoly {
 public:
  ComplexPoly() = default;
  explicit ComplexPoly(std::vector<Complex> coeffs, int trim_digits = 0);

  static ComplexPoly from_roots(const std::vector<Complex>& roots);
  static ComplexPoly monomial(std::size_t k, const Complex& c = Complex(1));

  const std::vector<Complex>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  Complex coeff(std::size_t k) const { return k < c_.size() ? c_[k] : Complex(0); }
  Complex leading() const { return c_.empty() ? Complex(0) : c_.back(); }

  // Drops leading coefficients below 10^(-digits/2) of the largest one.
  void trim(int digits);
  void trim_exact();

  Complex operator()(const Complex& z) const;
  // p(z) and p'(z) by one Horner pass.
  void eval_with_derivative(const Complex& z, Complex& p, Complex& dp) const;
  ComplexPoly derivative() const;
  ComplexPoly monic() const;

  ComplexPoly operator+(const ComplexPoly& o) const;
  ComplexPoly operator-(const ComplexPoly& o) const;
  ComplexPoly operator*(const ComplexPoly& o) const;
  ComplexPoly operator*(const Complex& s) const;

 private:
  std::vector<Complex> c_;
};

// Aberth-Ehrlich simultaneous iteration (no deflation).
std::vector<Complex> poly_roots(const ComplexPoly& p, const PrecisionPolicy& policy);

}  // namespace padelab
