#include "padelab/poly.hpp"

#include <algorithm>

namespace padelab {

ComplexPoly::ComplexPoly(std::vector<Complex> coeffs, int trim_digits) : c_(std::move(coeffs)) {
  if (trim_digits > 0)
    trim(trim_digits);
  else
    trim_exact();
}

ComplexPoly ComplexPoly::from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> c{Complex(1)};
  for (const auto& r : roots) {
    std::vector<Complex> next(c.size() + 1, Complex(0));
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = std::move(next);
  }
  return ComplexPoly(std::move(c));
}

ComplexPoly ComplexPoly::monomial(std::size_t k, const Complex& c) {
  std::vector<Complex> v(k + 1, Complex(0));
  v[k] = c;
  return ComplexPoly(std::move(v));
}

void ComplexPoly::trim(int digits) {
  Real big = 0;
  for (const auto& v : c_) big = std::max(big, Real(abs(v)));
  Real thresh = big * pow10(-digits / 2);
  while (!c_.empty() && abs(c_.back()) <= thresh) c_.pop_back();
}

void ComplexPoly::trim_exact() {
  while (!c_.empty() && c_.back() == Complex(0)) c_.pop_back();
}

Complex ComplexPoly::operator()(const Complex& z) const {
  Complex s(0);
  for (std::size_t k = c_.size(); k-- > 0;) s = s * z + c_[k];
  return s;
}

void ComplexPoly::eval_with_derivative(const Complex& z, Complex& p, Complex& dp) const {
  p = Complex(0);
  dp = Complex(0);
  for (std::size_t k = c_.size(); k-- > 0;) {
    dp = dp * z + p;
    p = p * z + c_[k];
  }
}

ComplexPoly ComplexPoly::derivative() const {
  if (c_.size() <= 1) return ComplexPoly();
  std::vector<Complex> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * Real(k);
  return ComplexPoly(std::move(d));
}

ComplexPoly ComplexPoly::monic() const {
  if (c_.empty()) return *this;
  Complex inv = Complex(1) / c_.back();
  std::vector<Complex> d(c_);
  for (auto& v : d) v *= inv;
  d.back() = Complex(1);
  return ComplexPoly(std::move(d));
}

ComplexPoly ComplexPoly::operator+(const ComplexPoly& o) const {
  std::vector<Complex> d(std::max(c_.size(), o.c_.size()), Complex(0));
  for (std::size_t k = 0; k < c_.size(); ++k) d[k] += c_[k];
  for (std::size_t k = 0; k < o.c_.size(); ++k) d[k] += o.c_[k];
  return ComplexPoly(std::move(d));
}

ComplexPoly ComplexPoly::operator-(const ComplexPoly& o) const { return *this + o * Complex(-1); }

ComplexPoly ComplexPoly::operator*(const ComplexPoly& o) const {
  if (c_.empty() || o.c_.empty()) return ComplexPoly();
  std::vector<Complex> d(c_.size() + o.c_.size() - 1, Complex(0));
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = 0; j < o.c_.size(); ++j) d[i + j] += c_[i] * o.c_[j];
  return ComplexPoly(std::move(d));
}

ComplexPoly ComplexPoly::operator*(const Complex& s) const {
  std::vector<Complex> d(c_);
  for (auto& v : d) v *= s;
  return ComplexPoly(std::move(d));
}

}  // namespace padelab
