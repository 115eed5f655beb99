#include "padelab/linalg.hpp"

#include <utility>

namespace padelab {

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Complex(1);
  return m;
}

std::vector<Complex> CMatrix::apply(const std::vector<Complex>& x) const {
  std::vector<Complex> y(rows_, Complex(0));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
  return y;
}

Real CMatrix::norm_inf() const {
  Real best = 0;
  for (std::size_t i = 0; i < rows_; ++i) {
    Real s = 0;
    for (std::size_t j = 0; j < cols_; ++j) s += abs((*this)(i, j));
    if (s > best) best = s;
  }
  return best;
}

Real norm_inf(const std::vector<Complex>& x) {
  Real best = 0;
  for (const auto& v : x) {
    Real m = abs(v);
    if (m > best) best = m;
  }
  return best;
}

std::vector<Complex> solve_dense(const CMatrix& a, const std::vector<Complex>& b, int digits) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("solve_dense: matrix not square");
  if (b.size() != n) throw std::invalid_argument("solve_dense: rhs size mismatch");
  CMatrix m = a;
  std::vector<Complex> x = b;
  Real scale = a.norm_inf();
  Real thresh = scale * pow10(5 - digits);
  if (scale == 0 && n > 0) throw SingularMatrix("solve_dense: zero matrix");

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    Real best = abs(m(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      Real v = abs(m(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best <= thresh) throw SingularMatrix("solve_dense: pivot below threshold at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(x[k], x[piv]);
    }
    Complex inv = Complex(1) / m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      Complex f = m(i, k) * inv;
      if (f == Complex(0)) continue;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    Complex s = x[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= m(k, j) * x[j];
    x[k] = s / m(k, k);
  }
  return x;
}

LeastSquaresResult least_squares(const CMatrix& a, const std::vector<Complex>& b, int digits) {
  const std::size_t rows = a.rows(), cols = a.cols();
  if (b.size() != rows) throw std::invalid_argument("least_squares: rhs size mismatch");
  std::vector<std::vector<Complex>> q(cols, std::vector<Complex>(rows));
  CMatrix r(cols, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) q[j][i] = a(i, j);

  Real tiny = pow10(5 - digits);
  for (std::size_t j = 0; j < cols; ++j) {
    Real orig = 0;
    for (const auto& v : q[j]) orig += norm(v);
    orig = sqrt(orig);
    for (std::size_t k = 0; k < j; ++k) {
      Complex d = 0;
      for (std::size_t i = 0; i < rows; ++i) d += conj_c(q[k][i]) * q[j][i];
      r(k, j) = d;
      for (std::size_t i = 0; i < rows; ++i) q[j][i] -= d * q[k][i];
    }
    Real nn = 0;
    for (const auto& v : q[j]) nn += norm(v);
    nn = sqrt(nn);
    if (orig == 0 || nn <= tiny * orig) throw RankDeficient("least_squares: column " + std::to_string(j) + " is dependent");
    r(j, j) = Complex(nn);
    for (auto& v : q[j]) v /= nn;
  }
  std::vector<Complex> qb(cols, Complex(0));
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) qb[j] += conj_c(q[j][i]) * b[i];
  std::vector<Complex> x(cols);
  for (std::size_t k = cols; k-- > 0;) {
    Complex s = qb[k];
    for (std::size_t j = k + 1; j < cols; ++j) s -= r(k, j) * x[j];
    x[k] = s / r(k, k);
  }
  auto ax = a.apply(x);
  Real res = 0, bn = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    res += norm(ax[i] - b[i]);
    bn += norm(b[i]);
  }
  LeastSquaresResult out;
  out.x = std::move(x);
  out.residual = bn == 0 ? sqrt(res) : sqrt(res / bn);
  return out;
}

}  // namespace padelab
