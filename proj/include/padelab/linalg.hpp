#pragma once

#include "padelab/numeric.hpp"

namespace padelab {

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, Complex(0)) {}
  static CMatrix identity(std::size_t n);

  Complex& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::vector<Complex> apply(const std::vector<Complex>& x) const;
  Real norm_inf() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Complex> a_;
};

Real norm_inf(const std::vector<Complex>& x);

// Gaussian elimination with partial pivoting. Throws SingularMatrix when a
// pivot drops below 10^(5-digits) relative to the matrix norm.
std::vector<Complex> solve_dense(const CMatrix& a, const std::vector<Complex>& b, int digits);

struct LeastSquaresResult {
  std::vector<Complex> x;
  Real residual;  // ||A x - b||_2 / ||b||_2
};

// Column-pivot-free modified Gram-Schmidt QR. Throws RankDeficient when a
// column collapses below 10^(5-digits) of its original norm.
LeastSquaresResult least_squares(const CMatrix& a, const std::vector<Complex>& b, int digits);

}  // namespace padelab
