#include "padelab/algebraic_function.hpp"

#include <cctype>

namespace padelab {

Real to_real(const Rational& q) {
  return Real(mp::numerator(q)) / Real(mp::denominator(q));
}

Complex GaussRational::to_complex() const { return Complex(to_real(re), to_real(im)); }

Rational parse_rational(const std::string& raw) {
  std::string s;
  for (char ch : raw)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) throw InvalidConfig("empty number");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw InvalidConfig("zero denominator in '" + raw + "'");
    return num / den;
  }
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
  mp::mpz_int mant = 0;
  int scale = 0;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    char ch = s[i];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      mant = mant * 10 + (ch - '0');
      if (dot) --scale;
      digits = true;
    } else if (ch == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!digits) throw InvalidConfig("cannot parse number '" + raw + "'");
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw InvalidConfig("cannot parse number '" + raw + "'");
    try {
      std::size_t used = 0;
      scale += std::stoi(s.substr(i + 1), &used);
      if (i + 1 + used != s.size()) throw InvalidConfig("cannot parse number '" + raw + "'");
    } catch (const std::logic_error&) {
      throw InvalidConfig("cannot parse exponent in '" + raw + "'");
    }
  }
  Rational q(mant);
  mp::mpz_int ten = 10;
  if (scale > 0) q *= Rational(mp::pow(ten, scale));
  if (scale < 0) q /= Rational(mp::pow(ten, -scale));
  return neg ? Rational(-q) : q;
}

BranchConfig::BranchConfig(std::vector<Complex> points, std::vector<Rational> exponents)
    : points_(std::move(points)), exponents_(std::move(exponents)) {
  validate();
}

BranchConfig::BranchConfig(std::vector<GaussRational> points, std::vector<Rational> exponents)
    : exact_(std::move(points)), exponents_(std::move(exponents)) {
  for (const auto& g : *exact_) points_.push_back(g.to_complex());
  validate();
}

std::vector<Complex> BranchConfig::points() const {
  if (!exact_) return points_;
  std::vector<Complex> out;
  for (const auto& g : *exact_) out.push_back(g.to_complex());
  return out;
}

std::vector<Real> BranchConfig::exponents_real() const {
  std::vector<Real> out;
  for (const auto& a : exponents_) out.push_back(to_real(a));
  return out;
}

void BranchConfig::validate() const {
  const std::size_t p = exponents_.size();
  if (p < 2) throw InvalidConfig("need at least two branch points");
  if (points_.size() != p) throw InvalidConfig("points and exponents differ in length");
  if (p > 20) throw InvalidConfig("too many branch points");
  Rational sum = 0;
  for (const auto& a : exponents_) sum += a;
  if (sum != 0) throw InvalidConfig("exponents must sum to zero");
  for (const auto& a : exponents_)
    if (mp::denominator(a) == 1) throw InvalidConfig("exponents must be non-integer");
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) {
      if (exact_ ? (*exact_)[i] == (*exact_)[j] : points_[i] == points_[j])
        throw InvalidConfig("branch points must be distinct");
    }
  // No proper nonempty subset may sum to an integer.
  for (unsigned mask = 1; mask + 1 < (1u << p); ++mask) {
    Rational s = 0;
    for (std::size_t j = 0; j < p; ++j)
      if (mask & (1u << j)) s += exponents_[j];
    if (mp::denominator(s) == 1) throw InvalidConfig("a proper subset of exponents sums to an integer");
  }
}

void BranchConfig::require_three_point() const {
  if (p() != 3) throw InvalidConfig("three branch points required");
  for (const auto& a : exponents_)
    if (a <= -1) throw InvalidConfig("exponents must exceed -1");
  auto z = points();
  Complex d1 = z[1] - z[0], d2 = z[2] - z[0];
  Real cross = d1.real() * d2.imag() - d1.imag() * d2.real();
  Real scale = abs(d1) * abs(d2);
  if (abs(cross) <= scale * Real(1e-12)) throw CollinearPoints("branch points are collinear");
}

BranchConfig BranchConfig::negated() const {
  std::vector<Rational> e;
  for (const auto& a : exponents_) e.push_back(-a);
  if (exact_) return BranchConfig(*exact_, e);
  return BranchConfig(points_, e);
}

BranchConfig BranchConfig::conjugated() const {
  if (exact_) {
    auto pts = *exact_;
    for (auto& g : pts) g.im = -g.im;
    return BranchConfig(pts, exponents_);
  }
  std::vector<Complex> pts;
  for (const auto& z : points_) pts.push_back(conj_c(z));
  return BranchConfig(pts, exponents_);
}

ComplexPoly poly_A(const BranchConfig& cfg) { return ComplexPoly::from_roots(cfg.points()); }

ComplexPoly poly_B(const BranchConfig& cfg) {
  auto pts = cfg.points();
  auto al = cfg.exponents_real();
  ComplexPoly b;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    std::vector<Complex> others;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (i != j) others.push_back(pts[i]);
    b = b + ComplexPoly::from_roots(others) * Complex(al[j]);
  }
  // The leading coefficient is sum(alpha) = 0.
  std::vector<Complex> c = b.coeffs();
  if (c.size() == pts.size()) c.pop_back();
  return ComplexPoly(std::move(c));
}

namespace {

std::vector<GaussRational> expand_exact(const std::vector<GaussRational>& roots) {
  std::vector<GaussRational> c{GaussRational(Rational(1))};
  for (const auto& r : roots) {
    std::vector<GaussRational> next(c.size() + 1);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] = next[k + 1] + c[k];
      next[k] = next[k] - r * c[k];
    }
    c = std::move(next);
  }
  return c;
}

}  // namespace

std::vector<GaussRational> poly_B_exact(const BranchConfig& cfg) {
  if (!cfg.exact_points()) throw std::logic_error("poly_B_exact: points are not rational");
  const auto& pts = *cfg.exact_points();
  const std::size_t p = pts.size();
  std::vector<GaussRational> b(p - 1);
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<GaussRational> others;
    for (std::size_t i = 0; i < p; ++i)
      if (i != j) others.push_back(pts[i]);
    auto e = expand_exact(others);
    for (std::size_t k = 0; k + 1 < p; ++k) b[k] = b[k] + e[k] * cfg.exponents()[j];
  }
  return b;
}

namespace {

// m f_m = -sum_{i<p} (i-p+m) A_i f_{m-(p-i)} - sum_{i<=p-2} B_i f_{m-(p-1-i)}
template <class T, class Scale>
std::vector<T> recurrence(const std::vector<T>& A, const std::vector<T>& B, int K, const T& one, Scale scale) {
  const int p = static_cast<int>(A.size()) - 1;
  std::vector<T> f(K + 1);
  f[0] = one;
  for (int m = 1; m <= K; ++m) {
    T s = one * scale(0);
    for (int i = 0; i < p; ++i) {
      int idx = m - (p - i);
      if (idx < 0) continue;
      s = s - A[i] * f[idx] * scale(i - p + m);
    }
    for (int i = 0; i <= p - 2 && i < static_cast<int>(B.size()); ++i) {
      int idx = m - (p - 1 - i);
      if (idx < 0) continue;
      s = s - B[i] * f[idx];
    }
    f[m] = s * scale.inv(m);
  }
  return f;
}

struct RationalScale {
  Rational operator()(int k) const { return Rational(k); }
  Rational inv(int m) const { return Rational(1, m); }
};

struct RealScale {
  Real operator()(int k) const { return Real(k); }
  Real inv(int m) const { return Real(1) / m; }
};

}  // namespace

std::vector<GaussRational> taylor_exact(const BranchConfig& cfg, int K) {
  if (K < 0) throw std::invalid_argument("taylor: K must be nonnegative");
  if (!cfg.exact_points()) throw std::logic_error("taylor_exact: points are not rational");
  auto A = expand_exact(*cfg.exact_points());
  auto B = poly_B_exact(cfg);
  return recurrence<GaussRational>(A, B, K, GaussRational(Rational(1)), RationalScale{});
}

std::vector<Complex> taylor_at_infinity(const BranchConfig& cfg, int K) {
  if (K < 0) throw std::invalid_argument("taylor: K must be nonnegative");
  if (cfg.exact_points()) {
    auto ex = taylor_exact(cfg, K);
    std::vector<Complex> out;
    out.reserve(ex.size());
    for (const auto& g : ex) out.push_back(g.to_complex());
    return out;
  }
  std::vector<Complex> A = poly_A(cfg).coeffs();
  std::vector<Complex> B = poly_B(cfg).coeffs();
  return recurrence<Complex>(A, B, K, Complex(1), RealScale{});
}

}  // namespace padelab
