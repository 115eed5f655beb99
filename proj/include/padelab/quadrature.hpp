#pragma once

#include <functional>
#include <span>

#include "padelab/numeric.hpp"

namespace padelab {

// Gauss-Legendre rule on [0, 1] at the current working precision (cached).
struct GaussRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};
const GaussRule& gauss_legendre(int n);

// Integrand receiving the point t together with continued values of
// log(t - b_k) for the contour's centres b_k.
using LogIntegrand = std::function<Complex(const Complex& t, std::span<const Complex> logs)>;
using PlainIntegrand = std::function<Complex(const Complex& t)>;

// Continued logarithms log(t - b_k) for a point of large modulus, with the
// branch that is principal near infinity.
std::vector<Complex> logs_near_infinity(const Complex& t, std::span<const Complex> centres);
// Continuation from p to t along the straight segment [p, t].
std::vector<Complex> continue_logs(std::span<const Complex> logs_p, const Complex& p, const Complex& t,
                                   std::span<const Complex> centres);

// exp(sum_k e_k * logs_k)
Complex power_product(std::span<const Complex> logs, std::span<const Real> exps);

// One straight piece of a contour, or a tail from infinity.
struct Leg {
  enum class Kind { Segment, FromInfinity };
  Kind kind = Kind::Segment;
  Complex a, b;  // FromInfinity: a is unused, the leg runs from infinity to b
  int sing_start = -1, q_start = 1;  // centre index at a, substitution power
  int sing_end = -1, q_end = 1;
  bool anchor_at_start = true;
  std::vector<Complex> anchor_logs;  // logs at the anchor end
};

class Contour {
 public:
  Contour() = default;
  explicit Contour(std::vector<Complex> centres) : centres_(std::move(centres)) {}

  // Polyline through vertices; logs are known at vertices[anchor]. A power
  // q > 1 at either end marks that end as the singular centre it coincides
  // with and applies the substitution t - b = (anchor - b) s^q.
  static Contour polyline(std::vector<Complex> centres, const std::vector<Complex>& vertices, std::size_t anchor,
                          std::vector<Complex> anchor_logs, int start_power = 1, int end_power = 1);
  // Polygon approximating a circle, starting at centre + r e^{i phi0}.
  static Contour circle(std::vector<Complex> centres, const Complex& centre, const Real& r,
                        std::vector<Complex> start_logs, int sides = 48, const Real& phi0 = Real(0),
                        bool clockwise = false);
  // Tail from infinity to F followed by nothing; logs principal near infinity.
  static Contour from_infinity(std::vector<Complex> centres, const Complex& far_point);

  // Appends a second contour whose start coincides with this one's end. The
  // logs of the continuation are rebased so the concatenation is continuous.
  void append_polyline(const std::vector<Complex>& vertices, int end_power = 1);
  void append(const Contour& other);

  Contour reversed() const;

  const std::vector<Complex>& centres() const { return centres_; }
  const std::vector<Leg>& legs() const { return legs_; }
  std::vector<Leg>& legs() { return legs_; }
  bool closed() const { return closed_; }
  void set_closed(bool c) { closed_ = c; }

  Complex start_point() const;
  Complex end_point() const;
  // Logs at the end point (must be non-singular).
  std::vector<Complex> end_logs() const;
  std::vector<Complex> start_logs() const;

  // Evaluate the logs at a leg parameter u in [0, 1]; also returns t, dt/du.
  void eval_leg(const Leg& leg, const Real& u, Complex& t, Complex& dt, std::vector<Complex>& logs) const;

 private:
  std::vector<Complex> centres_;
  std::vector<Leg> legs_;
  bool closed_ = false;
};

Complex integrate(const LogIntegrand& g, const Contour& c, const PrecisionPolicy& policy);
Complex integrate(const PlainIntegrand& g, const Contour& c, const PrecisionPolicy& policy);

// Integral of |g| |dt| along the contour.
Real integrate_abs(const LogIntegrand& g, const Contour& c, const PrecisionPolicy& policy);

// Fixed composite rule: each leg split into `splits` equal pieces carrying an
// `order`-point Gauss rule, so that sum_i w_i h(t_i) approximates int g h dt.
struct NodeSet {
  std::vector<Complex> t, w;
};
NodeSet discretize(const LogIntegrand& g, const Contour& c, int order, int splits);

// Adaptive Gauss-Legendre on [0, 1] for a parameter-space integrand.
Complex integrate_unit(const std::function<Complex(const Real&)>& g, const Real& tol, int max_depth = 40);

}  // namespace padelab
