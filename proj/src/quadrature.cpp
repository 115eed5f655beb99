#include "padelab/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace padelab {

namespace {

bool finite_c(const Complex& z) {
  Real r = z.real(), i = z.imag();
  return (r - r) == 0 && (i - i) == 0;
}

GaussRule compute_rule(int n) {
  // Newton on P_n at a few guard digits above working precision.
  unsigned digits = Real::default_precision();
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  Real tol = pow10(-static_cast<int>(digits) + 2);
  Real p = pi();
  int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    Real x = cos(p * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      Real dx = p1 / dp;
      x -= dx;
      if (abs(dx) < tol) {
        // One more derivative at the polished node.
        p0 = 1;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        break;
      }
    }
    Real w = 2 / ((1 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1]; x is descending in i.
    rule.nodes[i] = (1 - x) / 2;
    rule.weights[i] = w / 2;
    rule.nodes[n - 1 - i] = (1 + x) / 2;
    rule.weights[n - 1 - i] = w / 2;
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<std::pair<int, unsigned>, std::unique_ptr<GaussRule>> cache;
  unsigned digits = Real::default_precision();
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, digits);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  ScopedPrecision guard(static_cast<int>(digits) + 10);
  auto rule = std::make_unique<GaussRule>(compute_rule(n));
  Real::default_precision(digits);
  for (auto& x : rule->nodes) x.precision(digits);
  for (auto& x : rule->weights) x.precision(digits);
  auto& ref = *rule;
  cache.emplace(key, std::move(rule));
  return ref;
}

std::vector<Complex> logs_near_infinity(const Complex& t, std::span<const Complex> centres) {
  std::vector<Complex> out(centres.size());
  Complex lt = principal_log(t);
  for (std::size_t k = 0; k < centres.size(); ++k)
    out[k] = lt + principal_log(Complex(1) - centres[k] / t);
  return out;
}

std::vector<Complex> continue_logs(std::span<const Complex> logs_p, const Complex& p, const Complex& t,
                                   std::span<const Complex> centres) {
  std::vector<Complex> out(centres.size());
  for (std::size_t k = 0; k < centres.size(); ++k)
    out[k] = logs_p[k] + principal_log((t - centres[k]) / (p - centres[k]));
  return out;
}

Complex power_product(std::span<const Complex> logs, std::span<const Real> exps) {
  Complex s(0);
  for (std::size_t k = 0; k < exps.size(); ++k)
    if (exps[k] != 0) s += logs[k] * exps[k];
  return exp(s);
}

namespace {

int find_centre(const std::vector<Complex>& centres, const Complex& z) {
  Real scale = 1;
  for (const auto& c : centres) scale = std::max(scale, Real(abs(c)));
  Real tol = scale * pow10(-static_cast<int>(Real::default_precision()) / 2);
  for (std::size_t k = 0; k < centres.size(); ++k)
    if (abs(centres[k] - z) <= tol) return static_cast<int>(k);
  throw std::invalid_argument("contour: singular endpoint does not match any centre");
}

}  // namespace

Contour Contour::polyline(std::vector<Complex> centres, const std::vector<Complex>& vin, std::size_t anchor,
                          std::vector<Complex> anchor_logs, int start_power, int end_power) {
  Contour c(std::move(centres));
  std::vector<Complex> v = vin;
  if (v.size() < 2) throw std::invalid_argument("contour: need at least two vertices");
  if (v.size() == 2 && start_power > 1 && end_power > 1)
    throw std::invalid_argument("contour: single segment with two singular ends; insert a midpoint");
  const std::size_t n = v.size();
  if ((anchor == 0 && start_power > 1) || (anchor == n - 1 && end_power > 1))
    throw std::invalid_argument("contour: anchor at a singular vertex");

  std::vector<std::vector<Complex>> logs(n);
  logs[anchor] = std::move(anchor_logs);
  for (std::size_t i = anchor + 1; i < n; ++i) {
    if (i == n - 1 && end_power > 1) break;
    logs[i] = continue_logs(logs[i - 1], v[i - 1], v[i], c.centres_);
  }
  for (std::size_t i = anchor; i-- > 0;) {
    if (i == 0 && start_power > 1) break;
    logs[i] = continue_logs(logs[i + 1], v[i + 1], v[i], c.centres_);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Leg leg;
    leg.a = v[i];
    leg.b = v[i + 1];
    if (i == 0 && start_power > 1) {
      leg.sing_start = find_centre(c.centres_, v[0]);
      leg.q_start = start_power;
      leg.anchor_at_start = false;
      leg.anchor_logs = logs[1];
    } else if (i + 2 == n && end_power > 1) {
      leg.sing_end = find_centre(c.centres_, v[n - 1]);
      leg.q_end = end_power;
      leg.anchor_at_start = true;
      leg.anchor_logs = logs[i];
    } else {
      leg.anchor_at_start = true;
      leg.anchor_logs = logs[i];
    }
    c.legs_.push_back(std::move(leg));
  }
  return c;
}

Contour Contour::circle(std::vector<Complex> centres, const Complex& centre, const Real& r,
                        std::vector<Complex> start_logs, int sides, const Real& phi0, bool clockwise) {
  std::vector<Complex> v;
  Real dir = clockwise ? Real(-1) : Real(1);
  for (int k = 0; k <= sides; ++k) {
    Real ang = phi0 + dir * 2 * pi() * Real(k) / Real(sides);
    v.push_back(centre + Complex(cos(ang), sin(ang)) * r);
  }
  v.back() = v.front();
  Contour c = polyline(std::move(centres), v, 0, std::move(start_logs));
  c.closed_ = true;
  return c;
}

Contour Contour::from_infinity(std::vector<Complex> centres, const Complex& far_point) {
  Contour c(std::move(centres));
  Leg leg;
  leg.kind = Leg::Kind::FromInfinity;
  leg.b = far_point;
  leg.a = far_point;
  leg.anchor_at_start = false;
  leg.anchor_logs = logs_near_infinity(far_point, c.centres_);
  c.legs_.push_back(std::move(leg));
  return c;
}

Complex Contour::start_point() const { return legs_.front().a; }
Complex Contour::end_point() const { return legs_.back().b; }

std::vector<Complex> Contour::end_logs() const {
  const Leg& leg = legs_.back();
  if (leg.sing_end >= 0) throw std::logic_error("contour: end point is singular");
  if (leg.kind == Leg::Kind::FromInfinity || !leg.anchor_at_start) return leg.anchor_logs;
  if (leg.sing_start >= 0) return leg.anchor_logs;
  return continue_logs(leg.anchor_logs, leg.a, leg.b, centres_);
}

std::vector<Complex> Contour::start_logs() const {
  const Leg& leg = legs_.front();
  if (leg.kind == Leg::Kind::FromInfinity) throw std::logic_error("contour: starts at infinity");
  if (leg.sing_start >= 0) throw std::logic_error("contour: start point is singular");
  if (leg.anchor_at_start) return leg.anchor_logs;
  return continue_logs(leg.anchor_logs, leg.b, leg.a, centres_);
}

void Contour::append_polyline(const std::vector<Complex>& vertices, int end_power) {
  std::vector<Complex> v;
  v.push_back(end_point());
  for (const auto& x : vertices) v.push_back(x);
  Contour tail = polyline(centres_, v, 0, end_logs(), 1, end_power);
  for (auto& leg : tail.legs_) legs_.push_back(std::move(leg));
}

void Contour::append(const Contour& other) {
  auto mine = end_logs();
  auto theirs = other.start_logs();
  for (Leg leg : other.legs_) {
    for (std::size_t k = 0; k < leg.anchor_logs.size(); ++k) leg.anchor_logs[k] += mine[k] - theirs[k];
    legs_.push_back(std::move(leg));
  }
}

Contour Contour::reversed() const {
  Contour c(centres_);
  c.closed_ = closed_;
  for (auto it = legs_.rbegin(); it != legs_.rend(); ++it) {
    if (it->kind == Leg::Kind::FromInfinity) throw std::logic_error("contour: cannot reverse a tail leg");
    Leg leg = *it;
    std::swap(leg.a, leg.b);
    std::swap(leg.sing_start, leg.sing_end);
    std::swap(leg.q_start, leg.q_end);
    leg.anchor_at_start = !leg.anchor_at_start;
    c.legs_.push_back(std::move(leg));
  }
  return c;
}

void Contour::eval_leg(const Leg& leg, const Real& u, Complex& t, Complex& dt, std::vector<Complex>& logs) const {
  const std::size_t m = centres_.size();
  logs.resize(m);
  if (leg.kind == Leg::Kind::FromInfinity) {
    t = leg.b / u;
    dt = -leg.b / (u * u);
    Real lu = log(u);
    for (std::size_t k = 0; k < m; ++k) {
      Complex rb = centres_[k] / leg.b;
      logs[k] = leg.anchor_logs[k] - lu + principal_log(Complex(1) - rb * u) - principal_log(Complex(1) - rb);
    }
    return;
  }
  const Complex d = leg.b - leg.a;
  if (leg.sing_start >= 0) {
    const int q = leg.q_start;
    Real uq = pow(u, q);
    t = leg.a + d * uq;
    dt = d * (Real(q) * pow(u, q - 1));
    for (std::size_t k = 0; k < m; ++k) {
      if (static_cast<int>(k) == leg.sing_start)
        logs[k] = leg.anchor_logs[k] + Complex(Real(q) * log(u));
      else
        logs[k] = leg.anchor_logs[k] + principal_log((t - centres_[k]) / (leg.b - centres_[k]));
    }
    return;
  }
  if (leg.sing_end >= 0) {
    const int q = leg.q_end;
    Real s = 1 - u;
    Real sq = pow(s, q);
    t = leg.b - d * sq;
    dt = d * (Real(q) * pow(s, q - 1));
    for (std::size_t k = 0; k < m; ++k) {
      if (static_cast<int>(k) == leg.sing_end)
        logs[k] = leg.anchor_logs[k] + Complex(Real(q) * log(s));
      else
        logs[k] = leg.anchor_logs[k] + principal_log((t - centres_[k]) / (leg.a - centres_[k]));
    }
    return;
  }
  t = leg.a + d * u;
  dt = d;
  const Complex& p = leg.anchor_at_start ? leg.a : leg.b;
  for (std::size_t k = 0; k < m; ++k)
    logs[k] = leg.anchor_logs[k] + principal_log((t - centres_[k]) / (p - centres_[k]));
}

namespace {

struct Estimate {
  Complex value;
  Real mass;
};

Estimate apply_rule(const std::function<Complex(const Real&)>& g, int n, const Real& lo, const Real& hi) {
  const GaussRule& r = gauss_legendre(n);
  Real h = hi - lo;
  Estimate e{Complex(0), Real(0)};
  for (int i = 0; i < n; ++i) {
    Complex v = g(lo + h * r.nodes[i]);
    if (!finite_c(v)) throw SingularInterior("integrate: integrand not finite at an interior node");
    e.value += v * r.weights[i];
    e.mass += abs(v) * r.weights[i];
  }
  e.value *= h;
  e.mass *= h;
  return e;
}

Complex adapt(const std::function<Complex(const Real&)>& g, const Real& lo, const Real& hi, const Real& tol,
              int depth) {
  Estimate prev = apply_rule(g, 32, lo, hi);
  for (int n : {64, 128}) {
    Estimate cur = apply_rule(g, n, lo, hi);
    if (abs(cur.value - prev.value) <= tol * cur.mass) return cur.value;
    prev = cur;
  }
  if (depth <= 0) throw ToleranceNotReached("integrate: maximum refinement depth reached");
  Real mid = (lo + hi) / 2;
  return adapt(g, lo, mid, tol, depth - 1) + adapt(g, mid, hi, tol, depth - 1);
}

}  // namespace

Complex integrate_unit(const std::function<Complex(const Real&)>& g, const Real& tol, int max_depth) {
  return adapt(g, Real(0), Real(1), tol, max_depth);
}

Complex integrate(const LogIntegrand& g, const Contour& c, const PrecisionPolicy& policy) {
  Complex total(0);
  std::vector<Complex> logs;
  for (const Leg& leg : c.legs()) {
    auto fn = [&](const Real& u) {
      Complex t, dt;
      c.eval_leg(leg, u, t, dt, logs);
      return g(t, logs) * dt;
    };
    total += integrate_unit(fn, policy.quad_rel_tol);
  }
  return total;
}

Real integrate_abs(const LogIntegrand& g, const Contour& c, const PrecisionPolicy& policy) {
  Real total = 0;
  std::vector<Complex> logs;
  for (const Leg& leg : c.legs()) {
    auto fn = [&](const Real& u) {
      Complex t, dt;
      c.eval_leg(leg, u, t, dt, logs);
      return Complex(Real(abs(g(t, logs) * dt)));
    };
    total += integrate_unit(fn, policy.quad_rel_tol).real();
  }
  return total;
}

NodeSet discretize(const LogIntegrand& g, const Contour& c, int order, int splits) {
  const GaussRule& rule = gauss_legendre(order);
  NodeSet out;
  std::vector<Complex> logs;
  for (const Leg& leg : c.legs())
    for (int s = 0; s < splits; ++s) {
      Real lo = Real(s) / splits, width = Real(1) / splits;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        Complex t, dt;
        c.eval_leg(leg, lo + width * rule.nodes[k], t, dt, logs);
        Complex w = g(t, logs) * dt * (rule.weights[k] * width);
        if (!finite_c(w)) throw SingularInterior("discretize: non-finite weight");
        out.t.push_back(t);
        out.w.push_back(w);
      }
    }
  return out;
}

Complex integrate(const PlainIntegrand& g, const Contour& c, const PrecisionPolicy& policy) {
  return integrate([&](const Complex& t, std::span<const Complex>) { return g(t); }, c, policy);
}

}  // namespace padelab
