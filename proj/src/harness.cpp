#include "padelab/harness.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

namespace padelab {

using json = nlohmann::ordered_json;

namespace {

std::string scalar_text(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.dump();
  throw InvalidConfig("config: expected a number or a string, got " + j.dump());
}

json cjson(const std::complex<double>& z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

template <class T>
json opt(const std::optional<T>& x) {
  return x ? json(*x) : json(nullptr);
}

json opt_c(const std::optional<std::complex<double>>& x) { return x ? cjson(*x) : json(nullptr); }

std::array<Complex, 3> points3(const BranchConfig& c) {
  auto p = c.points();
  return {p[0], p[1], p[2]};
}

void add_check(ExperimentReport& r, std::string name, const Real& value, double tol) {
  CheckRecord c;
  c.name = std::move(name);
  c.value = to_d(value);
  c.tolerance = tol;
  c.pass = value < Real(tol);
  r.checks.push_back(std::move(c));
}

const std::vector<double> kArcFractions{0.15, 0.3, 0.5, 0.7, 0.85};

// Identity checks of the per-index surface objects, canonical frame.
void surface_identity_checks(ExperimentReport& r, const SurfaceBundle& b, const ParametrixData& p) {
  const Tolerances& tol = r.tolerances;
  const auto& k = p.constants;
  const auto& s = p.szego;
  const std::string tag = "_n" + std::to_string(k.n);
  Complex target[3] = {k.s_nj[0], -k.s_nj[1], k.s_nj[0] * exp(s.beta3)};
  Real nj = 0;
  for (int j = 0; j < 3; ++j) {
    Real worst = 0;
    for (double f : kArcFractions) {
      auto node = b.geometry.cut.arcs()[j].node_at(f);
      Complex prod =
          exp(szego_log_boundary(b, s, j, node, Side::Plus) + szego_log_boundary(b, s, j, node, Side::Minus));
      worst = std::max(worst, Real(abs(prod / target[j] - 1)));
      Mat2 Np = eval_N_boundary(b, p, j, node, Side::Plus), Nm = eval_N_boundary(b, p, j, node, Side::Minus);
      const Complex& sj = k.s_nj[j];
      Mat2 J{{{-Nm[0][1] / sj, Nm[0][0] * sj}, {-Nm[1][1] / sj, Nm[1][0] * sj}}};
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) nj = std::max(nj, Real(abs(Np[a][c] - J[a][c]) / (abs(J[a][c]) + 1)));
    }
    add_check(r, "szego_jump_arc" + std::to_string(j + 1) + tag, worst, tol.jump);
  }
  add_check(r, "N_jump" + tag, nj, tol.jump);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  const double scale = b.geometry.cut.diameter();
  Real det = 0;
  for (int checked = 0; checked < 20;) {
    Complex z(Real(U(rng) * scale), Real(U(rng) * scale));
    if (b.geometry.cut.distance(to_cd(z)) < 0.02 * scale) continue;
    Mat2 N = eval_N(b, p, z);
    det = std::max(det, Real(abs(N[0][0] * N[1][1] - N[0][1] * N[1][0] - 1)));
    ++checked;
  }
  add_check(r, "det_N" + tag, det, tol.jump);
  add_check(r, "nuttall" + tag, nuttall_boundary_check(b, p, kArcFractions), tol.nuttall);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  c.version = j.value("version", 0);
  if (c.version != 1) throw InvalidConfig("config: unsupported version " + std::to_string(c.version));
  for (const auto& p : j.at("points")) {
    if (p.is_array() && p.size() == 2) {
      c.points.emplace_back(scalar_text(p[0]), scalar_text(p[1]));
    } else if (p.is_object() && p.contains("polar")) {
      // r e^{2 pi i t} with t a rational number of turns
      c.points.emplace_back("polar:" + scalar_text(p["polar"][0]), scalar_text(p["polar"][1]));
    } else {
      throw InvalidConfig("config: point must be [re, im] or {\"polar\": [r, turns]}");
    }
  }
  for (const auto& e : j.at("exponents")) c.exponents.push_back(scalar_text(e));
  c.n_list = j.at("n_list").get<std::vector<int>>();
  if (j.contains("probes"))
    for (const auto& p : j["probes"]) c.probes.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  if (j.contains("precision")) {
    const auto& p = j["precision"];
    c.digits = p.value("digits", c.digits);
    if (p.contains("pade_digits") && !p["pade_digits"].is_null()) c.pade_digits = p["pade_digits"].get<int>();
  }
  if (j.contains("spurious_epsilon") && !j["spurious_epsilon"].is_null())
    c.spurious_epsilon = j["spurious_epsilon"].get<double>();
  if (j.contains("sine_pair")) {
    auto sp = j["sine_pair"].get<std::vector<int>>();
    if (sp.size() != 2) throw InvalidConfig("config: sine_pair needs two labels");
    c.sine_pair = {sp[0], sp[1]};
  }
  c.orthogonality_max_n = j.value("orthogonality_max_n", c.orthogonality_max_n);
  if (j.contains("stages")) {
    c.pade = j["stages"].value("pade", c.pade);
    c.surface = j["stages"].value("surface", c.surface);
    c.ode = j["stages"].value("ode", c.ode);
  }
  if (j.contains("output")) c.out_dir = j["output"].value("dir", c.out_dir);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

ExperimentConfig ExperimentConfig::figure1() {
  ExperimentConfig c;
  c.points = {{"-1.2", "0"}, {"0.7", "1.75"}, {"1", "0.8"}};
  c.exponents = {"-3/7", "1/7", "2/7"};
  c.n_list = {71, 72};
  c.probes = {{3.5, 1}, {-3, 2}, {0.5, -2.5}};
  c.out_dir = "figure1";
  return c;
}

BranchConfig ExperimentConfig::branch_config() const {
  std::vector<Rational> ex;
  for (const auto& e : exponents) ex.push_back(parse_rational(e));
  bool polar = false;
  for (const auto& p : points) polar = polar || p.first.rfind("polar:", 0) == 0;
  if (!polar) {
    std::vector<GaussRational> pts;
    for (const auto& p : points) pts.push_back({parse_rational(p.first), parse_rational(p.second)});
    return BranchConfig(pts, ex);
  }
  std::vector<Complex> pts;
  for (const auto& p : points) {
    if (p.first.rfind("polar:", 0) == 0) {
      Real r = to_real(parse_rational(p.first.substr(6)));
      Real th = 2 * pi() * to_real(parse_rational(p.second));
      pts.push_back(Complex(r * cos(th), r * sin(th)));
    } else {
      pts.push_back(Complex(to_real(parse_rational(p.first)), to_real(parse_rational(p.second))));
    }
  }
  return BranchConfig(pts, ex);
}

int ExperimentConfig::pade_digits_for(int n) const { return pade_digits ? *pade_digits : 4 * n + digits - 10; }

void ExperimentConfig::validate() const {
  if (points.size() != 3 || exponents.size() != 3) throw InvalidConfig("config: three points and exponents required");
  if (pade && n_list.empty()) throw InvalidConfig("config: n_list is empty");
  for (int n : n_list)
    if (n < 0) throw InvalidConfig("config: negative n");
  if (digits < 20) throw InvalidConfig("config: digits must be at least 20");
  for (int l : sine_pair)
    if (l < 1 || l > 3) throw InvalidConfig("config: sine_pair labels must be 1, 2 or 3");
  if (sine_pair[0] == sine_pair[1]) throw InvalidConfig("config: sine_pair labels must differ");
  ScopedPrecision sp(digits);
  branch_config().require_three_point();
}

const IndexRecord* ExperimentReport::index(int n) const {
  for (const auto& r : indices)
    if (r.n == n) return &r;
  return nullptr;
}

const CheckRecord* ExperimentReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ExperimentReport run(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport r;
  r.config = cfg;
  ScopedPrecision sp(cfg.digits);
  const auto pol = PrecisionPolicy::with_digits(cfg.digits);
  BranchConfig bc = cfg.branch_config();
  const Tolerances& tol = r.tolerances;

  // geometry
  StarGeometry& g = r.geometry;
  try {
    g = build_star(points3(bc), pol);
  } catch (const Error& e) {
    r.errors.push_back(std::string("geometry: ") + e.what());
    r.status = "error";
    return r;
  }
  r.v = to_cd(g.v);
  r.c = to_cd(g.c);
  for (int j = 0; j < 3; ++j) r.masses[j] = to_d(g.masses[j]);
  auto kap = kappas(g.masses, g.orientation);
  for (int j = 0; j < 3; ++j) r.kappa[j] = to_cd(kap.kappa[j]);
  r.orientation = g.orientation;
  r.diameter = g.cut.diameter();
  r.epsilon = cfg.spurious_epsilon ? *cfg.spurious_epsilon : default_spurious_epsilon(g.cut);
  for (int j = 0; j < 3; ++j) {
    Real worst = 0;
    for (double f : kArcFractions) {
      auto node = g.cut.arcs()[j].node_at(f);
      Complex prod = phi_boundary(g, j, node, Side::Plus, pol) * phi_boundary(g, j, node, Side::Minus, pol);
      worst = std::max(worst, Real(abs(prod / kap.kappa[j] - 1)));
    }
    add_check(r, "phi_jump_arc" + std::to_string(j + 1), worst, tol.jump);
  }

  // surface bundle
  std::optional<SurfaceBundle> bundle;
  if (cfg.surface) {
    try {
      bundle.emplace(bc, g, pol);
      const auto& P = bundle->periods;
      r.mirrored = bundle->mirrored;
      Complex s[3] = {0, 0, 0};
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          r.M[j][k] = to_cd(P.M[j][k]);
          s[k] += P.M[j][k];
        }
      r.tau = to_cd(P.tau);
      r.S = to_cd(P.S);
      add_check(r, "period_sum_k0", abs(s[0]), tol.period_sum);
      add_check(r, "period_sum_k1", abs(s[1] - Complex(Real(0.5))), tol.period_sum);
      add_check(r, "period_sum_k2", abs(s[2] - P.S / 2), tol.period_sum);
      CheckRecord c{"im_tau", to_d(P.tau.imag()), 0.0, P.tau.imag() < 0, "<"};
      r.checks.push_back(c);
    } catch (const Error& e) {
      r.errors.push_back(std::string("surface: ") + e.what());
      bundle.reset();
    }
  }

  bool surface_checked = false;
  for (int n : cfg.pade ? cfg.n_list : std::vector<int>{}) {
    IndexRecord rec;
    rec.n = n;
    rec.pade_digits = cfg.pade_digits_for(n);
    const int dp = rec.pade_digits;
    PadeTriple t;
    std::vector<Complex> Qp(cfg.probes.size()), Rp(cfg.probes.size());
    std::vector<bool> have(cfg.probes.size(), false);
    rec.probes.resize(cfg.probes.size());
    for (std::size_t i = 0; i < cfg.probes.size(); ++i) rec.probes[i].z = cfg.probes[i];
    std::optional<OdeExtraction> ext;
    try {
      ScopedPrecision hp(dp);
      auto pp = PrecisionPolicy::with_digits(dp);
      BranchConfig bn = cfg.branch_config();
      auto f = taylor_at_infinity(bn, 2 * n + 4);
      t = frobenius_solve(f, n, pp);
      rec.normal = t.normal;
      rec.contact_residual = to_d(contact_residual(t, f));
      auto zr = classify_zeros(t, g.cut, r.epsilon, pp);
      for (const auto& z : zr.zeros) rec.zeros.push_back({to_cd(z.z), z.distance, z.arc});
      for (int j = 0; j < 3; ++j) rec.arc_fractions[j] = n > 0 ? double(zr.per_arc[j]) / n : 0.0;
      rec.spurious = zr.spurious;
      auto pts = bn.points();
      CutSystem cut = rebase_cut(g.cut, {pts[0], pts[1], pts[2], promote(g.v)});
      const bool small = n <= cfg.orthogonality_max_n;
      if (small && n > 0) {
        Real o = check_orthogonality(t, bn, cut, pp);
        rec.orthogonality = to_d(o);
        add_check(r, "orthogonality_n" + std::to_string(n), o, to_d(pow10(-dp / 2 + tol.orthogonality_offset)));
      }
      Real agree = 0;
      for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
        Complex z(Real(cfg.probes[i].real()), Real(cfg.probes[i].imag()));
        if (g.cut.distance(cfg.probes[i]) <= g.cut.on_cut_tolerance()) continue;
        Qp[i] = t.Q(z);
        Rp[i] = direct_remainder(t, bn, cut, z);
        have[i] = true;
        if (small) {
          Complex alt = eval_remainder(t, bn, cut, z, pp);
          Real a = abs(alt - Rp[i]) / abs(Rp[i]);
          rec.probes[i].remainder_agreement = to_d(a);
          agree = std::max(agree, a);
        }
      }
      if (small && !cfg.probes.empty())
        add_check(r, "remainder_agreement_n" + std::to_string(n), agree, tol.remainder_agreement);
      if (cfg.ode && t.normal && n >= 2) {
        ext = extract(t, bn, g.v, pp);
        rec.ode_residual = to_d(ext->residual);
        rec.z1n = to_cd(ext->z1n);
        rec.v1n = to_cd(ext->v1n);
        rec.v1n_distance = to_d(abs(ext->v1n - promote(g.v)));
        add_check(r, "ode_residual_n" + std::to_string(n), ext->residual,
                  to_d(pow10(-dp / tol.ode_residual_divisor)));
      }
    } catch (const Error& e) {
      rec.errors.push_back(std::string("pade: ") + e.what());
    }

    if (ext) {
      try {
        auto s = sine_formula_check(*ext, bc, cfg.sine_pair[0] - 1, cfg.sine_pair[1] - 1, g.cut.diameter(), pol);
        rec.sine_deviation = to_d(s.deviation);
        rec.sine_pair_enclosed = s.pair_enclosed;
      } catch (const Error& e) {
        rec.errors.push_back(std::string("sine: ") + e.what());
      }
    }

    if (bundle) {
      const SurfaceBundle& b = *bundle;
      try {
        IndexConstants k = index_constants(b.cfg, kappas(b.geometry.masses, b.geometry.orientation), n);
        InversionResult inv = jacobi_inversion(b, k);
        rec.pathological = inv.pathological;
        rec.z_n_sheet = inv.z_n.sheet;
        rec.z_n_at_infinity = inv.z_n.at_infinity;
        if (!inv.z_n.at_infinity) rec.z_n = to_cd(b.from_canonical(inv.z_n.z));
        if (!inv.pathological) {
          EtaData e = eta_differential(b, inv);
          SzegoData s = szego_function(b, k, inv);
          ParametrixData p = parametrix(b, k, inv, s, e);
          rec.delta1 = to_cd(e.delta1);
          rec.F_infinity = to_cd(s.F_infinity);
          rec.beta = {to_cd(s.beta1), to_cd(s.beta2), to_cd(s.beta3)};
          if (p.predicted_spurious) {
            rec.predicted_spurious = to_cd(b.from_canonical(*p.predicted_spurious));
            for (const auto& z : rec.zeros)
              if (z.arc < 0) {
                double d = std::abs(z.z - *rec.predicted_spurious);
                if (!rec.prediction_distance || d < *rec.prediction_distance) rec.prediction_distance = d;
              }
          }
          Complex sign(0);
          for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
            if (!have[i]) continue;
            Prediction pr = predict(b, p, Complex(Real(cfg.probes[i].real()), Real(cfg.probes[i].imag())));
            rec.probes[i].rel_err_Q = to_d(abs(Qp[i] / pr.chi - 1));
            if (sign == Complex(0)) sign = (Rp[i] / pr.r_frak).real() > 0 ? Complex(1) : Complex(-1);
            rec.probes[i].rel_err_R = to_d(abs(sign * Rp[i] / pr.r_frak - 1));
          }
          if (!surface_checked) {
            surface_identity_checks(r, b, p);
            surface_checked = true;
          }
        }
      } catch (const Error& e) {
        rec.errors.push_back(std::string("surface: ") + e.what());
      }
    }
    r.indices.push_back(std::move(rec));
  }

  bool failed = false, errored = !r.errors.empty();
  for (const auto& c : r.checks) failed = failed || !c.pass;
  for (const auto& rec : r.indices) errored = errored || !rec.errors.empty();
  r.status = errored ? "error" : failed ? "attention" : "ok";
  return r;
}

std::string report_json(const ExperimentReport& r) {
  json j;
  const auto& c = r.config;
  j["status"] = r.status;
  json cfg;
  cfg["version"] = c.version;
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back({p.first, p.second});
  cfg["points"] = pts;
  cfg["exponents"] = c.exponents;
  cfg["n_list"] = c.n_list;
  json pr = json::array();
  for (const auto& p : c.probes) pr.push_back({p.real(), p.imag()});
  cfg["probes"] = pr;
  cfg["digits"] = c.digits;
  cfg["pade_digits"] = opt(c.pade_digits);
  cfg["stages"] = {{"pade", c.pade}, {"surface", c.surface}, {"ode", c.ode}};
  cfg["sine_pair"] = {c.sine_pair[0], c.sine_pair[1]};
  j["config"] = cfg;
  const auto& t = r.tolerances;
  j["tolerances"] = {{"period_sum", t.period_sum},
                     {"jump", t.jump},
                     {"nuttall", t.nuttall},
                     {"remainder_agreement", t.remainder_agreement},
                     {"orthogonality", "10^(-pade_digits/2+" + std::to_string(t.orthogonality_offset) + ")"},
                     {"ode_residual", "10^(-pade_digits/" + std::to_string(t.ode_residual_divisor) + ")"},
                     {"reproducibility", "10^(-digits/" + std::to_string(t.reproducibility_divisor) + ")"}};
  json geo;
  geo["v"] = cjson(r.v);
  geo["masses"] = r.masses;
  geo["c"] = cjson(r.c);
  geo["kappa"] = {cjson(r.kappa[0]), cjson(r.kappa[1]), cjson(r.kappa[2])};
  geo["orientation"] = r.orientation;
  geo["diameter"] = r.diameter;
  geo["spurious_epsilon"] = r.epsilon;
  j["geometry"] = geo;
  json con;
  con["mirrored_frame"] = r.mirrored;
  json M = json::array();
  for (const auto& row : r.M) M.push_back({cjson(row[0]), cjson(row[1]), cjson(row[2])});
  con["M"] = M;
  con["tau"] = cjson(r.tau);
  con["S"] = cjson(r.S);
  j["constants"] = con;
  json checks = json::array();
  for (const auto& ch : r.checks)
    checks.push_back({{"name", ch.name},
                      {"value", ch.value},
                      {"relation", ch.relation},
                      {"tolerance", ch.tolerance},
                      {"pass", ch.pass}});
  j["checks"] = checks;
  json idx = json::array();
  for (const auto& x : r.indices) {
    json o;
    o["n"] = x.n;
    o["pade_digits"] = x.pade_digits;
    o["normal"] = x.normal;
    o["contact_residual"] = x.contact_residual;
    o["orthogonality"] = opt(x.orthogonality);
    json zs = json::array();
    for (const auto& z : x.zeros)
      zs.push_back({{"re", z.z.real()}, {"im", z.z.imag()}, {"arc", z.arc < 0 ? json("spurious") : json(z.arc + 1)},
                    {"dist_to_gamma", z.distance}});
    o["zeros"] = zs;
    o["arc_fractions"] = x.arc_fractions;
    o["spurious"] = x.spurious;
    o["pathological"] = x.pathological;
    o["z_n"] = {{"point", opt_c(x.z_n)}, {"sheet", x.z_n_sheet}, {"at_infinity", x.z_n_at_infinity}};
    o["predicted_spurious"] = opt_c(x.predicted_spurious);
    o["prediction_distance"] = opt(x.prediction_distance);
    o["delta1"] = opt_c(x.delta1);
    o["F_infinity"] = opt_c(x.F_infinity);
    o["beta"] = {cjson(x.beta[0]), cjson(x.beta[1]), cjson(x.beta[2])};
    json ps = json::array();
    for (const auto& p : x.probes)
      ps.push_back({{"z", cjson(p.z)},
                    {"rel_err_Q", opt(p.rel_err_Q)},
                    {"rel_err_R", opt(p.rel_err_R)},
                    {"remainder_agreement", opt(p.remainder_agreement)}});
    o["probes"] = ps;
    o["ode_residual"] = opt(x.ode_residual);
    o["z1n"] = opt_c(x.z1n);
    o["v1n"] = opt_c(x.v1n);
    o["v1n_distance"] = opt(x.v1n_distance);
    o["sine_deviation"] = opt(x.sine_deviation);
    o["sine_pair_enclosed"] = x.sine_pair_enclosed;
    o["errors"] = x.errors;
    idx.push_back(o);
  }
  j["indices"] = idx;
  j["errors"] = r.errors;
  return j.dump(2);
}

void emit_plot_data(const ExperimentReport& r, PlotKind kind, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.precision(17);
  switch (kind) {
    case PlotKind::Arcs:
      write_arcs_csv(r.geometry, os);
      break;
    case PlotKind::Zeros:
      os << "n,re,im,arc_or_spurious,dist_to_gamma\n";
      for (const auto& x : r.indices)
        for (const auto& z : x.zeros)
          os << x.n << ',' << z.z.real() << ',' << z.z.imag() << ','
             << (z.arc < 0 ? std::string("spurious") : std::to_string(z.arc + 1)) << ',' << z.distance << '\n';
      break;
    case PlotKind::ErrorCurve:
      os << "n,probe_re,probe_im,rel_err_Q,rel_err_R,ode_residual,sine_deviation\n";
      for (const auto& x : r.indices)
        for (const auto& p : x.probes) {
          auto f = [&](const std::optional<double>& v) { return v ? (std::ostringstream() << *v).str() : ""; };
          os << x.n << ',' << p.z.real() << ',' << p.z.imag() << ',' << f(p.rel_err_Q) << ',' << f(p.rel_err_R)
             << ',' << f(x.ode_residual) << ',' << f(x.sine_deviation) << '\n';
        }
      break;
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace padelab
