#include "padelab/algebraic_function.hpp"

namespace padelab {

std::vector<Real> f_exponents(const BranchConfig& cfg, const CutSystem& cut, const Real& scale) {
  std::vector<Real> e(cut.centres().size(), Real(0));
  auto al = cfg.exponents_real();
  for (std::size_t j = 0; j < al.size(); ++j) e[j] = al[j] * scale;
  return e;
}

FValue f_from_logs(const BranchConfig& cfg, const CutSystem& cut, std::span<const Complex> logs) {
  Complex s(0);
  auto al = cfg.exponents_real();
  (void)cut;
  for (std::size_t j = 0; j < al.size(); ++j) s += logs[j] * al[j];
  return {exp(s), exp(s / 2)};
}

FValue eval_f(const BranchConfig& cfg, const CutSystem& cut, const Complex& z) {
  auto logs = cut.route(z).end_logs();
  return f_from_logs(cfg, cut, logs);
}

BoundaryRho boundary_f_and_rho(const BranchConfig& cfg, const CutSystem& cut, int arc, std::size_t node, Side side) {
  const Arc& a = cut.arcs().at(arc);
  if (node == 0 || node + 1 >= a.nodes.size()) throw TooCloseToEndpoint("boundary values need an interior node");
  Complex fp = f_from_logs(cfg, cut, cut.side_logs(arc, node, Side::Plus)).f;
  Complex fm = f_from_logs(cfg, cut, cut.side_logs(arc, node, Side::Minus)).f;
  BoundaryRho out;
  out.f_side = {a.nodes[node], side, side == Side::Plus ? fp : fm};
  out.rho = fm - fp;
  return out;
}

CutSystem segment_cut(const BranchConfig& cfg, int nodes) {
  if (cfg.p() != 2) throw InvalidConfig("segment cut needs two branch points");
  auto pts = cfg.points();
  Arc arc;
  arc.start = 0;
  arc.end = 1;
  for (int k = 0; k < nodes; ++k) {
    // Chebyshev-like spacing to refine towards the ends.
    Real s = (1 - cos(pi() * Real(k) / Real(nodes - 1))) / 2;
    arc.nodes.push_back(pts[0] + (pts[1] - pts[0]) * s);
  }
  arc.nodes.front() = pts[0];
  arc.nodes.back() = pts[1];
  arc.finalize();
  return CutSystem(pts, {arc});
}

}  // namespace padelab
