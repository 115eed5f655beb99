#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "padelab/harness.hpp"

using namespace padelab;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<int> digits;
  std::string out;
  std::string format = "json";
};

ExperimentConfig load_config(const Options& o, bool preset_figure1) {
  ExperimentConfig c = preset_figure1 || o.config.empty() ? ExperimentConfig::figure1() : ExperimentConfig::load(o.config);
  if (o.digits) c.digits = *o.digits;
  if (!o.out.empty()) c.out_dir = o.out;
  c.validate();
  return c;
}

int emit(const ExperimentReport& r, const Options& o, std::initializer_list<std::pair<PlotKind, const char*>> csv) {
  fs::path dir(r.config.out_dir);
  fs::create_directories(dir);
  if (o.format == "json") {
    std::ofstream os(dir / "report.json");
    os << report_json(r) << '\n';
    if (!os) throw std::runtime_error("write failed: " + (dir / "report.json").string());
    std::cout << (dir / "report.json").string() << '\n';
  } else {
    for (const auto& [kind, name] : csv) {
      emit_plot_data(r, kind, (dir / name).string());
      std::cout << (dir / name).string() << '\n';
    }
  }
  for (const auto& c : r.checks)
    if (!c.pass) std::cerr << "check failed: " << c.name << " = " << c.value << " (tolerance " << c.tolerance << ")\n";
  for (const auto& e : r.errors) std::cerr << "error: " << e << '\n';
  for (const auto& x : r.indices)
    for (const auto& e : x.errors) std::cerr << "error at n = " << x.n << ": " << e << '\n';
  std::cerr << "status: " << r.status << '\n';
  return r.status == "error" ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pade approximants of three-point algebraic functions: geometry, zeros and strong asymptotics"};
  app.require_subcommand(1);
  Options o;
  auto add_flags = [&](CLI::App* s) {
    s->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
    s->add_option("--digits", o.digits, "decimal digits for geometry and surface stages")->check(CLI::Range(20, 2000));
    s->add_option("--out", o.out, "output directory");
    s->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto* geometry = app.add_subcommand("geometry", "solve the star geometry and export its arcs");
  auto* pade = app.add_subcommand("pade", "compute Q_n over n_list and export zeros");
  auto* predict = app.add_subcommand("predict", "surface bundle and predicted chi, r at the probes");
  auto* compare = app.add_subcommand("compare", "full report with all identity checks");
  auto* figure1 = app.add_subcommand("figure1", "preset configuration at n = 71, 72");
  auto* sweep = app.add_subcommand("sweep", "error against n at the probes");
  for (auto* s : {geometry, pade, predict, compare, figure1, sweep}) add_flags(s);
  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig c = load_config(o, figure1->parsed());
    if (geometry->parsed()) {
      c.pade = c.surface = c.ode = false;
      return emit(run(c), o, {{PlotKind::Arcs, "arcs.csv"}});
    }
    if (pade->parsed()) {
      c.surface = c.ode = false;
      return emit(run(c), o, {{PlotKind::Zeros, "zeros.csv"}});
    }
    if (predict->parsed()) {
      c.ode = false;
      return emit(run(c), o, {{PlotKind::ErrorCurve, "error_curve.csv"}});
    }
    if (sweep->parsed()) return emit(run(c), o, {{PlotKind::ErrorCurve, "error_curve.csv"}});
    return emit(run(c), o,
                {{PlotKind::Zeros, "zeros.csv"}, {PlotKind::Arcs, "arcs.csv"}, {PlotKind::ErrorCurve, "error_curve.csv"}});
  } catch (const InvalidConfig& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
