#pragma once

#include <optional>
#include <string>

#include "padelab/ode.hpp"
#include "padelab/surface.hpp"

namespace padelab {

// Tolerances quoted in every report.
struct Tolerances {
  double period_sum = 1e-10;
  double jump = 1e-8;      // Phi, F and N jumps, det N - 1
  double nuttall = 1e-6;
  double remainder_agreement = 1e-10;
  int orthogonality_offset = 5;  // moment residual < 10^(-digits/2 + offset)
  int ode_residual_divisor = 3;  // residual < 10^(-digits/divisor)
  int reproducibility_divisor = 3;  // reported values stable to 10^(-digits/divisor)
};

struct ExperimentConfig {
  int version = 1;
  std::vector<std::pair<std::string, std::string>> points;  // exact decimal or p/q strings
  std::vector<std::string> exponents;
  std::vector<int> n_list;
  std::vector<std::complex<double>> probes;
  int digits = 30;              // geometry and surface precision
  std::optional<int> pade_digits;  // fixed Pade precision; default 4n + digits - 10
  std::optional<double> spurious_epsilon;  // default 0.05 diam
  std::array<int, 2> sine_pair{1, 2};  // 1-based branch point labels
  int orthogonality_max_n = 40;
  bool pade = true;     // per-index stages; off leaves geometry only
  bool surface = true;  // predictions, inversion and identity checks
  bool ode = true;
  std::string out_dir = "out";

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  // Figure 1 configuration at n = 71, 72.
  static ExperimentConfig figure1();
  BranchConfig branch_config() const;
  int pade_digits_for(int n) const;
  void validate() const;
};

struct CheckRecord {
  std::string name;
  double value = 0;
  double tolerance = 0;
  bool pass = false;
  std::string relation = "<";  // value < tolerance unless stated
};

struct ZeroRecord {
  std::complex<double> z;
  double distance = 0;
  int arc = -1;  // 0-based, -1 spurious
};

struct ProbeRecord {
  std::complex<double> z;
  std::optional<double> rel_err_Q, rel_err_R;
  std::optional<double> remainder_agreement;
};

struct IndexRecord {
  int n = 0;
  int pade_digits = 0;
  bool normal = true;
  double contact_residual = 0;
  std::optional<double> orthogonality;
  std::vector<ZeroRecord> zeros;
  std::array<double, 3> arc_fractions{0, 0, 0};
  int spurious = 0;
  // inversion
  bool pathological = false;
  std::optional<std::complex<double>> z_n;  // caller frame, finite z_n
  int z_n_sheet = 0;
  bool z_n_at_infinity = false;
  std::optional<std::complex<double>> predicted_spurious;
  std::optional<double> prediction_distance;  // to the nearest observed spurious zero
  std::optional<std::complex<double>> delta1, F_infinity;
  std::array<std::complex<double>, 3> beta{};
  std::vector<ProbeRecord> probes;
  // ODE
  std::optional<double> ode_residual;
  std::optional<std::complex<double>> z1n, v1n;
  std::optional<double> v1n_distance, sine_deviation;
  bool sine_pair_enclosed = false;
  std::vector<std::string> errors;  // "stage: message"
};

struct ExperimentReport {
  ExperimentConfig config;
  Tolerances tolerances;
  std::string status = "ok";  // ok, attention (a check failed), error (a stage failed)
  // geometry summary, caller frame
  std::complex<double> v, c;
  std::array<double, 3> masses{};
  std::array<std::complex<double>, 3> kappa{};
  int orientation = 1;
  double diameter = 0;
  double epsilon = 0;
  // surface constants
  bool mirrored = false;
  std::array<std::array<std::complex<double>, 3>, 3> M{};
  std::complex<double> tau, S;
  std::vector<CheckRecord> checks;
  std::vector<IndexRecord> indices;
  std::vector<std::string> errors;
  StarGeometry geometry;  // for plot output

  const IndexRecord* index(int n) const;
  const CheckRecord* check(const std::string& name) const;
};

ExperimentReport run(const ExperimentConfig& cfg);

std::string report_json(const ExperimentReport& r);
enum class PlotKind { Zeros, Arcs, ErrorCurve };
void emit_plot_data(const ExperimentReport& r, PlotKind kind, const std::string& path);

}  // namespace padelab
