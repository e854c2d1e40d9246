#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddm/diagnostics.hpp"

namespace ddm {

enum class ExperimentKind {
  Contraction,
  OracleInequality,
  SmallBall,
  CoverageSize,
  Overshrinkage,
  ScaleAdaptation
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct SignalSpec {
  SignalKind kind = SignalKind::Zero;
  SignalParams params;
  Vector coeffs;  // custom signals only

  // Deceptive signals pick up epsilon and p from the cell unless given.
  Signal build(Index n, double epsilon, double p, std::uint64_t seed) const;
  // Compact "key=value;..." form used in CSV rows.
  std::string params_label() const;
};

struct ScaleSpec {
  std::string name = "sobolev-ellipsoid";
  double beta = 1.0;
  double Q = 1.0;
  double c = 1.0;
  double d = 1.0;
  Index N0 = 5;

  SmoothnessClass build(Index n) const;
  std::string params_label() const;
  // Rate exponent of R^2 in epsilon^2 for the Sobolev scales; empty otherwise.
  std::optional<double> rate_exponent(double p) const;
};

// Pilot runs use a seed derived from the master seed and fix the constants
// used by the acceptance checks of the main run.
struct CalibrationSpec {
  bool enabled = true;
  Index reps = 200;
  double ratio_factor = 1.25;      // oracle-inequality bound = factor * pilot max
  double coverage_target = 0.95;   // C: smallest with pilot coverage >= target
  double size_tail = 0.025;        // c: smallest with pilot exceedance <= tail
  std::optional<double> ratio_bound;
  std::optional<double> C;
  std::optional<double> c;
};

struct Thresholds {
  double coverage = 0.90;
  double size = 0.05;
  double slope = 0.15;
  double decay_factor = 2.0;
  double relative_error = 0.01;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Contraction;
  std::vector<SignalSpec> signals;
  std::vector<ScaleSpec> scales;
  std::vector<double> epsilons;
  std::vector<double> p_values{0.0};
  Index n_trunc = 1024;
  double K = 2.0;
  double alpha = 0.04;
  std::vector<double> grid;    // M (contraction), delta (small-ball), C (coverage-size)
  std::vector<double> c_grid;  // size thresholds (coverage-size)
  std::vector<double> psi_grid{0.05, 0.1, 0.2, 0.3, 0.5};  // duality check deltas
  CenterRule center = CenterRule::DefaultCenter;
  std::vector<PsiScaling> scalings{PsiScaling::SigmaSum, PsiScaling::OracleRate};
  double kappa = 0.5;
  double ebr_tau = 5.0;
  Index reps = 500;
  Index inner_mc = 2000;
  std::uint64_t seed = 20240601;
  unsigned threads = 0;
  std::string output = "results";
  CalibrationSpec calibration;
  Thresholds thresholds;
};

// Throws std::invalid_argument with a description of the first problem.
void validate_spec(const ExperimentSpec& spec);

struct Cell {
  std::string metric;
  std::string signal_kind;
  std::string signal_params;
  double p = 0.0;
  double epsilon = 0.0;
  double grid_value = 0.0;
  double statistic = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<Cell> cells;
  nlohmann::json summary = nlohmann::json::object();
  bool passed = false;
  nlohmann::json runtime = nlohmann::json::object();
};

ExperimentReport run_experiment(const ExperimentSpec& spec);

enum class ReportFormat { Csv, Json };

void write_report(const ExperimentReport& report, ReportFormat format,
                  const std::filesystem::path& path);
std::string report_csv(const ExperimentReport& report);
ExperimentReport read_report_json(const std::filesystem::path& path);

// One file per figure series under `dir`.
void emit_plot_data(const ExperimentReport& report,
                    const std::filesystem::path& dir);

// Writes report.json, cells.csv and plots/ under <root>/<kind>/<timestamp>/
// and returns that directory.
std::filesystem::path write_outputs(const ExperimentReport& report,
                                    const std::filesystem::path& root);

// Least-squares slope of y on x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ddm
