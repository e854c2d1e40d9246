#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ddm/experiments.hpp"
#include "ddm/json_io.hpp"

using namespace ddm;

namespace {

SignalSpec signal(SignalKind kind) {
  SignalSpec s;
  s.kind = kind;
  return s;
}

ExperimentSpec small_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  s.signals = {signal(SignalKind::SobolevBoundary)};
  s.epsilons = {0.1, 0.05};
  s.n_trunc = 128;
  s.reps = 10;
  s.inner_mc = 1000;
  s.threads = 2;
  s.calibration.reps = 5;
  return s;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("ddm_test_" + name);
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST(Experiments, FitSlope) {
  EXPECT_NEAR(fit_slope({0, 1, 2}, {1, 3, 5}), 2.0, 1e-15);
  EXPECT_THROW(fit_slope({1}, {1}), std::invalid_argument);
  EXPECT_THROW(fit_slope({1, 1}, {1, 2}), std::invalid_argument);
}

TEST(Experiments, ValidateSpec) {
  auto s = small_spec(ExperimentKind::Contraction);
  EXPECT_THROW(validate_spec(s), std::invalid_argument);  // empty M grid
  s.grid = {2, 4};
  EXPECT_NO_THROW(validate_spec(s));
  s.K = 1.0;
  EXPECT_THROW(validate_spec(s), std::invalid_argument);
  s = small_spec(ExperimentKind::SmallBall);
  s.grid = {0.05};
  s.alpha = 0.1;
  EXPECT_THROW(validate_spec(s), std::invalid_argument);
  s = small_spec(ExperimentKind::OracleInequality);
  s.epsilons = {};
  EXPECT_THROW(validate_spec(s), std::invalid_argument);
  EXPECT_THROW(experiment_kind_from_string("bootstrap"), std::invalid_argument);
}

TEST(Experiments, Contraction) {
  auto s = small_spec(ExperimentKind::Contraction);
  s.grid = {2, 4, 8};
  const auto rep = run_experiment(s);
  EXPECT_EQ(rep.cells.size(), 6u);
  EXPECT_EQ(count_lines(report_csv(rep)), 7u);
  EXPECT_EQ(rep.summary["cells"].size(), 2u);
  EXPECT_EQ(rep.summary["failed_cells"], 0);
}

TEST(Experiments, OracleInequalityCalibrates) {
  auto s = small_spec(ExperimentKind::OracleInequality);
  const auto rep = run_experiment(s);
  const auto& cal = rep.summary["calibration"];
  EXPECT_EQ(cal["source"], "pilot");
  EXPECT_NE(cal["pilot_seed"].get<std::uint64_t>(), s.seed);
  EXPECT_NEAR(cal["ratio_bound"].get<double>(), 1.25 * cal["pilot_max_ratio"].get<double>(), 1e-12);
  EXPECT_EQ(rep.cells.size(), 4u);
  s.calibration.ratio_bound = 1e-9;
  EXPECT_FALSE(run_experiment(s).passed);
}

TEST(Experiments, SmallBall) {
  auto s = small_spec(ExperimentKind::SmallBall);
  s.grid = {0.02, 0.05, 0.1};
  s.epsilons = {0.05};
  const auto rep = run_experiment(s);
  EXPECT_EQ(rep.cells.size(), 6u);
  EXPECT_EQ(rep.summary["groups"].size(), 2u);
}

TEST(Experiments, CoverageSizeRecordsFailedCells) {
  auto s = small_spec(ExperimentKind::CoverageSize);
  s.signals = {signal(SignalKind::Zero), signal(SignalKind::Deceptive)};
  s.epsilons = {0.01};
  s.n_trunc = 1024;
  s.reps = 5;
  const auto rep = run_experiment(s);
  // The deceptive spike index exceeds n_trunc at this noise level.
  std::size_t failed = 0;
  for (const auto& c : rep.cells) failed += c.failed ? 1 : 0;
  EXPECT_EQ(failed, 1u);
  EXPECT_FALSE(rep.passed);
  EXPECT_NE(report_csv(rep).find("nan"), std::string::npos);
}

TEST(Experiments, Overshrinkage) {
  auto s = small_spec(ExperimentKind::Overshrinkage);
  SignalSpec big = signal(SignalKind::Parametric);
  big.params.N0 = 10;
  big.params.Q = 100.0;
  s.signals = {big};
  s.epsilons = {1e-3};
  const auto rep = run_experiment(s);
  EXPECT_TRUE(rep.passed);
  EXPECT_NEAR(rep.summary["cells"][0]["mean_shrunk_gap_vs_theta0"].get<double>(), 1.0 / 3.0, 0.01);
}

TEST(Experiments, ScaleAdaptation) {
  auto s = small_spec(ExperimentKind::ScaleAdaptation);
  s.signals.clear();
  s.epsilons = {0.01, 0.001};
  s.n_trunc = 2000;
  s.reps = 50;
  const auto rep = run_experiment(s);
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.summary["groups"].size(), 4u);
  EXPECT_NEAR(rep.summary["groups"][0]["rate_slope"].get<double>(), 2.0 / 3.0, 0.05);
}

TEST(Experiments, DeterministicCsvAndJsonRoundTrip) {
  auto s = small_spec(ExperimentKind::Contraction);
  s.grid = {1, 2};
  s.center = CenterRule::PosteriorMean;
  const auto a = run_experiment(s);
  s.threads = 1;
  const auto b = run_experiment(s);
  EXPECT_EQ(report_csv(a), report_csv(b));

  const auto dir = temp_dir("roundtrip");
  const auto out = write_outputs(a, dir);
  EXPECT_TRUE(std::filesystem::exists(out / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(out / "cells.csv"));
  EXPECT_FALSE(std::filesystem::is_empty(out / "plots"));
  const auto back = read_report_json(out / "report.json");
  EXPECT_EQ(report_csv(back), report_csv(a));
  std::ifstream csv(out / "cells.csv");
  std::stringstream ss;
  ss << csv.rdbuf();
  EXPECT_EQ(ss.str(), report_csv(a));
  const auto second = write_outputs(a, dir);
  EXPECT_NE(out, second);
  std::filesystem::remove_all(dir);
}

TEST(Experiments, SpecFromJson) {
  const auto j = json::parse(R"({"kind": "contraction", "signals": [{"kind": "zero"}],
                                 "epsilons": [0.1], "grid": [2], "reps": 3})");
  const auto s = spec_from_json(j);
  EXPECT_EQ(s.reps, 3);
  EXPECT_EQ(s.signals.size(), 1u);
  auto bad = j;
  bad["repz"] = 1;
  EXPECT_THROW(spec_from_json(bad), std::invalid_argument);
  EXPECT_EQ(spec_from_json(json(s)).reps, 3);
}

TEST(Experiments, ShippedConfigsParse) {
  std::size_t n = 0;
  for (const auto& e : std::filesystem::directory_iterator(DDM_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(spec_from_json(read_json_file(e.path()))) << e.path();
    ++n;
  }
  EXPECT_EQ(n, 6u);
}
