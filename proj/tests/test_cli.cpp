#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "cli.hpp"
#include "ddm/json_io.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ddm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ddm::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("ddm_cli_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, ddm::cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, ddm::cli::kUsage);
  EXPECT_EQ(run({"simulate"}).code, ddm::cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, ddm::cli::kOk);
  const auto bad = run({"simulate", "--eps", "-1"});
  EXPECT_EQ(bad.code, ddm::cli::kUsage);
  EXPECT_NE(bad.err.find("error"), std::string::npos);
}

TEST(Cli, ClassifyZeroSignal) {
  const auto dir = temp_dir("classify");
  ddm::write_json_file({{"kind", "zero"}}, dir / "sig.json");
  const auto r = run({"classify", "--signal", (dir / "sig.json").string(), "--eps", "0.1",
                      "--n", "100", "--L0", "2"});
  ASSERT_EQ(r.code, ddm::cli::kOk) << r.err;
  const auto j = ddm::json::parse(r.out);
  EXPECT_EQ(j["oracle"]["i_star"], 1);
  EXPECT_TRUE(j["ebr"]["member"].get<bool>());
  EXPECT_TRUE(j["pt"]["member"].get<bool>());
  EXPECT_DOUBLE_EQ(j["pt"]["implied_ebr_tau"].get<double>(), 6.0);
  std::filesystem::remove_all(dir);
}

TEST(Cli, VerifyConstants) {
  const auto r = run({"verify-constants", "--p", "1", "--nmax", "500", "--kmax", "50"});
  ASSERT_EQ(r.code, ddm::cli::kOk) << r.err;
  const auto j = ddm::json::parse(r.out);
  EXPECT_EQ(j["lemma2"]["violations"], 0);
  EXPECT_TRUE(j["params"]["lower_regime"].get<bool>());
}

TEST(Cli, SimulatePosteriorBall) {
  const auto dir = temp_dir("pipeline");
  const auto data = (dir / "data.json").string();
  ASSERT_EQ(run({"simulate", "--kind", "sobolev-boundary", "--eps", "0.05", "--p", "0.5",
                 "--n", "64", "--seed", "3", "--out", data})
                .code,
            ddm::cli::kOk);
  const auto again = run({"simulate", "--kind", "sobolev-boundary", "--eps", "0.05", "--p",
                          "0.5", "--n", "64", "--seed", "3"});
  EXPECT_EQ(ddm::json::parse(again.out), ddm::read_json_file(data));

  const auto post = run({"posterior", "--data", data});
  ASSERT_EQ(post.code, ddm::cli::kOk) << post.err;
  const auto pj = ddm::json::parse(post.out);
  EXPECT_EQ(pj["posterior_mean"].size(), 64u);

  const auto ball = run({"ball", "--data", data, "--M", "2", "--mc", "1000"});
  ASSERT_EQ(ball.code, ddm::cli::kOk) << ball.err;
  const auto bj = ddm::json::parse(ball.out);
  EXPECT_GT(bj["radius"]["value"].get<double>(), 0.0);
  EXPECT_EQ(run({"ball", "--data", data, "--mc", "10"}).code, ddm::cli::kUsage);
  std::filesystem::remove_all(dir);
}

TEST(Cli, ExperimentCheck) {
  const auto dir = temp_dir("experiment");
  ddm::json cfg = {{"kind", "overshrinkage"},
                   {"signals", {{{"kind", "parametric"}, {"params", {{"N0", 5}, {"Q", 50.0}}}}}},
                   {"epsilons", {1e-3}},
                   {"n_trunc", 64},
                   {"reps", 5}};
  ddm::write_json_file(cfg, dir / "ok.json");
  const auto ok = run({"experiment", "--config", (dir / "ok.json").string(), "--out",
                       (dir / "out").string(), "--check", "--threads", "1"});
  ASSERT_EQ(ok.code, ddm::cli::kOk) << ok.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "overshrinkage"));

  cfg["thresholds"] = {{"relative_error", 1e-9}};
  ddm::write_json_file(cfg, dir / "strict.json");
  const auto fail = run({"experiment", "--config", (dir / "strict.json").string(), "--out",
                         (dir / "out").string(), "--check"});
  EXPECT_EQ(fail.code, ddm::cli::kCheckFailed);
  const auto lax = run({"experiment", "--config", (dir / "strict.json").string(), "--out",
                        (dir / "out").string()});
  EXPECT_EQ(lax.code, ddm::cli::kOk);
  std::filesystem::remove_all(dir);
}
