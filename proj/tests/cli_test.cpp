// Copyright 2026 The ABF Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "abf/harness.hpp"
#include "abf/serialize.hpp"
#include "abf/tuner.hpp"
#include "cli.hpp"

namespace abf::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "abf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string element_lines(int count, const std::string& prefix = "item-") {
  std::string s;
  for (int i = 0; i < count; ++i) s += prefix + std::to_string(i) + "\n";
  return s;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("abf_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string build_filter(std::uint64_t m, std::uint32_t k, const std::string& extra_name = "f.abf") {
    const auto file = path(extra_name);
    const auto r = invoke({"build", "--m", std::to_string(m), "--k", std::to_string(k), "--seed", "7", "--out", file});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return file;
  }

  fs::path dir_;
};

TEST_F(CliTest, BuildWritesEmptyFilter) {
  const auto file = build_filter(10000, 100);
  const auto bytes = read_file(file);
  EXPECT_EQ(bytes.substr(0, 4), "ABF1");
  const auto f = load_filter(file);
  EXPECT_EQ(f.params(), (FilterParams{10000, 100, 7}));
  EXPECT_EQ(f.n_stored(), 0U);
}

TEST_F(CliTest, BuildRejectsKAboveM) {
  const auto r = invoke({"build", "--m", "10", "--k", "100", "--seed", "7", "--out", path("bad.abf")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(fs::exists(path("bad.abf")));
}

TEST_F(CliTest, InsertThenRemoveRestoresEmptyCounters) {
  const auto file = build_filter(10000, 100);
  const auto lines = element_lines(500);
  const auto ins = invoke({"insert", "--filter", file}, lines);
  ASSERT_EQ(ins.code, kExitOk) << ins.err;
  auto f = load_filter(file);
  EXPECT_EQ(f.n_stored(), 500U);
  EXPECT_EQ(std::accumulate(f.counters().begin(), f.counters().end(), std::uint64_t{0}), 50000U);
  EXPECT_EQ(std::count(ins.out.begin(), ins.out.end(), '\n'), 500);

  // Same as inserting through the library.
  CountingFilter direct(FilterParams{10000, 100, 7});
  for (int i = 0; i < 500; ++i) direct.insert(digest("item-" + std::to_string(i), direct.params()));
  EXPECT_EQ(f, direct);

  ASSERT_EQ(invoke({"remove", "--filter", file}, lines).code, kExitOk);
  f = load_filter(file);
  EXPECT_EQ(f, CountingFilter(FilterParams{10000, 100, 7}));
}

TEST_F(CliTest, RemoveFromEmptyFails) {
  const auto file = build_filter(100, 3);
  const auto before = read_file(file);
  const auto r = invoke({"remove", "--filter", file}, "ghost\n");
  EXPECT_EQ(r.code, kExitDomainError);
  EXPECT_NE(r.err.find("underflow"), std::string::npos);
  EXPECT_EQ(read_file(file), before);
}

TEST_F(CliTest, FailedBatchLeavesFileUntouched) {
  const auto file = path("sat.abf");
  ASSERT_EQ(invoke({"build", "--m", "5", "--k", "5", "--counter-max", "2", "--out", file}).code, kExitOk);
  ASSERT_EQ(invoke({"insert", "--filter", file}, "a\n").code, kExitOk);
  const auto before = read_file(file);
  // k = m: every element hits every counter, so the second line overflows.
  const auto r = invoke({"insert", "--filter", file}, "b\nc\n");
  EXPECT_EQ(r.code, kExitDomainError);
  EXPECT_NE(r.err.find("overflow"), std::string::npos);
  EXPECT_EQ(read_file(file), before);
  EXPECT_FALSE(fs::exists(file + ".tmp"));
}

TEST_F(CliTest, EmptyLineIsAUsageError) {
  const auto file = build_filter(100, 3);
  EXPECT_EQ(invoke({"insert", "--filter", file}, "a\n\nb\n").code, kExitUsage);
}

TEST_F(CliTest, QueryStandardAndVacuous) {
  const auto file = build_filter(1000, 10);
  ASSERT_EQ(invoke({"insert", "--filter", file}, element_lines(50)).code, kExitOk);
  const auto stored = invoke({"query", "--filter", file, "--theta", "0", "--T", "10"}, element_lines(50));
  std::string all_ones;
  for (int i = 0; i < 50; ++i) all_ones += "1\n";
  EXPECT_EQ(stored.out, all_ones);
  const auto vacuous = invoke({"query", "--filter", file, "--T", "0"}, element_lines(30, "absent-"));
  EXPECT_EQ(vacuous.out, all_ones.substr(0, 60));
  EXPECT_EQ(invoke({"query", "--filter", file, "--T", "11"}, "x\n").code, kExitUsage);
}

TEST_F(CliTest, QueryTunedOperatingPoint) {
  const auto file = build_filter(10000, 100);
  const auto lines = element_lines(500);
  ASSERT_EQ(invoke({"insert", "--filter", file}, lines).code, kExitOk);
  const auto tuned = tune::optimize_T(10000, 500, 100, 4, {0.97});
  const auto r = invoke({"query", "--filter", file, "--theta", "4", "--T", std::to_string(tuned.T)}, lines);
  ASSERT_EQ(r.code, kExitOk);
  const auto accepted = std::count(r.out.begin(), r.out.end(), '1');
  EXPECT_NEAR(accepted / 500.0, 0.98, 0.03);

  // Same answers as the library view.
  const auto f = load_filter(file);
  const auto view = binarize(f, 4, tuned.T);
  std::string expected;
  for (int i = 0; i < 500; ++i) expected += view.query(digest("item-" + std::to_string(i), f.params())) ? "1\n" : "0\n";
  EXPECT_EQ(r.out, expected);
}

TEST_F(CliTest, TuneFixedTheta) {
  const auto r = invoke({"tune", "--m", "10000", "--n", "500", "--k", "100", "--l-tpr", "0.97", "--theta", "4"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto kv = key_values(r.out);
  EXPECT_NEAR(std::stod(kv.at("TPR")), 0.98, 0.01);
  EXPECT_NEAR(std::stod(kv.at("FPR")), 0.04, 0.01);
  EXPECT_NEAR(std::stod(kv.at("ACC")), 0.97, 0.01);
  const auto direct = tune::optimize_T(10000, 500, 100, 4, {0.97});
  EXPECT_EQ(std::stoul(kv.at("T")), direct.T);
  EXPECT_NEAR(std::stod(kv.at("ACC")), direct.predicted.acc, 1e-9);

  const auto sbf = key_values(
      invoke({"tune", "--m", "10000", "--n", "500", "--k", "100", "--l-tpr", "0.97", "--theta", "0"}).out);
  EXPECT_EQ(sbf.at("T"), "100");
}

TEST_F(CliTest, TuneGlobal) {
  const auto r = invoke({"tune", "--m", "10000", "--n", "500", "--k", "100", "--l-tpr", "0.97"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto kv = key_values(r.out);
  const auto direct = tune::optimize_theta_T(10000, 500, 100, {0.97});
  EXPECT_EQ(std::stoul(kv.at("theta")), direct.theta);
  EXPECT_NEAR(std::stod(kv.at("ACC")), 0.97, 0.01);
  EXPECT_EQ(kv.at("feasible"), "1");
}

TEST_F(CliTest, TuneFromFilterFile) {
  const auto file = build_filter(10000, 100);
  ASSERT_EQ(invoke({"insert", "--filter", file}, element_lines(500)).code, kExitOk);
  const auto from_file = invoke({"tune", "--filter", file, "--l-tpr", "0.9"});
  const auto from_flags = invoke({"tune", "--m", "10000", "--n", "500", "--k", "100", "--l-tpr", "0.9"});
  ASSERT_EQ(from_file.code, kExitOk) << from_file.err;
  EXPECT_EQ(from_file.out, from_flags.out);
  EXPECT_EQ(invoke({"tune", "--filter", build_filter(100, 3, "empty.abf"), "--l-tpr", "0.9"}).code, kExitUsage);
  EXPECT_EQ(invoke({"tune", "--m", "100", "--l-tpr", "0.9"}).code, kExitUsage);
}

TEST_F(CliTest, AnalyzeMatchesModel) {
  const auto r = invoke({"analyze", "--m", "10000", "--n", "500", "--k", "100", "--theta", "4", "--T", "65"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto kv = key_values(r.out);
  const auto direct = model::rates({10000, 500, 100, 4, 65});
  EXPECT_NEAR(std::stod(kv.at("P0")), direct.P0, 1e-9);
  EXPECT_NEAR(std::stod(kv.at("P1")), direct.P1, 1e-9);
  EXPECT_NEAR(std::stod(kv.at("dbar_x")), direct.dbar_x, 1e-7);
  EXPECT_NEAR(std::stod(kv.at("dbar_y")), direct.dbar_y, 1e-7);
  EXPECT_NEAR(std::stod(kv.at("p_x")), direct.p_x, 1e-9);
  EXPECT_NEAR(std::stod(kv.at("p_y")), direct.p_y, 1e-9);
  EXPECT_NEAR(std::stod(kv.at("TPR")), direct.tpr, 1e-9);
  EXPECT_NEAR(std::stod(kv.at("FPR")), direct.fpr, 1e-9);
  EXPECT_NEAR(std::stod(kv.at("ACC")), direct.acc, 1e-9);

  const auto sbf = key_values(invoke({"analyze", "--m", "10000", "--n", "500", "--k", "100", "--T", "100"}).out);
  EXPECT_EQ(sbf.at("TPR"), "1");
  EXPECT_NEAR(std::stod(sbf.at("FPR")), 0.52, 0.01);
  EXPECT_EQ(invoke({"analyze", "--m", "10000", "--n", "0", "--k", "100", "--T", "100"}).code, kExitUsage);
}

TEST_F(CliTest, SweepThetaMatchesLibraryAndIsDeterministic) {
  const std::vector<std::string> flags = {"sweep-theta", "--queries", "500", "--trials", "2", "--seed", "3"};
  auto a = flags;
  a.insert(a.end(), {"--out", path("a.csv"), "--pmf-out", path("a_pmf.csv")});
  auto b = flags;
  b.insert(b.end(), {"--out", path("b.csv")});
  const auto ra = invoke(a);
  ASSERT_EQ(ra.code, kExitOk) << ra.err;
  EXPECT_EQ(ra.out, "best_theta=4\n");
  ASSERT_EQ(invoke(b).code, kExitOk);
  EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv")));

  harness::ThresholdSweepConfig cfg;
  cfg.query_count = 500;
  cfg.trials = 2;
  cfg.base_seed = 3;
  std::ostringstream expected;
  const auto result = harness::run_threshold_sweep(cfg);
  harness::write_csv(expected, result.records());
  EXPECT_EQ(read_file(path("a.csv")), expected.str());
  const auto csv = expected.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  std::ostringstream pmf;
  harness::write_pmf_csv(pmf, result);
  EXPECT_EQ(read_file(path("a_pmf.csv")), pmf.str());
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  {
    std::ofstream cfg(path("run.ini"));
    cfg << "[sweep-theta]\nqueries=300\ntrials=1\nseed=9\ntheta-max=2\n";
  }
  const auto r = invoke({"--config", path("run.ini"), "sweep-theta", "--out", path("c.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  harness::ThresholdSweepConfig cfg;
  cfg.query_count = 300;
  cfg.trials = 1;
  cfg.base_seed = 9;
  cfg.theta_max = 2;
  std::ostringstream expected;
  harness::write_csv(expected, harness::run_threshold_sweep(cfg).records());
  EXPECT_EQ(read_file(path("c.csv")), expected.str());
}

TEST_F(CliTest, CompareGrowthMatchesLibrary) {
  const auto r = invoke({"compare-growth", "--n-start", "100", "--n-stop", "400", "--n-step", "100", "--queries",
                         "300", "--trials", "1", "--out", path("g.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  harness::GrowthConfig cfg;
  cfg.n_start = 100;
  cfg.n_stop = 400;
  cfg.n_step = 100;
  cfg.query_count = 300;
  cfg.trials = 1;
  const auto result = harness::run_growth_comparison(cfg);
  std::ostringstream expected;
  harness::write_csv(expected, result.records);
  EXPECT_EQ(read_file(path("g.csv")), expected.str());
  EXPECT_EQ(r.out, "rebuilds=" + std::to_string(result.rebuild_count) + "\n");
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"build", "--m", "10"}).code, kExitUsage);
  EXPECT_EQ(invoke({"analyze", "--m", "x", "--n", "1", "--k", "1", "--T", "1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(invoke({"query", "--filter", path("missing.abf")}, "a\n").code, kExitDomainError);
}

}  // namespace
}  // namespace abf::cli
