#include "cli.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace krasno::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "krasno");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json last_trace_row(const Result& r) { return json::parse(r.out)["trace"].back(); }

TEST(FixedPointCommand, GuaranteedCosine) {
  const auto r = run_cli({"fixed-point", "--fn", "cos(x)", "--domain", "0", "1", "--x0", "0",
                          "--guaranteed"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["mode"], "fixed_point");
  EXPECT_EQ(doc["config"]["solver"], "iterate_hillam");
  EXPECT_EQ(doc["outcome"]["kind"], "converged");
  EXPECT_NEAR(doc["outcome"]["point"].get<double>(), 0.7390851332, 1e-10);
  EXPECT_NEAR(last_trace_row(r)["x"].get<double>(), 0.7390851332, 1e-10);
  // t chosen as 0.8 / (1 + L_est)
  const double L = doc["config"]["slope_bound"]["value"];
  EXPECT_DOUBLE_EQ(doc["config"]["t"].get<double>(), 0.8 / (1 + L));
  EXPECT_EQ(doc["config"]["slope_bound"]["provenance"], "estimated");
}

TEST(FixedPointCommand, UnboundedShiftDiverges) {
  const auto r = run_cli({"fixed-point", "--fn", "x + 1", "--unbounded", "--x0", "0"});
  EXPECT_EQ(r.code, 2) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["outcome"]["kind"], "diverged");
  EXPECT_EQ(doc["outcome"]["direction"], "+inf");
  EXPECT_EQ(doc["domain"][0], "-inf");
}

TEST(FixedPointCommand, ShiftExitsInterval) {
  const auto r = run_cli({"fixed-point", "--fn", "x + 1", "--domain", "0", "1", "--x0", "0.5"});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_EQ(json::parse(r.out)["outcome"]["side"], "above_hi");
}

TEST(FixedPointCommand, BudgetExhausted) {
  const auto r = run_cli({"fixed-point", "--fn", "cos(x)", "--domain", "0", "1", "--x0", "0",
                          "--t", "0.001", "--max-iter", "3"});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(json::parse(r.out)["trace"].size(), 4u);
}

TEST(FixedPointCommand, ExplicitTAndL) {
  const auto r = run_cli({"fixed-point", "--fn", "cos(x)", "--domain", "0", "1", "--x0", "1",
                          "--t", "0.5", "--L", "0.85"});
  ASSERT_EQ(r.code, 0);
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["config"]["t"], 0.5);
  EXPECT_EQ(doc["config"]["slope_bound"]["provenance"], "user");
}

TEST(FixedPointCommand, GuaranteedRejectsTooLargeT) {
  const auto r = run_cli({"fixed-point", "--fn", "cos(x)", "--domain", "0", "1", "--x0", "0",
                          "--t", "0.9", "--L", "0.85", "--guaranteed"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("exceeds"), std::string::npos) << r.err;
}

TEST(FixedPointCommand, CsvAndJsonCarryTheSameNumbers) {
  const std::vector<std::string> base = {"fixed-point", "--fn", "cos(x)", "--domain", "0", "1",
                                         "--x0", "0", "--t", "0.3"};
  auto csv_args = base;
  csv_args.insert(csv_args.end(), {"--format", "csv"});
  const auto j = run_cli(base);
  const auto c = run_cli(csv_args);
  ASSERT_EQ(j.code, 0);
  ASSERT_EQ(c.code, 0);
  const json trace = json::parse(j.out)["trace"];

  std::istringstream in(c.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,x,hx,residual");
  std::size_t row = 0;
  std::string last;
  while (std::getline(in, line)) {
    last = line;
    if (line.rfind("#", 0) == 0) continue;
    std::istringstream fields(line);
    std::string n, x, hx, res;
    std::getline(fields, n, ',');
    std::getline(fields, x, ',');
    std::getline(fields, hx, ',');
    std::getline(fields, res, ',');
    ASSERT_LT(row, trace.size());
    EXPECT_EQ(std::stoul(n), trace[row]["n"].get<std::size_t>());
    EXPECT_EQ(std::stod(x), trace[row]["x"].get<double>());
    EXPECT_EQ(std::stod(hx), trace[row]["hx"].get<double>());
    EXPECT_EQ(std::stod(res), trace[row]["residual"].get<double>());
    ++row;
  }
  EXPECT_EQ(row, trace.size());
  EXPECT_EQ(last.rfind("# outcome kind=converged", 0), 0u) << last;
}

TEST(FixedPointCommand, UsageErrors) {
  EXPECT_EQ(run_cli({"fixed-point", "--fn", "cos(x)", "--x0", "0"}).code, 1);  // no domain
  EXPECT_EQ(run_cli({"fixed-point", "--fn", "cos(x)", "--domain", "0", "1"}).code, 1);  // no x0
  EXPECT_EQ(run_cli({"fixed-point", "--fn", "cos(x", "--domain", "0", "1", "--x0", "0"}).code, 1);
  EXPECT_EQ(run_cli({"fixed-point", "--fn", "cos(x)", "--domain", "1", "0", "--x0", "0"}).code, 1);
  EXPECT_EQ(run_cli({"fixed-point", "--fn", "x", "--domain", "0", "1", "--unbounded", "--x0", "0"}).code, 1);
  EXPECT_EQ(run_cli({"fixed-point", "--fn", "x", "--domain", "0", "1", "--x0", "0", "--format", "xml"}).code, 1);
  EXPECT_EQ(run_cli({}).code, 1);
}

TEST(FixedPointCommand, EvaluationErrorExitsOne) {
  const auto r = run_cli({"fixed-point", "--fn", "log(x)", "--domain", "-1", "2", "--x0",
                          "0.5", "--t", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("log"), std::string::npos) << r.err;
}

TEST(RootNewtonCommand, SquareRootBelow) {
  const auto r = run_cli({"root-newton", "--fn", "x^2 - 2", "--domain", "1.4142135624", "3",
                          "--x0", "3", "--check-hypotheses", "root_below"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["mode"], "root");
  EXPECT_TRUE(doc["hypotheses"]["overall"].get<bool>());
  EXPECT_EQ(doc["derivative"], "2*x");
  EXPECT_NEAR(doc["outcome"]["point"].get<double>(), 1.4142135624, 1e-10);
}

TEST(RootNewtonCommand, ExpRootAbove) {
  const auto r = run_cli({"root-newton", "--fn", "exp(-x) - 1", "--domain", "-1", "0", "--x0", "-1",
                          "--check-hypotheses", "root_above"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["outcome"]["point"].get<double>(), 0.0, 1e-10);
}

TEST(RootNewtonCommand, HypothesisFailureRefusesToRun) {
  const std::vector<std::string> args = {"root-newton", "--fn", "x^2 - 2", "--domain", "0",
                                         "1.4142135624", "--x0", "0.5", "--check-hypotheses",
                                         "root_above"};
  const auto r = run_cli(args);
  EXPECT_EQ(r.code, 5);
  const json doc = json::parse(r.out);
  EXPECT_FALSE(doc["hypotheses"]["overall"].get<bool>());
  EXPECT_FALSE(doc["hypotheses"]["checks"][0]["passed"].get<bool>());
  EXPECT_TRUE(doc["trace"].empty());
  EXPECT_FALSE(doc.contains("outcome"));

  auto forced = args;
  forced.push_back("--force");
  const auto f = run_cli(forced);
  EXPECT_NE(f.code, 5);
  EXPECT_FALSE(json::parse(f.out)["trace"].empty());
}

TEST(RootNewtonCommand, DerivativeZeroExitsSix) {
  const auto r = run_cli({"root-newton", "--fn", "x^2 + 1", "--domain", "-2", "2", "--x0", "0"});
  EXPECT_EQ(r.code, 6);
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["outcome"]["kind"], "derivative_zero");
  EXPECT_EQ(doc["trace"].size(), 1u);
}

TEST(RootNewtonCommand, AbsIsRejected) {
  const auto r = run_cli({"root-newton", "--fn", "abs(x) - 1", "--domain", "0", "2", "--x0", "2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("abs"), std::string::npos);
}

TEST(RootNewtonCommand, CsvIncludesHypothesisComments) {
  const auto r = run_cli({"root-newton", "--fn", "exp(-x) - 1", "--domain", "-1", "0", "--x0", "-1",
                          "--check-hypotheses", "root_above", "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("n,x,hx,residual\n0,-1,", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("# hypothesis h*h'' >= 0: pass"), std::string::npos);
}

TEST(EstimateCommand, Cosine) {
  const auto r = run_cli({"estimate", "--fn", "cos(x)", "--domain", "0", "1", "--grid", "1024"});
  ASSERT_EQ(r.code, 0);
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["value"].get<double>(), 0.8415, 1e-3);
  EXPECT_NEAR(doc["recommended_t"].get<double>(), 0.434, 1e-3);
  EXPECT_EQ(doc["kind"], "two_sided_lipschitz");
}

TEST(EstimateCommand, ConstantAndOneSided) {
  const json c = json::parse(run_cli({"estimate", "--fn", "0.5", "--domain", "0", "1"}).out);
  EXPECT_EQ(c["value"], 0.0);
  EXPECT_EQ(c["recommended_t"], 0.8);
  const json o =
      json::parse(run_cli({"estimate", "--fn", "x", "--domain", "0", "1", "--one-sided"}).out);
  EXPECT_EQ(o["value"], 0.0);
  EXPECT_EQ(o["kind"], "lower_only");
  EXPECT_EQ(o["recommended_t"], 0.8);
}

TEST(FixedPointsCommand, Listings) {
  const json cosine = json::parse(run_cli({"fixed-points", "--fn", "cos(x)", "--domain", "0", "1"}).out);
  ASSERT_EQ(cosine.size(), 1u);
  EXPECT_NEAR(cosine[0].get<double>(), 0.7390851332, 1e-10);
  EXPECT_TRUE(json::parse(run_cli({"fixed-points", "--fn", "x + 1", "--domain", "0", "1"}).out).empty());
  const json cube = json::parse(run_cli({"fixed-points", "--fn", "x^3", "--domain", "-2", "2"}).out);
  ASSERT_EQ(cube.size(), 3u);
  EXPECT_NEAR(cube[0].get<double>(), -1.0, 1e-12);
  EXPECT_NEAR(cube[1].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(cube[2].get<double>(), 1.0, 1e-12);
}

TEST(OutputDeterminism, RepeatedRunsAreByteIdentical) {
  const std::vector<std::string> args = {"fixed-point", "--fn", "0.5 + 0.4*sin(3*x)", "--domain",
                                         "0", "1", "--x0", "0.1"};
  EXPECT_EQ(run_cli(args).out, run_cli(args).out);
}

}  // namespace
}  // namespace krasno::cli
