#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

namespace {

using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  std::string base = ::testing::TempDir() + "/ulep_cli_" + std::to_string(counter++);
  std::string cmd =
      std::string(ULEP_CLI_PATH) + " " + args + " > " + base + ".out 2> " + base + ".err";
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(base + ".out");
  r.err = slurp(base + ".err");
  std::remove((base + ".out").c_str());
  std::remove((base + ".err").c_str());
  return r;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + "/" + name; }

TEST(Cli, HelpExitsZero) {
  RunResult r = run_cli("--help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("grid"), std::string::npos);
  EXPECT_NE(r.out.find("verify"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli("no-such-subcommand").exit_code, 2);
  EXPECT_EQ(run_cli("grid --no-such-flag").exit_code, 2);
  RunResult missing = run_cli("grid");  // no bandwidth endpoints anywhere
  EXPECT_EQ(missing.exit_code, 2);
  EXPECT_FALSE(missing.err.empty());
}

TEST(Cli, RuntimeErrorsExitOne) {
  RunResult r = run_cli("grid --config /nonexistent/path.conf");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("ulep: error:"), std::string::npos);
}

TEST(Cli, GridGoldenLadder) {
  std::string base = temp_path("grid_golden");
  RunResult r = run_cli("grid --hlo 0.01 --hhi 0.05 --rho 2 --out " + base);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json env = json::parse(r.out);
  EXPECT_EQ(env.at("tool"), "ulep");
  EXPECT_EQ(env.at("subcommand"), "grid");
  auto levels = env.at("payload").at("levels");
  ASSERT_EQ(levels.size(), 4u);
  EXPECT_DOUBLE_EQ(levels[0].get<double>(), 0.01);
  EXPECT_DOUBLE_EQ(levels[1].get<double>(), 0.02);
  EXPECT_DOUBLE_EQ(levels[2].get<double>(), 0.04);
  EXPECT_DOUBLE_EQ(levels[3].get<double>(), 0.05);
  std::string csv = slurp(base + "_levels.csv");
  EXPECT_NE(csv.find("0.01"), std::string::npos);
  EXPECT_NE(csv.find("0.05"), std::string::npos);
  EXPECT_FALSE(slurp(base + ".json").empty());
}

TEST(Cli, ChernoffFrozenValues) {
  RunResult r = run_cli("verify chernoff --n 1,10");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json env = json::parse(r.out);
  EXPECT_EQ(env.at("subcommand"), "verify chernoff");
  auto rows = env.at("payload").at("rows");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].at("exact").get<double>(), 0.0803013970713942, 1e-14);
  EXPECT_NEAR(rows[0].at("bound").get<double>(), 0.6795704571147614, 1e-14);
  EXPECT_NEAR(rows[1].at("exact").get<double>(), 0.0015882606618580462, 1e-16);
  EXPECT_TRUE(env.at("payload").at("all_hold").get<bool>());
}

TEST(Cli, SeedOverrideAndEnvelopeShape) {
  std::string conf = temp_path("seed_check.conf");
  spit(conf, "study.seed = 5\ngrid.h_lo = 0.1\ngrid.h_hi = 0.4\ngrid.rho = 2\n");
  RunResult r = run_cli("grid --config " + conf + " --seed 99");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json env = json::parse(r.out);
  EXPECT_EQ(env.at("seed").get<long long>(), 99);
  EXPECT_EQ(env.at("config").at("study.seed"), "99");
  EXPECT_TRUE(env.contains("version"));
  EXPECT_TRUE(env.contains("timestamp"));
  EXPECT_TRUE(env.contains("wall_time_s"));
}

TEST(Cli, KdeGoldenSinglePoint) {
  std::string data = temp_path("one_point.csv");
  spit(data, "x1\n0.5\n");
  std::string conf = temp_path("kde_one.conf");
  spit(conf,
       "kde.h = 0.5\n"
       "eval.z = 0.5\n"
       "kernel.kind = uniform\n");
  RunResult r = run_cli("kde --config " + conf + " --data " + data);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  json env = json::parse(r.out);
  EXPECT_DOUBLE_EQ(env.at("payload").at("value").get<double>(), 2.0);
  EXPECT_EQ(env.at("payload").at("n").get<int>(), 1);
}

TEST(Cli, VerifyRunsAreByteIdenticalAcrossRepeats) {
  std::string conf = temp_path("det.conf");
  spit(conf,
       "density.kind = uniform\n"
       "density.lo = 0\n"
       "density.hi = 2\n"
       "family.anchors = 0;0.5\n"
       "region.lo = 0.5\n"
       "region.hi = 1.5\n"
       "study.n = 200,400\n"
       "study.replications = 3\n"
       "study.seed = 11\n");
  RunResult a = run_cli("verify thm1-i --config " + conf);
  RunResult b = run_cli("verify thm1-i --config " + conf);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  json pa = json::parse(a.out).at("payload");
  json pb = json::parse(b.out).at("payload");
  EXPECT_EQ(pa.dump(), pb.dump());
}

TEST(Cli, OutWritesEnvelopeAndTables) {
  std::string conf = temp_path("sel.conf");
  spit(conf,
       "density.kind = normal\n"
       "density.mu = 0\n"
       "density.sigma = 1\n"
       "data.simulate_n = 200\n"
       "study.seed = 3\n");
  std::string base = temp_path("sel_out");
  RunResult r = run_cli("selectors --config " + conf + " --out " + base);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::string envelope = slurp(base + ".json");
  ASSERT_FALSE(envelope.empty());
  json env = json::parse(envelope);
  EXPECT_EQ(env.at("subcommand"), "selectors");
  std::string csv = slurp(base + "_selectors.csv");
  EXPECT_NE(csv.find("silverman"), std::string::npos);
  EXPECT_NE(csv.find("sheather-jones"), std::string::npos);
}

}  // namespace
