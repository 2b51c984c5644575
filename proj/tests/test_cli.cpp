#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "config.hpp"

namespace fs = std::filesystem;
using namespace wkam;
using namespace wkam::cli;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("weakkam_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string config_path(const std::string& stem) { return std::string(WEAKKAM_CONFIG_DIR) + "/" + stem + ".json"; }

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" + std::string(WEAKKAM_CLI_PATH) + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path only_file(const fs::path& dir, const std::string& prefix, const std::string& ext) {
  fs::path found;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && e.path().extension() == ext) found = e.path();
  }
  return found;
}

json pendulum_doc() { return load_json(config_path("pendulum")); }

std::string parse_message(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ShippedConfigsParse) {
  for (const auto& e : fs::directory_iterator(WEAKKAM_CONFIG_DIR)) EXPECT_NO_THROW(parse_config(load_json(e.path())));
}

TEST(Config, MissingKeyIsNamed) {
  json doc = pendulum_doc();
  doc["grid"].erase("dt");
  EXPECT_NE(parse_message(doc).find("missing key grid.dt"), std::string::npos);
}

TEST(Config, UnknownKeyIsRejected) {
  json doc = pendulum_doc();
  doc["grid"]["spacing"] = 0.1;
  EXPECT_NE(parse_message(doc).find("unknown key grid.spacing"), std::string::npos);
}

TEST(Config, NegativeToleranceIsRejected) {
  json doc = pendulum_doc();
  doc["solver"] = {{"tol_sub", -1.0}};
  EXPECT_NE(parse_message(doc).find("solver.tol_sub"), std::string::npos);
}

TEST(Config, IncreasingEpsListIsRejected) {
  json doc = pendulum_doc();
  doc["eps_list"] = {0.1, 0.2};
  EXPECT_NE(parse_message(doc).find("strictly decreasing"), std::string::npos);
}

TEST(Config, HashIgnoresOutputDirAndKeyOrder) {
  json a = pendulum_doc(), b = pendulum_doc();
  b["output_dir"] = "/somewhere/else";
  EXPECT_EQ(config_hash(resolved_json(parse_config(a))), config_hash(resolved_json(parse_config(b))));
  b["grid"]["n"] = 201;
  EXPECT_NE(config_hash(resolved_json(parse_config(a))), config_hash(resolved_json(parse_config(b))));
  EXPECT_EQ(config_hash(resolved_json(parse_config(a))).size(), 16u);
}

TEST(Config, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Cli, CriticalOnPendulum) {
  const auto dir = scratch("critical");
  ASSERT_EQ(run("critical " + config_path("pendulum") + " --output-dir " + dir.string()), 0);
  const auto path = only_file(dir, "critical_", ".json");
  ASSERT_FALSE(path.empty());
  const json doc = json::parse(slurp(path));
  EXPECT_EQ(doc["command"], "critical");
  EXPECT_EQ(doc["version"], kVersion);
  EXPECT_NEAR(doc["result"]["c"].get<double>(), 0.0, 2e-2);
  EXPECT_FALSE(only_file(dir, "critical_", ".csv").empty());
}

TEST(Cli, VanishOnTwoNodeReachesClosedForm) {
  const auto dir = scratch("vanish");
  ASSERT_EQ(run("vanish " + config_path("two_node") + " --output-dir " + dir.string()), 0);
  std::istringstream csv(slurp(only_file(dir, "vanish_", ".csv")));
  std::string header, line;
  std::getline(csv, header);
  std::vector<std::string> cols;
  for (std::istringstream h(header); std::getline(h, line, ',');) cols.push_back(line);
  const auto at = std::find(cols.begin(), cols.end(), "u0_direct") - cols.begin();
  const double expect[2] = {0.0, 1.0};
  for (int row = 0; row < 2; ++row) {
    ASSERT_TRUE(std::getline(csv, line));
    std::vector<std::string> cells;
    for (std::istringstream r(line); std::getline(r, header, ',');) cells.push_back(header);
    EXPECT_NEAR(std::stod(cells.at(at)), expect[row], 1e-6);
  }
}

TEST(Cli, EnvironmentOutputDirWins) {
  const auto env_dir = scratch("env"), flag_dir = scratch("flag");
  ASSERT_EQ(run("mather " + config_path("two_node") + " --output-dir " + flag_dir.string(),
                "WEAKKAM_OUTPUT_DIR=" + env_dir.string()),
            0);
  EXPECT_FALSE(only_file(env_dir, "mather_", ".json").empty());
  EXPECT_TRUE(only_file(flag_dir, "mather_", ".json").empty());
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto dir = scratch("bad");
  json doc = pendulum_doc();
  doc["grid"].erase("dt");
  std::ofstream(dir / "bad.json") << doc.dump();
  EXPECT_EQ(run("critical " + (dir / "bad.json").string() + " --output-dir " + dir.string()), 2);
  EXPECT_EQ(run("critical " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run("frobnicate " + config_path("pendulum")), 2);
}

TEST(Cli, BadGridExitsTwo) {
  const auto dir = scratch("badgrid");
  json doc = pendulum_doc();
  doc["grid"] = {{"dim", 1}, {"n", 8}, {"dt", 0.1}, {"vmax", 0.5}};
  std::ofstream(dir / "grid.json") << doc.dump();
  EXPECT_EQ(run("critical " + (dir / "grid.json").string() + " --output-dir " + dir.string()), 2);
}

TEST(Cli, NumericFailureExitsThreeWithErrorRecord) {
  const auto dir = scratch("numeric");
  json doc = pendulum_doc();
  doc["solver"] = {{"max_iter", 2}};
  std::ofstream(dir / "slow.json") << doc.dump();
  EXPECT_EQ(run("solve " + (dir / "slow.json").string() + " --output-dir " + dir.string()), 3);
  const auto path = only_file(dir, "solve_", ".json");
  ASSERT_FALSE(path.empty());
  const json out = json::parse(slurp(path));
  EXPECT_EQ(out["error"]["kind"], "NoConvergence");
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const auto a = scratch("repeat_a"), b = scratch("repeat_b");
  ASSERT_EQ(run("barrier " + config_path("double_well") + " --output-dir " + a.string()), 0);
  ASSERT_EQ(run("barrier " + config_path("double_well") + " --threads 4 --output-dir " + b.string()), 0);
  const auto ja = only_file(a, "barrier_", ".json"), jb = only_file(b, "barrier_", ".json");
  EXPECT_EQ(ja.filename(), jb.filename());
  EXPECT_EQ(slurp(ja), slurp(jb));
  EXPECT_EQ(slurp(only_file(a, "barrier_", ".csv")), slurp(only_file(b, "barrier_", ".csv")));
}

TEST(Cli, DumpGraphWritesEdgeList) {
  const auto dir = scratch("graph");
  ASSERT_EQ(run("critical " + config_path("two_node") + " --dump-graph --output-dir " + dir.string()), 0);
  const auto path = only_file(dir, "graph_", ".csv");
  ASSERT_FALSE(path.empty());
  const std::string text = slurp(path);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}
