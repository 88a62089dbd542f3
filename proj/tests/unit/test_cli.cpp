#include "tihom/field_io.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

using nlohmann::json;

namespace {

std::filesystem::path work_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "tihom_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const auto out = work_dir() / "stdout.txt";
  const std::string cmd = std::string(TIHOM_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(out);
  r.out.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  return r;
}

std::filesystem::path write_config(const std::string& name, const json& j) {
  const auto p = work_dir() / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

json laminate(int max_iterations) {
  return {{"matrix", "[[32,0],[0,1]]"},
          {"microstructure",
           {{"kind", "laminate"},
            {"normal", {1, 0}},
            {"fraction", 0.5},
            {"phases", {{{"lambda", 1.0}, {"mu", 1.0}}, {{"lambda", 8.0}, {"mu", 8.0}}}}}},
          {"loading", {1.0, 0.0, 0.0}},
          {"solver", {{"tolerance", 1e-12}, {"max_iterations", max_iterations}}},
          {"reference", {{"kind", "laminate"}}},
          {"sweep", {{"axes", {1}}, {"budget", 4}}},
          {"output", {{"directory", "out_" + std::to_string(max_iterations)}}}};
}

}  // namespace

TEST(Cli, SolveExitCodes) {
  const auto ok = run("solve " + write_config("ok.json", laminate(1000)).string());
  EXPECT_EQ(ok.code, 0);
  EXPECT_TRUE(json::parse(ok.out)["converged"].get<bool>());
  EXPECT_TRUE(std::filesystem::exists(work_dir() / "out_1000" / "strain.pfld"));

  const auto slow = run("solve " + write_config("slow.json", laminate(1)).string());
  EXPECT_EQ(slow.code, 2);
  EXPECT_TRUE(std::filesystem::exists(work_dir() / "out_1" / "report.json"));

  json broken = laminate(10);
  broken["matrix"] = "[[1,2],[2,4]]";
  EXPECT_EQ(run("solve " + write_config("broken.json", broken).string()).code, 1);
  EXPECT_EQ(run("solve " + (work_dir() / "missing.json").string()).code, 1);
  std::ofstream(work_dir() / "garbage.json") << "{ not json";
  EXPECT_EQ(run("solve " + (work_dir() / "garbage.json").string()).code, 1);
  EXPECT_EQ(run("").code, 1);
}

TEST(Cli, OutputDirOverride) {
  const auto dir = work_dir() / "override";
  std::filesystem::remove_all(dir);
  const auto r = run("solve " + write_config("ok2.json", laminate(1000)).string() + " --output-dir " + dir.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "elog.ppm"));
}

TEST(Cli, SweepAlpha) {
  const auto r = run("sweep-alpha " + write_config("sweep.json", laminate(1000)).string());
  EXPECT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  // baseline, four golden-section points, and the midpoint of the flat laminate objective
  EXPECT_EQ(j["evaluations"].size(), 6u);
  json no_ref = laminate(1000);
  no_ref.erase("reference");
  EXPECT_EQ(run("sweep-alpha " + write_config("noref.json", no_ref).string()).code, 1);
}

TEST(Cli, PatternInfo) {
  const auto r = run("pattern-info --matrix \"[[128,272],[0,128]]\"");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["m"].get<long>(), 16384);
  EXPECT_EQ(run("pattern-info --matrix \"[[1,2],[2,4]]\"").code, 1);
  EXPECT_EQ(run("pattern-info").code, 1);
}

TEST(Cli, Errors) {
  const auto dir = work_dir() / "errors";
  std::filesystem::create_directories(dir);
  const auto M = tihom::PatternMatrix::parse("[[2,0],[0,2]]");
  tihom::StrainField a = tihom::StrainField::Zero(4, 3), b = tihom::StrainField::Zero(4, 3);
  a(0, 0) = 1.0;
  b(0, 0) = 2.0;
  tihom::write_field(dir / "a.pfld", M, a);
  tihom::write_field(dir / "b.pfld", M, b);
  const auto r = run("errors --field " + (dir / "a.pfld").string() + " --reference " + (dir / "b.pfld").string() +
                     " --image " + (dir / "e.ppm").string());
  EXPECT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["e_l2"].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(j["e_log_max"].get<double>(), std::log1p(1.0));
  EXPECT_TRUE(std::filesystem::exists(dir / "e.ppm"));
  tihom::write_field(dir / "c.pfld", tihom::PatternMatrix::parse("[[4,0],[0,1]]"), a);
  EXPECT_EQ(run("errors --field " + (dir / "a.pfld").string() + " --reference " + (dir / "c.pfld").string()).code, 1);
}
