#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "polyconsensus/polyconsensus.hpp"

namespace fs = std::filesystem;
using polyconsensus::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args, const std::string& env = "") const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = env + " \"" POLYCONSENSUS_CLI "\" " + args + " >\"" + out.string() +
                            "\" 2>\"" + err.string() + "\"";
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_config(const std::string& name, const json& doc) const {
    polyconsensus::write_json_file(path(name), doc);
    return path(name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ExampleWritesLoadableConfigs) {
  for (const std::string which : {"vdp", "lorenz"}) {
    const CliResult r = run("example " + which + " --out " + dir_.string());
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = polyconsensus::read_json_file(path(which + ".json"));
    EXPECT_EQ(doc, polyconsensus::example_config(which));
  }
  EXPECT_NE(run("example duffing --out " + dir_.string()).code, 0);
}

TEST_F(Cli, DisconnectedPatternIsAnInputError) {
  json doc = polyconsensus::example_config("lorenz");
  doc["pattern"] = {{"edges", {{1, 2}, {3, 4}, {5, 6}, {7, 8}}}};
  const CliResult r = run("certify --config " + write_config("disc.json", doc) + " --out " + path("c.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("connected"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("c.json")));
}

TEST_F(Cli, MixedSignSpectrumIsRejectedForIntervalMethod) {
  json doc = polyconsensus::example_config("lorenz");
  doc["pattern"] = {{"edges", {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 1, -0.3}}}};
  const CliResult r = run("certify --config " + write_config("mixed.json", doc) +
                    " --method theorem2 --l 2 --out " + path("c.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("contains 0"), std::string::npos) << r.err;
}

TEST_F(Cli, MalformedConfigReportsPointer) {
  json doc = polyconsensus::example_config("vdp");
  doc["agent_terms"][0]["row"] = 7;
  const CliResult r = run("certify --config " + write_config("bad.json", doc));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/agent_terms/0/row"), std::string::npos) << r.err;
}

TEST_F(Cli, LorenzCertifyThenVerify) {
  const std::string cfg = write_config("lorenz.json", polyconsensus::example_config("lorenz"));
  const CliResult c = run("certify --config " + cfg + " --out " + path("cert.json"));
  ASSERT_EQ(c.code, 0) << c.out << c.err;
  EXPECT_NE(c.out.find("status: certified"), std::string::npos);
  const CliResult v = run("verify --config " + cfg + " --cert " + path("cert.json"));
  EXPECT_EQ(v.code, 0) << v.err;
  const json report = json::parse(v.out);
  EXPECT_EQ(report["verdict"], "pass");
  EXPECT_TRUE(v.err.empty()) << v.err;
}

TEST_F(Cli, TamperedCertificateFailsVerification) {
  const std::string cfg = write_config("lorenz.json", polyconsensus::example_config("lorenz"));
  ASSERT_EQ(run("certify --config " + cfg + " --out " + path("cert.json")).code, 0);
  json cert = polyconsensus::read_json_file(path("cert.json"));
  for (auto& L : cert["L"])
    for (auto& row : L)
      for (auto& x : row) x = -x.get<double>();
  polyconsensus::write_json_file(path("bad.json"), cert);
  const CliResult v = run("verify --config " + cfg + " --cert " + path("bad.json"));
  EXPECT_EQ(v.code, 2);
  EXPECT_EQ(json::parse(v.out)["verdict"], "fail");
}

TEST_F(Cli, HashMismatchWarnsButStillVerifies) {
  json doc = polyconsensus::example_config("lorenz");
  const std::string cfg = write_config("lorenz.json", doc);
  ASSERT_EQ(run("certify --config " + cfg + " --out " + path("cert.json")).code, 0);
  doc["gain"] = 49.0;
  const CliResult v = run("verify --config " + write_config("other.json", doc) + " --cert " + path("cert.json"));
  EXPECT_NE(v.err.find("does not match"), std::string::npos) << v.err;
  EXPECT_TRUE(v.code == 0 || v.code == 2);
}

TEST_F(Cli, ConsensusStartStaysOnManifold) {
  const std::string cfg = write_config("lorenz.json", polyconsensus::example_config("lorenz"));
  const CliResult r = run("simulate --config " + cfg + " --consensus --t-final 0.5 --out " + path("t.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("t.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("t,x_1_1,", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) {
    const double d = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_LE(d, 1e-9);
    ++rows;
  }
  EXPECT_EQ(rows, 501);
  const json meta = polyconsensus::read_json_file(path("t.csv.meta.json"));
  EXPECT_TRUE(meta["consensus_start"].get<bool>());
  EXPECT_EQ(meta["steps"], 500);
}

TEST_F(Cli, SdpaExportWithoutSolverLeavesProblemFile) {
  const std::string cfg = write_config("lorenz.json", polyconsensus::example_config("lorenz"));
  const CliResult r = run("certify --config " + cfg + " --solver sdpa-export --out " + path("cert.json"),
                    "env -u POLYCONSENSUS_SDPA_SOLVER");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("status: unknown"), std::string::npos);
  const polyconsensus::SdpaProblem s = polyconsensus::read_sdpa(path("cert.json.sdpa.dat-s"));
  EXPECT_GT(s.m, 1);
  EXPECT_FALSE(fs::exists(path("cert.json")));
}

TEST_F(Cli, OutputsAreDeterministic) {
  const std::string cfg = write_config("lorenz.json", polyconsensus::example_config("lorenz"));
  ASSERT_EQ(run("certify --config " + cfg + " --out " + path("a.json")).code, 0);
  ASSERT_EQ(run("certify --config " + cfg + " --out " + path("b.json")).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const std::string sim = "simulate --config " + cfg + " --cert " + path("a.json") + " --t-final 0.2 --seed 5";
  ASSERT_EQ(run(sim + " --out " + path("a.csv")).code, 0);
  ASSERT_EQ(run(sim + " --out " + path("b.csv")).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(Cli, BadArgumentsExitWithInputError) {
  EXPECT_EQ(run("certify --config /nonexistent.json").code, 1);
  const std::string cfg = write_config("vdp.json", polyconsensus::example_config("vdp"));
  EXPECT_EQ(run("certify --config " + cfg + " --method theorem9").code, 1);
  EXPECT_EQ(run("simulate --config " + cfg + " --dt -1").code, 1);
}
