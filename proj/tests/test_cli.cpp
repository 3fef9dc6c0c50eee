#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("hetflux_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    setenv("HETFLUX_OUTPUT_ROOT", root_.c_str(), 1);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = root_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int hetflux(const std::string& args) {
    const std::string cmd = std::string(HETFLUX_CLI_PATH) + " " + args + " >" + (root_ / "stdout.txt").string() +
                            " 2>" + (root_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  std::string stderr_text() const { return read(root_ / "stderr.txt"); }

  std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) const {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
      std::vector<double> row;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
      rows.push_back(row);
    }
    return rows;
  }

  fs::path root_;
};

const double kSqrt2 = std::sqrt(2.0);

// Burgers pair with u = -1 on both sides: a left-going shock from -1 to -sqrt 2, then a
// stationary jump from -sqrt 2 to -1 at the interface.
double constant_minus_one(double xi) {
  const double shock = -1.0 / (2.0 * (kSqrt2 - 1.0));
  if (xi < shock) return -1.0;
  if (xi < 0.0) return -kSqrt2;
  return -1.0;
}

const char* kBurgersPair = "[flux]\nfamily = two_state\nleft = 0.5 0 0\nright = 1 0 0\n";

}  // namespace

TEST_F(Cli, RiemannMatchesClosedForm) {
  const fs::path cfg = write_config("r.ini", std::string(kBurgersPair) + "[riemann]\nu_left = -1\nu_right = -1\n");
  ASSERT_EQ(hetflux("riemann " + cfg.string() + " --output.directory r"), 0) << stderr_text();
  std::string header;
  const auto rows = read_csv(root_ / "r" / "riemann.csv", &header);
  EXPECT_EQ(header, "xi,u");
  ASSERT_EQ(rows.size(), 601u);
  for (const auto& row : rows) {
    if (std::abs(row[0] + 1.0 / (2.0 * (kSqrt2 - 1.0))) < 1e-9 || std::abs(row[0]) < 1e-12) continue;
    EXPECT_NEAR(row[1], constant_minus_one(row[0]), 1e-12) << "xi = " << row[0];
  }
  const auto m = nlohmann::json::parse(read(root_ / "r" / "manifest.json"));
  EXPECT_EQ(m["case"], "I");
  EXPECT_NEAR(m["trace_left"].get<double>(), -kSqrt2, 1e-12);
  EXPECT_NEAR(m["trace_right"].get<double>(), -1.0, 1e-12);
  EXPECT_EQ(m["waves"].size(), 2u);
  EXPECT_EQ(m["status"], 0);
}

TEST_F(Cli, SteadyStatesOfHomogeneousFluxAreConstant) {
  const fs::path cfg = write_config("s.ini", "[flux]\nfamily = power\n[mesh]\ndx = 0.1\n[steady]\nm = -0.5\nM = 0.75\n");
  ASSERT_EQ(hetflux("steady " + cfg.string()), 0) << stderr_text();
  const auto rows = read_csv(root_ / "hetflux-out" / "steady.csv");
  ASSERT_FALSE(rows.empty());
  for (const auto& row : rows) {
    EXPECT_EQ(row[1], rows.front()[1]);
    EXPECT_EQ(row[2], rows.front()[2]);
    EXPECT_LE(row[1], -0.5);
    EXPECT_GE(row[2], 0.75);
  }
}

TEST_F(Cli, ValidateAcceptsBuiltins) {
  for (const char* family : {"lwr", "hetero_quadratic", "power", "two_state"}) {
    EXPECT_EQ(hetflux(std::string("validate --flux.family ") + family), 0) << family << ": " << stderr_text();
    const std::string report = read(root_ / "hetflux-out" / "violations.csv");
    EXPECT_EQ(report, "kind,x,u,detail\n") << family;
  }
}

TEST_F(Cli, ValidateRejectsBrokenFlux) {
  // theta changes sign, so the flux is not convex everywhere.
  EXPECT_EQ(hetflux("validate --flux.family hetero_quadratic --flux.theta '1 -1.5@0:1'"), 2);
  EXPECT_NE(stderr_text().find("flux.theta"), std::string::npos) << stderr_text();
  EXPECT_EQ(hetflux("validate --flux.family lwr --flux.rho_max '1 -1@0:1'"), 2);
  EXPECT_NE(stderr_text().find("flux.rho_max"), std::string::npos) << stderr_text();
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(hetflux(""), 1);
  EXPECT_EQ(hetflux("frobnicate"), 1);
  EXPECT_EQ(hetflux("run --no-such-flag 1"), 1);
  EXPECT_EQ(hetflux("run --flux.family power --mesh.dx 0 --time.t_end 1"), 2);
  EXPECT_NE(stderr_text().find("mesh.dx"), std::string::npos) << stderr_text();
  EXPECT_EQ(hetflux("run --flux.family power --mesh.dx 0.1 --time.t_end 1 --set mesh.dy=1"), 2);
  EXPECT_NE(stderr_text().find("mesh.dy"), std::string::npos);
  EXPECT_EQ(hetflux("riemann --flux.family power"), 2);
  EXPECT_NE(stderr_text().find("riemann.u_left"), std::string::npos);
  EXPECT_EQ(hetflux("run " + (root_ / "missing.ini").string()), 2);
  EXPECT_EQ(hetflux("steady --flux.family hetero_quadratic --mesh.dx 0.1 --steady.anchor 0"), 2);
  EXPECT_EQ(hetflux("--version"), 0);
}

TEST_F(Cli, RunIsDeterministic) {
  const fs::path cfg = write_config(
      "run.ini", "[flux]\nfamily = hetero_quadratic\n[mesh]\ndx = 0.05\n[initial]\ntype = step\nleft = 1\nright = -0.5\n"
                 "[time]\nt_end = 0.3\nsnapshots = 0.1\n");
  ASSERT_EQ(hetflux("run " + cfg.string() + " --output.directory a"), 0) << stderr_text();
  ASSERT_EQ(hetflux("run " + cfg.string() + " --output.directory b"), 0) << stderr_text();
  const std::string a = read(root_ / "a" / "solution.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, read(root_ / "b" / "solution.csv"));
  std::string header;
  const auto rows = read_csv(root_ / "a" / "solution.csv", &header);
  EXPECT_EQ(header, "x,u@0,u@0.10000000000000001,u@0.29999999999999999");
  EXPECT_EQ(rows.front()[1], 1.0);
  EXPECT_EQ(rows.back()[1], -0.5);

  const auto ma = nlohmann::json::parse(read(root_ / "a" / "manifest.json"));
  const auto mb = nlohmann::json::parse(read(root_ / "b" / "manifest.json"));
  EXPECT_NE(ma["config_hash"], mb["config_hash"]);  // output.directory differs
  EXPECT_EQ(ma["envelope_violations"], 0);
  EXPECT_LT(ma["relative_mass_drift"].get<double>(), 1e-10);
}

TEST_F(Cli, ManifestRecordsResolvedConfig) {
  const fs::path cfg = write_config("run.ini", "[flux]\nfamily = power\n[mesh]\ndx = 0.1\n[time]\nt_end = 0.1\n");
  ASSERT_EQ(hetflux("run " + cfg.string() + " --time.cfl_safety 0.5 --set time.cfl_safety=0.25"), 0) << stderr_text();
  const fs::path dir = root_ / "hetflux-out";
  const std::string echo = read(dir / "config.ini");
  EXPECT_NE(echo.find("cfl_safety = 0.25\n"), std::string::npos);
  EXPECT_NE(echo.find("family = power\n"), std::string::npos);
  const auto m = nlohmann::json::parse(read(dir / "manifest.json"));
  EXPECT_EQ(m["tool"], "hetflux");
  EXPECT_EQ(m["subcommand"], "run");
  EXPECT_EQ(m["config_hash"].get<std::string>().rfind("fnv1a64:", 0), 0u);
  for (const auto& f : m["files"]) EXPECT_TRUE(fs::exists(dir / f.get<std::string>())) << f;
  EXPECT_TRUE(fs::exists(dir / "solution.gp"));

  ASSERT_EQ(hetflux("run " + cfg.string() + " --output.plot false --output.directory noplot"), 0);
  EXPECT_FALSE(fs::exists(root_ / "noplot" / "solution.gp"));
}

TEST_F(Cli, DiagnosePasses) {
  const fs::path cfg = write_config(
      "d.ini", "[flux]\nfamily = hetero_quadratic\n[mesh]\ndx = 0.05\n[initial]\ntype = step\nleft = 1\nright = -1\n"
               "[time]\nt_end = 0.25\n[diagnostics]\nk_levels = 9\n");
  ASSERT_EQ(hetflux("diagnose " + cfg.string()), 0) << stderr_text();
  std::ifstream in(root_ / "hetflux-out" / "diagnostics.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "check,value,threshold,status");
  int checks = 0;
  while (std::getline(in, line)) {
    ++checks;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "pass") << line;
  }
  EXPECT_GE(checks, 6);
}
