#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "pqsim/config.hpp"

namespace fs = std::filesystem;

namespace {

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
           ("pqsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Small, fast variant of the sextic-well setup.
  pqsim::RunConfig small() const {
    pqsim::RunConfig c;
    c.grid = {-40.0, 40.0, 1024};
    c.time.t_max = 1.0;
    c.compare.spectra = false;
    c.run.output = (dir_ / "out").string();
    return c;
  }

  fs::path write(const pqsim::RunConfig& c, const std::string& name = "run.toml") const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << pqsim::serialize_config(c);
    return p;
  }

  /// Runs the CLI; stdout/stderr are captured into files under the test dir.
  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" PQSIM_CLI_PATH "' " + args + " > '" + (dir_ / "stdout.txt").string() +
                            "' 2> '" + (dir_ / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string err() const { return slurp(dir_ / "stderr.txt"); }
  nlohmann::json json(const std::string& name) const { return nlohmann::json::parse(slurp(dir_ / "out" / name)); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthesizeSexticGuide) {
  pqsim::RunConfig c = small();
  c.grid = {-120.0, 120.0, 4096};
  EXPECT_EQ(run("synthesize --config " + write(c).string()), 3);  // feature size and divergence flags
  const auto j = json("index_profile.json");
  EXPECT_NEAR(j["n_max"].get<double>(), 1.00505, 1e-5);
  EXPECT_TRUE(j["feasibility"]["n_max_ok"].get<bool>());
  EXPECT_FALSE(j["feasibility"]["all_ok"].get<bool>());
  EXPECT_DOUBLE_EQ(j["k_opt"].get<double>(), 2.0 * 0.5 * j["w"].get<double>());
  const std::string csv = slurp(dir_ / "out" / "index_profile.csv");
  EXPECT_EQ(csv.substr(0, 8), "xi_um,n\n");
  // With relaxed paraxial limits every check passes.
  EXPECT_EQ(run("synthesize --config " + write(c).string() +
                " --set optics.feature_wavelengths=2 --set optics.max_divergence=0.2"), 0);
}

TEST_F(Cli, SynthesizeVacuumPasses) {
  pqsim::RunConfig c = small();
  c.potential.kind = "zero";
  c.packet.p0 = 0.5;  // a slow packet keeps the beam divergence small
  EXPECT_EQ(run("synthesize -c " + write(c).string()), 0);
  std::istringstream csv(slurp(dir_ / "out" / "index_profile.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) EXPECT_EQ(line.substr(line.find(',') + 1), "1");
}

TEST_F(Cli, SynthesizeStrongIndexExceedsMaterial) {
  pqsim::RunConfig c = small();
  c.optics.lambda = 2.0 * std::numbers::pi;  // s * w = 1
  EXPECT_EQ(run("synthesize -c " + write(c).string()), 3);
  const auto j = json("index_profile.json");
  EXPECT_NEAR(j["n_max"].get<double>(), 3.3166, 1e-4);
  EXPECT_FALSE(j["feasibility"]["n_max_ok"].get<bool>());
  EXPECT_NE(err().find("exceeds material limit"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "index_profile.csv"));
}

TEST_F(Cli, PropagateFreeParticleDrifts) {
  pqsim::RunConfig c = small();
  c.potential.kind = "zero";
  c.time.t_max = 3.0;
  c.time.snapshot_stride = 1000;
  EXPECT_EQ(run("propagate -c " + write(c).string()), 0);
  const auto m = json("manifest_quantum.json");
  EXPECT_NEAR(m["final"]["mean_position"].get<double>(), -7.0 + 3.5 / 0.5 * 3.0, 1e-6);
  const auto& snaps = m["snapshots"];
  ASSERT_GE(snaps.size(), 2u);
  EXPECT_EQ(snaps[0]["step"].get<int>(), 0);
  EXPECT_EQ(snaps.back()["step"].get<std::size_t>(), m["n_steps"].get<std::size_t>());
  for (const auto& s : snaps) {
    EXPECT_NEAR(s["norm"].get<double>(), 1.0, 1e-10);
    EXPECT_TRUE(fs::exists(dir_ / "out" / s["file"].get<std::string>()));
  }
  EXPECT_EQ(slurp(dir_ / "out" / snaps[0]["file"].get<std::string>()).substr(0, 13), "x,re,im,abs2\n");
}

TEST_F(Cli, PropagateRegionProbabilitiesSumToOne) {
  pqsim::RunConfig c = small();
  c.time.t_max = 3.0;
  EXPECT_EQ(run("propagate -c " + write(c).string() + " --side optical"), 0);
  const auto m = json("manifest_optical.json");
  EXPECT_EQ(m["unit"].get<std::string>(), "micron");
  EXPECT_NEAR(m["final"]["left_probability"].get<double>() + m["final"]["right_probability"].get<double>(), 1.0,
              1e-8);
}

TEST_F(Cli, StepOverrideWarns) {
  pqsim::RunConfig c = small();
  c.time.dt = 8e-4;  // above the automatic bound, below the hard phase limit
  EXPECT_EQ(run("propagate -c " + write(c).string()), 0);
  EXPECT_NE(err().find("overrides the automatic stability bound"), std::string::npos);
  c.time.dt.reset();
  EXPECT_EQ(run("propagate -c " + write(c).string()), 0);
  EXPECT_EQ(err().find("stability bound"), std::string::npos);
}

TEST_F(Cli, CompareIdentityAndOptical) {
  pqsim::RunConfig c = small();
  c.compare.side_b = "quantum";
  EXPECT_EQ(run("compare -c " + write(c).string()), 0);
  EXPECT_EQ(json("compare_report.json")["max_abs_field_difference"].get<double>(), 0.0);
  c.compare.side_b = "optical";
  EXPECT_EQ(run("compare -c " + write(c).string()), 0);
  const auto r = json("compare_report.json");
  EXPECT_LT(r["max_abs_field_difference"].get<double>(), 1e-8);
  EXPECT_TRUE(r["pass"].get<bool>());
}

TEST_F(Cli, CompareFailsOnTightTolerance) {
  pqsim::RunConfig c = small();
  c.compare.field_tolerance = 1e-30;
  EXPECT_EQ(run("compare -c " + write(c).string()), 1);
  EXPECT_FALSE(json("compare_report.json")["pass"].get<bool>());
}

TEST_F(Cli, CompareMismatchedStepsIsConfigError) {
  pqsim::RunConfig c = small();
  c.compare.steps_b = 17;
  EXPECT_EQ(run("compare -c " + write(c).string()), 2);
  EXPECT_NE(err().find("mismatched step counts"), std::string::npos);
}

TEST_F(Cli, ReflectWithOracleColumn) {
  pqsim::RunConfig c = small();
  c.grid = {-120.0, 120.0, 4096};
  c.time.t_max = 10.0;
  c.sweep.n_points = 9;
  c.sweep.e_min = 2.0;
  c.sweep.e_max = 4.0;
  EXPECT_EQ(run("reflect -c " + write(c).string() + " --oracle --threads 2"), 0);
  std::istringstream csv(slurp(dir_ / "out" / "spectrum.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "E_au,R,reliable,method,R_oracle");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::stringstream row(line);
    std::string e, r, rel, method, oracle;
    std::getline(row, e, ',');
    std::getline(row, r, ',');
    std::getline(row, rel, ',');
    std::getline(row, method, ',');
    std::getline(row, oracle, ',');
    EXPECT_EQ(method, "momentum_sign");
    EXPECT_NEAR(std::stod(r) / std::stod(oracle), 1.0, 0.05) << line;
  }
  EXPECT_EQ(rows, 9);
}

TEST_F(Cli, UnscatteredPacketIsNumericalAbort) {
  pqsim::RunConfig c = small();
  c.time.t_max = 0.5;
  c.sweep.n_points = 4;
  EXPECT_EQ(run("reflect -c " + write(c).string()), 4);
  EXPECT_NE(err().find("not fully scattered"), std::string::npos);
}

TEST_F(Cli, DipsRequireEnoughPoints) {
  pqsim::RunConfig c = small();
  c.grid = {-120.0, 120.0, 4096};
  c.time.t_max = 10.0;
  c.sweep.n_points = 20;
  EXPECT_EQ(run("dips -c " + write(c).string()), 0);
  std::istringstream csv(slurp(dir_ / "out" / "dips.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "E_dip,R_dip,prominence_decades");
}

TEST_F(Cli, ConfigErrors) {
  EXPECT_EQ(run("propagate -c " + (dir_ / "missing.toml").string()), 2);
  std::ofstream(dir_ / "bad.toml") << "[grid]\nn_points = 1000\n";
  EXPECT_EQ(run("propagate -c " + (dir_ / "bad.toml").string()), 2);
  EXPECT_NE(err().find("power of two"), std::string::npos);
  EXPECT_EQ(run("teleport -c " + (dir_ / "bad.toml").string()), 2);
  EXPECT_EQ(run("propagate"), 2);
  const fs::path ok = write(small());
  EXPECT_EQ(run("propagate -c " + ok.string() + " --set grid.n_points=100"), 2);
  EXPECT_EQ(run("propagate -c " + ok.string() + " --set nonsense"), 2);
  EXPECT_EQ(run("reflect -c " + ok.string(), "PQSIM_THREADS=many"), 2);
}

TEST_F(Cli, OutputIsDeterministic) {
  pqsim::RunConfig c = small();
  c.grid = {-120.0, 120.0, 4096};
  c.time.t_max = 10.0;
  c.time.snapshot_stride = 2000;
  c.sweep.n_points = 16;
  const fs::path cfg = write(c);
  const std::string a = (dir_ / "a").string();
  const std::string b = (dir_ / "b").string();
  for (const std::string cmd : {"propagate", "reflect --oracle"}) {
    ASSERT_EQ(run(std::string(cmd) + " -c " + cfg.string() + " --out " + a + " --threads 1"), 0);
    ASSERT_EQ(run(std::string(cmd) + " -c " + cfg.string() + " --out " + b, "PQSIM_THREADS=3"), 0);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path other = fs::path(b) / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++files;
  }
  EXPECT_GE(files, 4u);
}
