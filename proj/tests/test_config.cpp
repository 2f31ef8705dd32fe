#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "pqsim/config.hpp"
#include "pqsim/runner.hpp"

using namespace pqsim;

namespace {

RunConfig unusual_config() {
  RunConfig c;
  c.potential.kind = "step";
  c.potential.v0 = 0.1 + 0.2;  // not exactly representable in short form
  c.potential.width = 1e-4;
  c.packet.sigma = std::numbers::sqrt2;
  c.packet.x0 = -1.0 / 3.0;
  c.grid.n_points = 2048;
  c.time.dt = 7.123456789012345e-4;
  c.time.snapshot_stride = 10;
  c.sweep.logarithmic = true;
  c.sweep.support_min = -2.5;
  c.sweep.support_max = 2.5;
  c.sweep.method = "energy_filter";
  c.compare.steps_b = 1234;
  c.compare.side_b = "quantum";
  c.run.output = "some \"quoted\" dir";
  c.run.oracle = true;
  c.run.threads = 3;
  return c;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, NonDefaultValuesRoundTrip) {
  const RunConfig c = unusual_config();
  const RunConfig back = parse_config(serialize_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), serialize_config(c));
}

TEST(Config, MissingKeysKeepDefaults) {
  const RunConfig c = parse_config("[grid]\nn_points = 1024\n");
  RunConfig expected;
  expected.grid.n_points = 1024;
  EXPECT_EQ(c, expected);
  EXPECT_FALSE(c.time.dt.has_value());
}

TEST(Config, AutoAndNumericStep) {
  EXPECT_FALSE(parse_config("[time]\ndt = \"auto\"\n").time.dt.has_value());
  EXPECT_DOUBLE_EQ(*parse_config("[time]\ndt = 1e-3\n").time.dt, 1e-3);
  EXPECT_THROW(parse_config("[time]\ndt = \"fast\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[time]\ndt = -1.0\n"), ConfigError);
}

TEST(Config, IntegersAcceptedForFloats) {
  EXPECT_DOUBLE_EQ(parse_config("[potential]\ndepth = 5\n").potential.depth, 5.0);
  EXPECT_THROW(parse_config("[grid]\nn_points = 1024.0\n"), ConfigError);
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(parse_config("[grid]\nnpoints = 1024\n"), ConfigError);
  EXPECT_THROW(parse_config("[mesh]\nn = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nn_points = 1000\n"), ConfigError);
  EXPECT_THROW(parse_config("[grid]\nx_min = 1.0\nx_max = -1.0\n"), ConfigError);
  EXPECT_THROW(parse_config("[potential]\nkind = \"square\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[potential]\npower = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[run]\nside = \"both\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[sweep]\nsupport_min = -1.0\n"), ConfigError);
  EXPECT_THROW(parse_config("[packet]\nmass = \"heavy\"\n"), ConfigError);
  EXPECT_THROW(parse_config("grid = [1, 2\n"), ConfigError);
  EXPECT_THROW(parse_config("[sweep]\nmethod = \"stationary_oracle\"\n"), ConfigError);
}

TEST(Config, Overrides) {
  toml::table root = parse_toml("[grid]\nn_points = 4096\n");
  apply_override(root, "grid.n_points=1024");
  apply_override(root, "time.dt=auto");
  apply_override(root, "run.output=\"out dir\"");
  apply_override(root, "potential.kind=zero");
  apply_override(root, "sweep.logarithmic=true");
  const RunConfig c = config_from_table(root);
  EXPECT_EQ(c.grid.n_points, 1024u);
  EXPECT_FALSE(c.time.dt.has_value());
  EXPECT_EQ(c.run.output, "out dir");
  EXPECT_EQ(c.potential.kind, "zero");
  EXPECT_TRUE(c.sweep.logarithmic);
  EXPECT_THROW(apply_override(root, "n_points=3"), ConfigError);
  EXPECT_THROW(apply_override(root, "grid.n_points"), ConfigError);
}

TEST(Config, LoadFileWithOverrides) {
  const auto path = std::filesystem::temp_directory_path() / "pqsim_config_test.toml";
  {
    std::ofstream out(path);
    out << serialize_config(unusual_config());
  }
  const RunConfig c = load_config(path, {"grid.n_points=512", "packet.x0=-2"});
  EXPECT_EQ(c.grid.n_points, 512u);
  EXPECT_DOUBLE_EQ(c.packet.x0, -2.0);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), ConfigError);
}

TEST(Experiment, AutoStepAndOverrideWarning) {
  RunConfig c;
  const Experiment auto_ex = build_experiment(c);
  EXPECT_TRUE(auto_ex.warnings.empty());
  EXPECT_LE(auto_ex.plan.d_tau, auto_ex.auto_dt);
  EXPECT_NEAR(auto_ex.plan.d_tau * static_cast<double>(auto_ex.plan.n_steps), c.time.t_max, 1e-12);

  c.time.dt = 2.0 * auto_ex.auto_dt;
  const Experiment manual = build_experiment(c);
  ASSERT_EQ(manual.warnings.size(), 1u);
  EXPECT_NE(manual.warnings[0].find("overrides the automatic stability bound"), std::string::npos);
  EXPECT_EQ(manual.plan.n_steps, (auto_ex.plan.n_steps + 1) / 2);
}

TEST(Experiment, DerivedSupportAndLevels) {
  RunConfig c;
  const Experiment ex = build_experiment(c);
  EXPECT_DOUBLE_EQ(ex.left_level, -10.0);
  EXPECT_DOUBLE_EQ(ex.right_level, -10.0);
  EXPECT_GT(ex.support.first, -4.0);
  EXPECT_LT(ex.support.first, -2.5);
  EXPECT_NEAR(ex.support.first, -ex.support.second, 0.1);

  c.potential.kind = "step";
  const Experiment step = build_experiment(c);
  EXPECT_DOUBLE_EQ(step.left_level, 0.0);
  EXPECT_DOUBLE_EQ(step.right_level, 1.0);
  EXPECT_NEAR(step.support.first, -1.0, 0.1);
  EXPECT_NEAR(step.support.second, 1.0, 0.1);
}

TEST(Experiment, ModuleErrorsBecomeConfigErrors) {
  RunConfig c;
  c.packet.x0 = -119.0;  // packet hangs off the grid
  EXPECT_THROW(build_experiment(c), ConfigError);
  c = RunConfig{};
  c.sweep.split = 500.0;
  EXPECT_THROW(build_experiment(c), ConfigError);
}
