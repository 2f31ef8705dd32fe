// pqsim: split-operator simulation of quantum scattering and its paraxial
// optical analog.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pqsim/pqsim.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<unsigned> threads;
  bool oracle = false;
  std::optional<std::string> out;
  std::optional<std::string> side;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("-c,--config", o.config, "TOML run configuration")->required();
  cmd->add_option("--threads", o.threads, "worker threads for energy sweeps (0 = all cores)");
  cmd->add_option("--out", o.out, "output directory (overrides run.output)");
  cmd->add_option("--set", o.overrides, "override a config key, e.g. --set grid.n_points=2048");
}

/// Command-line flags override config keys; PQSIM_THREADS backs --threads.
std::vector<std::string> flag_overrides(const Options& o) {
  std::vector<std::string> sets = o.overrides;
  std::optional<unsigned> threads = o.threads;
  if (!threads) {
    if (const char* env = std::getenv("PQSIM_THREADS"); env != nullptr && *env != '\0') {
      try {
        threads = static_cast<unsigned>(std::stoul(env));
      } catch (const std::exception&) {
        throw pqsim::ConfigError(std::string("PQSIM_THREADS must be a non-negative integer, got '") + env + "'");
      }
    }
  }
  if (threads) sets.push_back("run.threads=" + std::to_string(*threads));
  if (o.out) sets.push_back("run.output=" + pqsim::detail::quote(*o.out));
  if (o.side) sets.push_back("run.side=" + pqsim::detail::quote(*o.side));
  if (o.oracle) sets.push_back("run.oracle=true");
  return sets;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pqsim - quantum scattering and its paraxial optical analog"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synthesize", "index profile n(xi) and feasibility report");
  add_common(synth, o);
  auto* prop = app.add_subcommand("propagate", "propagate the packet and dump snapshots");
  add_common(prop, o);
  prop->add_option("--side", o.side, "quantum or optical")->check(CLI::IsMember({"quantum", "optical"}));
  auto* cmp = app.add_subcommand("compare", "quantum/optical equivalence report");
  add_common(cmp, o);
  auto* refl = app.add_subcommand("reflect", "reflection spectrum R(E)");
  add_common(refl, o);
  refl->add_option("--side", o.side, "quantum or optical")->check(CLI::IsMember({"quantum", "optical"}));
  refl->add_flag("--oracle", o.oracle, "add the transfer-matrix oracle column");
  auto* dips = app.add_subcommand("dips", "reflection spectrum and its dips");
  add_common(dips, o);
  dips->add_option("--side", o.side, "quantum or optical")->check(CLI::IsMember({"quantum", "optical"}));
  dips->add_flag("--oracle", o.oracle, "add the transfer-matrix oracle column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pqsim::exit_config_error;
  }

  return pqsim::run_guarded([&]() -> int {
    const pqsim::RunConfig config = pqsim::load_config(o.config, flag_overrides(o));
    if (synth->parsed()) return pqsim::cmd_synthesize(config);
    if (prop->parsed()) return pqsim::cmd_propagate(config);
    if (cmp->parsed()) return pqsim::cmd_compare(config);
    if (refl->parsed()) return pqsim::cmd_reflect(config);
    return pqsim::cmd_dips(config);
  });
}
