#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pqsim/config.hpp"
#include "pqsim/error.hpp"
#include "pqsim/field.hpp"
#include "pqsim/grid.hpp"
#include "pqsim/io.hpp"
#include "pqsim/optics.hpp"
#include "pqsim/packet.hpp"
#include "pqsim/parallel.hpp"
#include "pqsim/potential.hpp"
#include "pqsim/scattering.hpp"
#include "pqsim/split_operator.hpp"

namespace pqsim {

enum ExitCode : int {
  exit_ok = 0,
  exit_comparison_failed = 1,
  exit_config_error = 2,
  exit_feasibility = 3,
  exit_numerical = 4,
};

/// Everything a command needs, resolved from a validated RunConfig.
struct Experiment {
  RunConfig config;
  Grid1D grid;
  PotentialModel model;
  std::vector<double> potential;
  GaussianPacketSpec packet;
  WaveField initial;
  OpticalScales scales;
  StepPlan plan;
  /// Step bound of the automatic rule, whether or not it was used.
  double auto_dt = 0.0;
  double left_level = 0.0;
  double right_level = 0.0;
  /// Region holding the scatterer, atomic units.
  std::pair<double, double> support;
  std::vector<std::string> warnings;
};

/// Smallest interval around `split` outside of which the sampled potential
/// sits within 1e-10 (relative to its scale) of its asymptotic value on each
/// side, widened by `pad`.
inline std::pair<double, double> potential_support(const Grid1D& grid, const std::vector<double>& v,
                                                   double split, double pad = 1.0) {
  const auto x = grid.positions();
  double scale = 1.0;
  for (double w : v) scale = std::max(scale, std::abs(w));
  const double tol = 1e-10 * scale;
  double lo = split;
  double hi = split;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double level = x[j] < split ? v.front() : v.back();
    if (std::abs(v[j] - level) > tol) {
      lo = std::min(lo, x[j]);
      hi = std::max(hi, x[j]);
    }
  }
  return {std::max(lo - pad, grid.x_min()), std::min(hi + pad, grid.x_max())};
}

inline PotentialModel build_potential(const PotentialConfig& p) {
  if (p.kind == "smoothed_power") return smoothed_power(p.power, p.depth);
  if (p.kind == "step") return step_potential(p.v0, p.x0, p.width);
  if (p.kind == "zero") return ZeroPotential{};
  if (p.kind == "tabulated") return load_tabulated_csv(p.file);
  throw ConfigError("unknown potential kind '" + p.kind + "'");
}

/// Resolves `config` into grids, sampled potential, packet and step plan.
/// Module-level precondition failures surface as ConfigError.
inline Experiment build_experiment(const RunConfig& config) {
  validate_config(config);
  try {
    Grid1D grid = make_grid(config.grid.x_min, config.grid.x_max, config.grid.n_points);
    PotentialModel model = build_potential(config.potential);
    std::vector<double> v = sample_potential(model, grid);
    GaussianPacketSpec packet{config.packet.mass, config.packet.x0, config.packet.p0, config.packet.sigma};
    std::vector<std::string> warnings;
    WaveField initial = gaussian_packet(packet, grid, &warnings);
    OpticalScales scales(config.optics.s, config.optics.lambda, config.packet.mass);

    const double a = 1.0 / (2.0 * packet.mass);
    const double auto_dt = auto_step(a, v, grid);
    StepPlan plan;
    if (config.time.dt) {
      plan = plan_steps(config.time.t_max, *config.time.dt);
      if (*config.time.dt > auto_dt * (1.0 + 1e-12)) {
        warnings.push_back("time.dt = " + io::show(*config.time.dt) +
                           " overrides the automatic stability bound dt <= " + io::show(auto_dt));
      }
    } else {
      plan = plan_steps(config.time.t_max, auto_dt);
    }

    const double split = config.sweep.split;
    if (!(split > grid.x_min() && split < grid.x_max())) {
      throw ConfigError("sweep.split lies outside the grid");
    }
    std::pair<double, double> support;
    if (config.sweep.support_min) {
      support = {*config.sweep.support_min, *config.sweep.support_max};
    } else {
      support = potential_support(grid, v, split);
    }
    const double left = v.front();
    const double right = v.back();
    return Experiment{config, grid, std::move(model), std::move(v), packet, std::move(initial), scales,
                      plan, auto_dt, left, right, support, std::move(warnings)};
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

struct SideRun {
  /// quantum | optical
  std::string side;
  WaveField initial;
  PropagationResult result;
  /// Kinetic inertia: m (quantum) or k_opt (optical).
  double inertia = 1.0;
  /// tau per atomic time unit: 1 or 2 w s^2.
  double tau_per_t = 1.0;
  /// position unit per bohr: 1 or s.
  double x_scale = 1.0;
  std::optional<IndexProfile> profile;
};

/// Propagates one side. The optical side builds n(xi) and V_eff from the
/// potential model and uses the quantum step count (or `steps` if given).
inline SideRun run_side(const Experiment& ex, const std::string& side,
                        std::optional<std::size_t> steps = std::nullopt) {
  const std::size_t n_steps = steps.value_or(ex.plan.n_steps);
  const double dt = ex.config.time.t_max / static_cast<double>(n_steps);
  std::optional<AbsorbingLayer> cap;
  if (ex.config.time.cap_strength > 0.0) cap = AbsorbingLayer{ex.config.time.cap_strength, ex.config.time.cap_width};

  if (side == "quantum") {
    EvolutionSpec spec = make_quantum_spec(ex.packet.mass, ex.potential, dt, n_steps);
    spec.snapshot_stride = ex.config.time.snapshot_stride;
    spec.cap = cap;
    SideRun run{side, ex.initial, propagate(ex.initial, spec), ex.packet.mass, 1.0, 1.0, std::nullopt};
    return run;
  }
  if (side != "optical") throw ConfigError("unknown side '" + side + "'");
  OpticalRun optical = to_optical(ex.initial, ex.config.time.t_max, ex.scales);
  IndexProfile profile = index_profile(ex.model, ex.scales, optical.grid);
  const double dz = optical.z_max / static_cast<double>(n_steps);
  EvolutionSpec spec = make_optical_spec(ex.scales.k_opt(), effective_potential(profile), dz, n_steps);
  spec.snapshot_stride = ex.config.time.snapshot_stride;
  if (cap) {
    // Same damping per step on both sides: the rate scales like the potential.
    spec.cap = AbsorbingLayer{cap->strength / ex.scales.z_per_t(), cap->width_fraction};
  }
  PropagationResult result = propagate(optical.boundary, spec);
  return SideRun{side, optical.boundary, std::move(result), ex.scales.k_opt(), ex.scales.z_per_t(),
                 ex.scales.s(), std::move(profile)};
}

inline std::vector<double> sweep_energies(const SweepConfig& s) {
  if (s.n_points == 1) return {s.e_min};
  return energy_grid(s.e_min, s.e_max, s.n_points, s.logarithmic);
}

/// Reflection spectrum of a finished side run, labelled by quantum energy.
/// On the optical side energies become propagation constants kappa and
/// lengths are scaled by s before extraction.
inline ReflectionSpectrum side_spectrum(const Experiment& ex, const SideRun& run,
                                        const std::vector<double>& energies, ReflectionMethod method,
                                        unsigned threads) {
  ReflectionOptions opt;
  opt.left_level = ex.left_level / run.tau_per_t;
  opt.right_level = ex.right_level / run.tau_per_t;
  opt.split = ex.config.sweep.split * run.x_scale;
  opt.support = std::pair{ex.support.first * run.x_scale, ex.support.second * run.x_scale};
  opt.scattered_tolerance = ex.config.sweep.scattered_tolerance;
  opt.reliability_floor = ex.config.sweep.reliability_floor;
  opt.threads = threads;
  std::vector<double> scaled(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i) scaled[i] = energies[i] / run.tau_per_t;
  ReflectionSpectrum spectrum = reflection_spectrum(run.result.final, run.initial, run.inertia, scaled, method, opt);
  spectrum.energies = energies;
  return spectrum;
}

inline OracleSpectrum experiment_oracle(const Experiment& ex, const std::vector<double>& energies,
                                        unsigned threads) {
  const double h = ex.grid.dx() / static_cast<double>(ex.config.sweep.oracle_oversample);
  return oracle_spectrum(ex.model, ex.support.first, ex.support.second, h, ex.packet.mass, energies, threads);
}

/// Decades between the largest and smallest positive reliable R.
inline double decades_spanned(const ReflectionSpectrum& s) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.reliable[i] || !(s.R[i] > 0.0)) continue;
    lo = std::min(lo, s.R[i]);
    hi = std::max(hi, s.R[i]);
  }
  return hi > 0.0 ? std::log10(hi / lo) : 0.0;
}

struct Streams {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

inline void emit_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

inline unsigned config_threads(const RunConfig& c) { return resolve_threads(c.run.threads); }

inline int cmd_synthesize(const RunConfig& config, Streams io = {}) {
  const Experiment ex = build_experiment(config);
  emit_warnings(ex.warnings, io.err);
  const OpticalRun optical = to_optical(ex.initial, config.time.t_max, ex.scales);
  IndexProfile profile = [&] {
    try {
      return index_profile(ex.model, ex.scales, optical.grid);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }();
  const FeasibilityLimits limits{config.optics.n_material_max, config.optics.fabrication_resolution,
                                 config.optics.max_divergence, config.optics.feature_wavelengths};
  const FeasibilityReport report = feasibility_report(profile, &optical.boundary, limits);

  const std::filesystem::path dir = config.run.output;
  {
    auto csv = io::open_output(dir / "index_profile.csv");
    io::write_index_csv(csv, profile);
  }
  io::write_json(dir / "index_profile.json", io::index_sidecar_json(profile, report));

  io.out << "n_max = " << io::show(profile.n_max) << '\n';
  if (!report.n_max_ok) {
    io.err << "feasibility: n_max " << io::show(report.n_max) << " exceeds material limit "
           << io::show(limits.n_material_max) << '\n';
  }
  if (!report.feature_ok) {
    io.err << "feasibility: smallest feature " << io::show(report.feature_size) << " um is below "
           << io::show(report.feature_limit) << " um\n";
  }
  if (!report.divergence_ok) {
    io.err << "feasibility: divergence half-angle " << io::show(*report.divergence) << " rad exceeds "
           << io::show(limits.max_divergence) << " rad\n";
  }
  return report.all_ok() ? exit_ok : exit_feasibility;
}

inline int cmd_propagate(const RunConfig& config, Streams io = {}) {
  const Experiment ex = build_experiment(config);
  emit_warnings(ex.warnings, io.err);
  const SideRun run = run_side(ex, config.run.side);
  emit_warnings(run.result.warnings, io.err);

  const std::filesystem::path dir = config.run.output;
  nlohmann::json manifest;
  manifest["side"] = run.side;
  manifest["unit"] = to_string(run.result.final.unit());
  const Snapshot& last = run.result.snapshots.back();
  manifest["d_tau"] = last.tau / static_cast<double>(last.step);
  manifest["n_steps"] = run.result.norm_history.size() - 1;
  nlohmann::json snaps = nlohmann::json::array();
  for (std::size_t i = 0; i < run.result.snapshots.size(); ++i) {
    const Snapshot& s = run.result.snapshots[i];
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%s_%05zu.csv", run.side.c_str(), i);
    auto csv = io::open_output(dir / name);
    io::write_field_csv(csv, s.field);
    snaps.push_back({{"tau", s.tau}, {"step", s.step}, {"norm", run.result.norm_history[s.step]}, {"file", name}});
  }
  manifest["snapshots"] = std::move(snaps);

  const WaveField& f = run.result.final;
  const double split = config.sweep.split * run.x_scale;
  const double p_left = probability_in(f, f.grid().x_min(), split);
  const double p_right = probability_in(f, split, f.grid().x_max());
  const double norm0 = run.result.norm_history.front();
  const double drift = std::abs(run.result.norm_history.back() - norm0) / norm0;
  manifest["final"] = {{"left_probability", p_left / norm0},
                       {"right_probability", p_right / norm0},
                       {"mean_position", mean_position(f)},
                       {"relative_norm_drift", drift}};
  io::write_json(dir / ("manifest_" + run.side + ".json"), manifest);

  io.out << run.side << ": " << run.result.norm_history.size() - 1 << " steps, left "
         << io::show(p_left / norm0) << ", right " << io::show(p_right / norm0) << ", norm drift "
         << io::show(drift) << '\n';
  return exit_ok;
}

inline int cmd_compare(const RunConfig& config, Streams io = {}) {
  const Experiment ex = build_experiment(config);
  emit_warnings(ex.warnings, io.err);
  const std::size_t steps_a = ex.plan.n_steps;
  const std::size_t steps_b = config.compare.steps_b.value_or(steps_a);
  if (steps_a != steps_b) {
    throw ConfigError("mismatched step counts: side a uses " + std::to_string(steps_a) +
                      ", side b " + std::to_string(steps_b));
  }
  const SideRun a = run_side(ex, config.compare.side_a, steps_a);
  const SideRun b = run_side(ex, config.compare.side_b, steps_b);

  double field_diff = 0.0;
  const auto va = a.result.final.values();
  const auto vb = b.result.final.values();
  for (std::size_t j = 0; j < va.size(); ++j) field_diff = std::max(field_diff, std::abs(va[j] - vb[j]));
  bool pass = field_diff < config.compare.field_tolerance;

  nlohmann::json report;
  report["side_a"] = a.side;
  report["side_b"] = b.side;
  report["n_steps"] = steps_a;
  report["max_abs_field_difference"] = field_diff;
  report["field_tolerance"] = config.compare.field_tolerance;
  if (config.compare.spectra) {
    const auto energies = sweep_energies(config.sweep);
    const auto method = parse_reflection_method(config.sweep.method);
    const unsigned threads = config_threads(config);
    const ReflectionSpectrum sa = side_spectrum(ex, a, energies, method, threads);
    const ReflectionSpectrum sb = side_spectrum(ex, b, energies, method, threads);
    const SpectrumComparison cmp = compare_spectra(sa, sb);
    pass = pass && cmp.max_abs_log10_ratio < config.compare.spectrum_tolerance;
    report["spectra"] = {{"method", to_string(method)},
                         {"max_abs_log10_ratio", cmp.max_abs_log10_ratio},
                         {"energies_compared", cmp.energies_compared},
                         {"decades_spanned", decades_spanned(sa)},
                         {"tolerance", config.compare.spectrum_tolerance}};
  }
  report["pass"] = pass;
  io::write_json(std::filesystem::path(config.run.output) / "compare_report.json", report);
  io.out << "max |field difference| = " << io::show(field_diff);
  if (report.contains("spectra")) {
    io.out << ", max |log10 R ratio| = " << io::show(report["spectra"]["max_abs_log10_ratio"].get<double>());
  }
  io.out << (pass ? " : pass\n" : " : FAIL\n");
  return pass ? exit_ok : exit_comparison_failed;
}

struct SweepOutcome {
  ReflectionSpectrum spectrum;
  std::optional<OracleSpectrum> oracle;
};

inline SweepOutcome run_sweep(const RunConfig& config, Streams io) {
  const Experiment ex = build_experiment(config);
  emit_warnings(ex.warnings, io.err);
  const SideRun run = run_side(ex, config.run.side);
  emit_warnings(run.result.warnings, io.err);
  const auto energies = sweep_energies(config.sweep);
  const unsigned threads = config_threads(config);
  SweepOutcome outcome{side_spectrum(ex, run, energies, parse_reflection_method(config.sweep.method), threads),
                       std::nullopt};
  if (config.run.oracle) {
    try {
      outcome.oracle = experiment_oracle(ex, energies, threads);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("oracle: ") + e.what());
    }
  }
  auto csv = io::open_output(std::filesystem::path(config.run.output) / "spectrum.csv");
  io::write_spectrum_csv(csv, outcome.spectrum,
                         outcome.oracle ? std::span<const double>(outcome.oracle->spectrum.R) : std::span<const double>{});
  return outcome;
}

inline int cmd_reflect(const RunConfig& config, Streams io = {}) {
  const SweepOutcome s = run_sweep(config, io);
  std::size_t reliable = 0;
  for (bool r : s.spectrum.reliable) reliable += r ? 1 : 0;
  io.out << s.spectrum.size() << " energies (" << reliable << " reliable), R spans "
         << io::show(decades_spanned(s.spectrum)) << " decades\n";
  if (s.oracle) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.spectrum.size(); ++i) {
      if (!s.spectrum.reliable[i] || !(s.oracle->spectrum.R[i] > 0.0)) continue;
      worst = std::max(worst, std::abs(s.spectrum.R[i] / s.oracle->spectrum.R[i] - 1.0));
    }
    io.out << "max relative deviation from oracle = " << io::show(worst) << '\n';
  }
  return exit_ok;
}

inline int cmd_dips(const RunConfig& config, Streams io = {}) {
  const SweepOutcome s = run_sweep(config, io);
  const std::vector<Dip> dips = detect_dips(s.spectrum, config.sweep.prominence);
  auto csv = io::open_output(std::filesystem::path(config.run.output) / "dips.csv");
  io::write_dips_csv(csv, dips);
  io.out << dips.size() << " dip(s)";
  for (const Dip& d : dips) io.out << "  E=" << io::show(d.energy) << " R=" << io::show(d.R);
  io.out << '\n';
  return exit_ok;
}

/// Runs `fn` and maps library errors onto the exit-code contract.
template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err = std::cerr) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const NumericalAbort& e) {
    err << "numerical abort: " << e.what() << '\n';
    return exit_numerical;
  } catch (const NotScattered& e) {
    err << "numerical abort: " << e.what() << '\n';
    return exit_numerical;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return exit_config_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_config_error;
  }
}

}  // namespace pqsim
