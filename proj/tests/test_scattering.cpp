#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "pqsim/packet.hpp"
#include "pqsim/potential.hpp"
#include "pqsim/scattering.hpp"
#include "pqsim/split_operator.hpp"
#include "support/oracles.hpp"

using namespace pqsim;

namespace {

struct Scatter {
  WaveField initial;
  WaveField final;
};

Scatter scatter(const PotentialModel& model, const Grid1D& g, const GaussianPacketSpec& packet, double t_max) {
  const auto v = sample_potential(model, g);
  const WaveField f0 = gaussian_packet(packet, g);
  const StepPlan plan = plan_steps(t_max, auto_step(1.0 / (2.0 * packet.mass), v, g));
  return {f0, propagate(f0, make_quantum_spec(packet.mass, v, plan.d_tau, plan.n_steps)).final};
}

ReflectionSpectrum synthetic(std::vector<double> r) {
  ReflectionSpectrum s;
  s.method = ReflectionMethod::momentum_sign;
  for (std::size_t i = 0; i < r.size(); ++i) s.energies.push_back(1.0 + 0.1 * static_cast<double>(i));
  s.R = std::move(r);
  s.reliable.assign(s.R.size(), true);
  return s;
}

}  // namespace

TEST(Oracle, FreeSpaceDoesNotReflect) {
  const std::vector<double> v(100, 0.0);
  for (double e : {0.1, 1.0, 7.5}) {
    const StationaryResult r = stationary_reflection(v, 0.01, 0.5, e);
    EXPECT_LT(r.R, 1e-28);
    EXPECT_NEAR(r.T, 1.0, 1e-14);
  }
}

TEST(Oracle, SharpStepMatchesClosedForm) {
  const auto v = sample_slices(step_potential(1.0, 0.0), -1.0, 1.0, 0.01);
  const StationaryResult r = stationary_reflection(v, 0.01, 0.5, 2.0);
  EXPECT_NEAR(r.R, 0.029437, 1e-6);
  EXPECT_NEAR(r.R, oracle::sharp_step_reflection(0.5, 1.0, 2.0), 1e-13);
  EXPECT_LT(r.flux_error, 1e-12);
}

TEST(Oracle, SquareBarrierMatchesClosedForm) {
  // 2 au wide, 3 au high barrier represented exactly by slices of 0.01 au.
  std::vector<double> v(400, 0.0);
  for (std::size_t i = 100; i < 300; ++i) v[i] = 3.0;
  for (double e : {3.2, 4.0, 5.5, 9.0}) {
    const StationaryResult r = stationary_reflection(v, 0.01, 0.5, e);
    EXPECT_NEAR(r.R, oracle::square_barrier_reflection(0.5, 3.0, 2.0, e), 1e-12) << "E = " << e;
    EXPECT_LT(r.flux_error, 1e-12);
  }
}

TEST(Oracle, FermiStepConvergesToClosedForm) {
  // tanh step of width w == Fermi step with a = w / 2.
  const PotentialModel model = step_potential(1.0, 0.0, 0.4);
  const auto v = sample_slices(model, -15.0, 15.0, 0.002);
  for (double e : {1.2, 2.0, 4.0}) {
    const double expected = oracle::smooth_step_reflection(0.5, 1.0, 0.2, e);
    const StationaryResult r = stationary_reflection(v, 0.002, 0.5, e);
    EXPECT_NEAR(r.R / expected, 1.0, 1e-5) << "E = " << e;
  }
}

TEST(Oracle, SexticWellAgreesWithOdeIntegration) {
  const PotentialModel model = smoothed_power(6, 10.0);
  const auto v = sample_slices(model, -3.5, 3.5, 1e-3);
  auto pot = [&](double x) { return eval_potential(model, x); };
  for (double e : {0.5, 1.0, 3.0, 6.0}) {
    const StationaryResult r = stationary_reflection(v, 1e-3, 0.5, e);
    const double ode = oracle::ode_reflection(pot, -10.0, -10.0, -3.5, 3.5, 0.5, e, 20000);
    EXPECT_NEAR(r.R / ode, 1.0, 1e-4) << "E = " << e;
    EXPECT_LT(r.flux_error, 1e-10);
  }
}

TEST(Oracle, SexticWellHasReflectionlessEnergy) {
  // Fine scan around the lowest zero of R; the continuum zero sits at 1.48858.
  const PotentialModel model = smoothed_power(6, 10.0);
  const auto energies = energy_grid(1.45, 1.53, 161, false);
  const OracleSpectrum s = oracle_spectrum(model, -3.5, 3.5, 1e-3, 0.5, energies);
  std::size_t best = 0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (s.spectrum.R[i] < s.spectrum.R[best]) best = i;
    EXPECT_LT(s.flux_error[i], 1e-10);
  }
  EXPECT_NEAR(energies[best], 1.48858, 1e-3);
  EXPECT_LT(s.spectrum.R[best], 1e-6);
}

TEST(Oracle, Preconditions) {
  std::vector<double> v(10, 0.0);
  EXPECT_THROW(stationary_reflection(v, 0.1, 0.5, -1.0), InvalidArgument);
  v[1] = 1.0;
  EXPECT_THROW(stationary_reflection(v, 0.1, 0.5, 2.0), InvalidArgument);
  std::vector<double> step(10, 0.0);
  for (std::size_t i = 5; i < 10; ++i) step[i] = 3.0;
  EXPECT_THROW(stationary_reflection(step, 0.1, 0.5, 2.0), InvalidArgument);
  EXPECT_THROW(stationary_reflection(std::vector<double>(1, 0.0), 0.1, 0.5, 2.0), InvalidArgument);
}

TEST(Wavepacket, FreeParticleDoesNotReflect) {
  const Grid1D g = make_grid(-60.0, 60.0, 1024);
  const Scatter run = scatter(ZeroPotential{}, g, {0.5, -10.0, 3.5, std::numbers::sqrt2}, 5.0);
  ReflectionOptions opt;
  opt.support = std::pair{-1.0, 1.0};
  const auto energies = energy_grid(10.0, 14.0, 9, false);
  for (auto method : {ReflectionMethod::momentum_sign, ReflectionMethod::energy_filter}) {
    const ReflectionSpectrum s = reflection_spectrum(run.final, run.initial, 0.5, energies, method, opt);
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_TRUE(s.reliable[i]);
      EXPECT_LT(s.R[i], 1e-10);
    }
  }
}

TEST(Wavepacket, HighStepReflectsEverything) {
  const Grid1D g = make_grid(-80.0, 80.0, 2048);
  const Scatter run = scatter(step_potential(50.0, 0.0), g, {0.5, -20.0, 3.5, std::numbers::sqrt2}, 8.0);
  ReflectionOptions opt;
  opt.left_level = 0.0;
  opt.right_level = 50.0;
  opt.support = std::pair{-1.0, 1.0};
  const auto energies = energy_grid(10.0, 14.0, 9, false);
  for (auto method : {ReflectionMethod::momentum_sign, ReflectionMethod::energy_filter}) {
    const ReflectionSpectrum s = reflection_spectrum(run.final, run.initial, 0.5, energies, method, opt);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s.R[i], 1.0, 1e-6);
  }
}

TEST(Wavepacket, StepAgreesWithClosedFormAndMethodsAgree) {
  const Grid1D g = make_grid(-160.0, 160.0, 4096);
  const Scatter run = scatter(step_potential(1.0, 0.0, 1e-4), g, {0.5, -60.0, std::numbers::sqrt2, 6.0}, 56.0);
  ReflectionOptions opt;
  opt.right_level = 1.0;
  opt.support = std::pair{-1.0, 1.0};
  const std::vector<double> energies{1.8, 2.0, 2.2};
  const auto a = reflection_spectrum(run.final, run.initial, 0.5, energies, ReflectionMethod::momentum_sign, opt);
  const auto b = reflection_spectrum(run.final, run.initial, 0.5, energies, ReflectionMethod::energy_filter, opt);
  EXPECT_NEAR(a.R[1], 0.029437, 0.01 * 0.029437);
  for (std::size_t i = 0; i < energies.size(); ++i) {
    EXPECT_NEAR(a.R[i] / oracle::sharp_step_reflection(0.5, 1.0, energies[i]), 1.0, 0.01);
    EXPECT_NEAR(b.R[i] / oracle::sharp_step_reflection(0.5, 1.0, energies[i]), 1.0, 0.01);
  }
  EXPECT_LE(compare_spectra(a, b).max_abs_log10_ratio, 0.05);
}

TEST(Wavepacket, UnscatteredFieldIsRejected) {
  const Grid1D g = make_grid(-60.0, 60.0, 1024);
  const Scatter run = scatter(smoothed_power(6, 10.0), g, {0.5, -7.0, 3.5, std::numbers::sqrt2}, 0.5);
  ReflectionOptions opt;
  opt.left_level = opt.right_level = -10.0;
  opt.support = std::pair{-3.0, 3.0};
  const std::vector<double> energies{1.0, 2.0};
  try {
    reflection_spectrum(run.final, run.initial, 0.5, energies, ReflectionMethod::momentum_sign, opt);
    FAIL() << "expected NotScattered";
  } catch (const NotScattered& e) {
    EXPECT_GT(e.residual(), 1e-6);
  }
}

TEST(Wavepacket, EnergiesOutsidePacketAreUnreliable) {
  const Grid1D g = make_grid(-60.0, 60.0, 1024);
  const Scatter run = scatter(ZeroPotential{}, g, {0.5, -20.0, 3.5, std::numbers::sqrt2}, 1.0);
  const std::vector<double> energies{0.5, 12.25, 60.0};
  const auto s = reflection_spectrum(run.final, run.initial, 0.5, energies, ReflectionMethod::momentum_sign);
  EXPECT_FALSE(s.reliable[0]);
  EXPECT_TRUE(s.reliable[1]);
  EXPECT_FALSE(s.reliable[2]);
}

TEST(Wavepacket, RejectsBadEnergyGrids) {
  const Grid1D g = make_grid(-10.0, 10.0, 64);
  const WaveField f = gaussian_packet({0.5, 0.0, 1.0, 1.0}, g);
  const std::vector<double> unsorted{1.0, 0.5};
  const std::vector<double> negative{-1.0, 1.0};
  EXPECT_THROW(reflection_spectrum(f, f, 0.5, unsorted, ReflectionMethod::momentum_sign), InvalidArgument);
  EXPECT_THROW(reflection_spectrum(f, f, 0.5, negative, ReflectionMethod::momentum_sign), InvalidArgument);
  const std::vector<double> ok{1.0};
  EXPECT_THROW(reflection_spectrum(f, f, 0.5, ok, ReflectionMethod::stationary_oracle), InvalidArgument);
}

TEST(Dips, MonotoneSpectrumHasNone) {
  std::vector<double> r;
  for (int i = 0; i < 32; ++i) r.push_back(std::pow(10.0, -0.2 * i));
  EXPECT_TRUE(detect_dips(synthetic(r), 2.0).empty());
}

TEST(Dips, ProminentDipIsFound) {
  std::vector<double> r(32, 1e-2);
  r[10] = 1e-5;
  r[20] = 3e-3;  // shallow, below 2 decades
  const auto dips = detect_dips(synthetic(r), 2.0);
  ASSERT_EQ(dips.size(), 1u);
  EXPECT_DOUBLE_EQ(dips[0].energy, 2.0);
  EXPECT_NEAR(dips[0].prominence, 3.0, 1e-12);
  EXPECT_EQ(detect_dips(synthetic(r), 0.5).size(), 2u);
}

TEST(Dips, ProminenceUsesLowerFlank) {
  // Falling background: the dip's right flank is lower than its left.
  std::vector<double> r;
  for (int i = 0; i < 32; ++i) r.push_back(std::pow(10.0, -0.1 * i));
  r[15] = 1e-4;  // neighbours ~3e-2; right flank max ~2.5e-2
  const auto dips = detect_dips(synthetic(r), 2.0);
  ASSERT_EQ(dips.size(), 1u);
  EXPECT_NEAR(dips[0].prominence, std::log10(r[16] / 1e-4), 1e-12);
}

TEST(Dips, NeedsEnoughReliablePoints) {
  EXPECT_THROW(detect_dips(synthetic(std::vector<double>(8, 0.1)), 2.0), InvalidArgument);
}

TEST(Compare, SelfAndDisjoint) {
  std::vector<double> r;
  for (int i = 0; i < 20; ++i) r.push_back(0.5 / (1 + i));
  const auto s = synthetic(r);
  EXPECT_EQ(compare_spectra(s, s).max_abs_log10_ratio, 0.0);
  auto a = s;
  auto b = s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a.reliable[i] = i % 2 == 0;
    b.reliable[i] = i % 2 == 1;
  }
  EXPECT_THROW(compare_spectra(a, b), InvalidArgument);
  auto c = s;
  c.R[3] *= 1.1;
  EXPECT_NEAR(compare_spectra(s, c).max_abs_log10_ratio, std::log10(1.1), 1e-12);
}

TEST(EnergyGrid, LinearAndLogarithmic) {
  const auto lin = energy_grid(0.5, 6.0, 12, false);
  EXPECT_DOUBLE_EQ(lin.front(), 0.5);
  EXPECT_DOUBLE_EQ(lin.back(), 6.0);
  EXPECT_NEAR(lin[1] - lin[0], 0.5, 1e-15);
  const auto lg = energy_grid(0.1, 10.0, 3, true);
  EXPECT_NEAR(lg[1], 1.0, 1e-14);
  EXPECT_THROW(energy_grid(0.0, 1.0, 4, false), InvalidArgument);
  EXPECT_THROW(energy_grid(1.0, 2.0, 1, false), InvalidArgument);
}

TEST(Method, NamesRoundTrip) {
  for (auto m : {ReflectionMethod::momentum_sign, ReflectionMethod::energy_filter, ReflectionMethod::stationary_oracle}) {
    EXPECT_EQ(parse_reflection_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_reflection_method("fourier"), InvalidArgument);
}
