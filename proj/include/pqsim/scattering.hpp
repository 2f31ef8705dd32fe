#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqsim/error.hpp"
#include "pqsim/field.hpp"
#include "pqsim/fourier.hpp"
#include "pqsim/parallel.hpp"
#include "pqsim/potential.hpp"

namespace pqsim {

enum class ReflectionMethod { momentum_sign, energy_filter, stationary_oracle };

inline const char* to_string(ReflectionMethod method) {
  switch (method) {
    case ReflectionMethod::momentum_sign: return "momentum_sign";
    case ReflectionMethod::energy_filter: return "energy_filter";
    case ReflectionMethod::stationary_oracle: return "stationary_oracle";
  }
  return "unknown";
}

inline ReflectionMethod parse_reflection_method(const std::string& name) {
  if (name == "momentum_sign") return ReflectionMethod::momentum_sign;
  if (name == "energy_filter") return ReflectionMethod::energy_filter;
  if (name == "stationary_oracle") return ReflectionMethod::stationary_oracle;
  throw InvalidArgument("unknown reflection method '" + name + "'");
}

struct ReflectionSpectrum {
  std::vector<double> energies;
  std::vector<double> R;
  std::vector<bool> reliable;
  ReflectionMethod method = ReflectionMethod::momentum_sign;

  std::size_t size() const noexcept { return energies.size(); }
  std::size_t reliable_count() const noexcept {
    return static_cast<std::size_t>(std::ranges::count(reliable, true));
  }
};

struct ReflectionOptions {
  /// Asymptotic potential on each side; the channel momentum is
  /// sqrt(2 m (E - level)).
  double left_level = 0.0;
  double right_level = 0.0;
  /// Boundary between the reflected (x < split) and transmitted regions.
  double split = 0.0;
  /// Where the potential differs from its asymptotes. When set, the final
  /// field must hold less than scattered_tolerance of its norm there.
  std::optional<std::pair<double, double>> support;
  double scattered_tolerance = 1e-6;
  double reliability_floor = 1e-6;
  unsigned threads = 1;
};

namespace detail {

inline void check_energy_grid(std::span<const double> energies) {
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (!std::isfinite(energies[i]) || !(energies[i] > 0.0)) {
      throw InvalidArgument("energies must be finite and positive");
    }
    if (i > 0 && !(energies[i] > energies[i - 1])) {
      throw InvalidArgument("energies must be strictly increasing");
    }
  }
}

inline double channel_momentum(double mass, double energy, double level) {
  const double kinetic = energy - level;
  return kinetic > 0.0 ? std::sqrt(2.0 * mass * kinetic) : 0.0;
}

inline void check_bounds(double r, double energy) {
  if (!(r >= -1e-12 && r <= 1.0 + 1e-12)) {
    throw NumericalAbort("reflection coefficient " + std::to_string(r) + " outside [0,1] at E=" +
                             std::to_string(energy),
                         0);
  }
}

}  // namespace detail

/// Energy-resolved reflection from a scattered wavepacket.
///
/// momentum_sign: R = rho(-k_L)/k_L / (rho(-k_L)/k_L + rho(+k_R)/k_R) with
///   rho(k) = |psi~_final(k)|^2, i.e. the reflected share of the density per
///   unit energy.
/// energy_filter: the density at energy E of the field restricted to the
///   reflected region x < split, over the density at E of the whole field
///   (both momentum signs, each region with its own channel momentum).
///
/// `mass` is the inertia of the kinetic term (m on the quantum side, k_opt on
/// the optical side, where `energies` are then propagation constants kappa).
/// Spectral amplitudes are continuous Fourier transforms at the exact k(E).
inline ReflectionSpectrum reflection_spectrum(const WaveField& final_field,
                                              const WaveField& initial_field, double mass,
                                              std::span<const double> energies,
                                              ReflectionMethod method,
                                              const ReflectionOptions& options = {}) {
  if (method == ReflectionMethod::stationary_oracle) {
    throw InvalidArgument("reflection_spectrum computes wavepacket methods only");
  }
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  if (!final_field.grid().same_as(initial_field.grid())) {
    throw InvalidArgument("initial and final fields live on different grids");
  }
  detail::check_energy_grid(energies);
  const Grid1D& grid = final_field.grid();
  if (!(options.split > grid.x_min() && options.split < grid.x_max())) {
    throw InvalidArgument("split point outside the grid domain");
  }

  if (options.support) {
    const auto [a, b] = *options.support;
    const double residual = probability_in(final_field, a, b) / norm_squared(final_field);
    if (!(residual < options.scattered_tolerance)) {
      throw NotScattered("final field not fully scattered: " + std::to_string(residual) +
                             " of the norm remains in [" + std::to_string(a) + ", " +
                             std::to_string(b) + "]",
                         residual);
    }
  }

  // Peak initial spectral density, |psi~(k_j)|^2 = dx^2/(2 pi) |FFT_j|^2.
  const WaveField initial_spec = forward_dft(initial_field);
  double peak = 0.0;
  for (const auto& v : initial_spec.values()) peak = std::max(peak, std::norm(v));
  peak *= grid.dx() * static_cast<double>(grid.size()) / (2.0 * std::numbers::pi);

  ReflectionSpectrum out;
  out.method = method;
  out.energies.assign(energies.begin(), energies.end());
  out.R.assign(energies.size(), 0.0);
  std::vector<char> reliable(energies.size(), 0);

  const double lo = grid.x_min();
  const double hi = grid.x_max();
  const double split = options.split;

  parallel_for(energies.size(), options.threads, [&](std::size_t i) {
    const double e = energies[i];
    const double k_left = detail::channel_momentum(mass, e, options.left_level);
    const double k_right = detail::channel_momentum(mass, e, options.right_level);
    if (k_left <= 0.0) return;  // no incident channel: unreliable, R = 0
    reliable[i] = std::norm(spectral_amplitude(initial_field, k_left)) >=
                  options.reliability_floor * peak;

    double r = 0.0;
    if (method == ReflectionMethod::momentum_sign) {
      const double back = std::norm(spectral_amplitude(final_field, -k_left)) / k_left;
      const double forward =
          k_right > 0.0 ? std::norm(spectral_amplitude(final_field, k_right)) / k_right : 0.0;
      r = back + forward > 0.0 ? back / (back + forward) : 0.0;
    } else {
      const double left = (std::norm(spectral_amplitude(final_field, -k_left, lo, split)) +
                           std::norm(spectral_amplitude(final_field, k_left, lo, split))) /
                          k_left;
      const double right =
          k_right > 0.0 ? (std::norm(spectral_amplitude(final_field, k_right, split, hi)) +
                           std::norm(spectral_amplitude(final_field, -k_right, split, hi))) /
                              k_right
                        : 0.0;
      r = left + right > 0.0 ? left / (left + right) : 0.0;
    }
    if (reliable[i]) detail::check_bounds(r, e);
    out.R[i] = std::clamp(r, 0.0, 1.0);
  });
  out.reliable.assign(reliable.begin(), reliable.end());
  return out;
}

struct StationaryResult {
  double R = 0.0;
  double T = 0.0;
  /// |R + T k_out/k_in - 1|
  double flux_error = 0.0;
};

/// Transfer-matrix solution of -(1/2m) psi'' + V psi = E psi for V piecewise
/// constant on slices of width dx. The first and last samples define the
/// asymptotic media; each must match its neighbour to 1e-9.
inline StationaryResult stationary_reflection(std::span<const double> v, double dx, double mass,
                                              double energy) {
  if (v.size() < 2) throw InvalidArgument("stationary_reflection needs >= 2 slices");
  if (!(dx > 0.0) || !(mass > 0.0)) throw InvalidArgument("dx and mass must be positive");
  if (!(energy > 0.0)) throw InvalidArgument("stationary_reflection needs E > 0");
  const double v_left = v.front();
  const double v_right = v.back();
  if (std::abs(v[1] - v_left) > 1e-9 || std::abs(v[v.size() - 2] - v_right) > 1e-9) {
    throw InvalidArgument("potential is not constant at the ends of the sampled support");
  }
  if (!(energy > v_left) || !(energy > v_right)) {
    throw InvalidArgument("energy below the asymptotic potential: no propagating channel");
  }
  using C = std::complex<double>;
  const C i1(0.0, 1.0);
  const double k_in = std::sqrt(2.0 * mass * (energy - v_left));
  const double k_out = std::sqrt(2.0 * mass * (energy - v_right));

  // (psi, psi') transfer through the interior slices; each factor has unit
  // determinant.
  C m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;
  for (std::size_t j = 1; j + 1 < v.size(); ++j) {
    const C q = std::sqrt(C(2.0 * mass * (energy - v[j]), 0.0));
    const C qd = q * dx;
    const C c = std::cos(qd);
    C s_over_q;
    C q_s;
    if (std::abs(qd) < 1e-8) {
      s_over_q = dx * (1.0 - qd * qd / 6.0);
      q_s = q * q * dx;
    } else {
      const C s = std::sin(qd);
      s_over_q = s / q;
      q_s = q * s;
    }
    const C a00 = c * m00 + s_over_q * m10;
    const C a01 = c * m01 + s_over_q * m11;
    const C a10 = -q_s * m00 + c * m10;
    const C a11 = -q_s * m01 + c * m11;
    m00 = a00; m01 = a01; m10 = a10; m11 = a11;
  }
  // Left: psi = e^{ikx} + r e^{-ikx}; right: psi = tau e^{ik'x}.
  const C a = m10 - i1 * k_out * m00;
  const C b = i1 * k_in * m11 + k_in * k_out * m01;
  const C r = -(a + b) / (a - b);
  const C tau = m00 * (1.0 + r) + i1 * k_in * m01 * (1.0 - r);
  StationaryResult result;
  result.R = std::norm(r);
  result.T = std::norm(tau);
  result.flux_error = std::abs(result.R + result.T * k_out / k_in - 1.0);
  return result;
}

struct OracleSpectrum {
  ReflectionSpectrum spectrum;
  std::vector<double> flux_error;
};

/// Transfer-matrix spectrum of `model` sampled at slice midpoints on [a, b).
inline OracleSpectrum oracle_spectrum(const PotentialModel& model, double a, double b,
                                      double slice_width, double mass,
                                      std::span<const double> energies, unsigned threads = 1) {
  detail::check_energy_grid(energies);
  const std::vector<double> v = sample_slices(model, a, b, slice_width);
  OracleSpectrum out;
  out.spectrum.method = ReflectionMethod::stationary_oracle;
  out.spectrum.energies.assign(energies.begin(), energies.end());
  out.spectrum.R.assign(energies.size(), 0.0);
  out.flux_error.assign(energies.size(), 0.0);
  parallel_for(energies.size(), threads, [&](std::size_t i) {
    const StationaryResult r = stationary_reflection(v, slice_width, mass, energies[i]);
    detail::check_bounds(r.R, energies[i]);
    out.spectrum.R[i] = r.R;
    out.flux_error[i] = r.flux_error;
  });
  out.spectrum.reliable.assign(energies.size(), true);
  return out;
}

struct Dip {
  double energy = 0.0;
  double R = 0.0;
  /// decades of log10 R below the lower flanking maximum
  double prominence = 0.0;
};

/// Local minima of log10 R over the reliable points whose topographic
/// prominence is at least `prominence_decades`. On each side the flanking
/// maximum is the highest point reached before the curve drops below the
/// minimum again (or the spectrum ends). Sorted by energy.
inline std::vector<Dip> detect_dips(const ReflectionSpectrum& spectrum, double prominence_decades) {
  std::vector<double> e;
  std::vector<double> logr;
  std::vector<double> r;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    if (!spectrum.reliable[i]) continue;
    e.push_back(spectrum.energies[i]);
    r.push_back(spectrum.R[i]);
    logr.push_back(std::log10(std::max(spectrum.R[i], 1e-300)));
  }
  if (e.size() < 16) {
    throw InvalidArgument("detect_dips needs >= 16 reliable points, got " + std::to_string(e.size()));
  }
  std::vector<Dip> dips;
  for (std::size_t i = 1; i + 1 < e.size(); ++i) {
    if (!(logr[i] < logr[i - 1] && logr[i] <= logr[i + 1])) continue;
    double left_peak = logr[i];
    for (std::size_t j = i; j-- > 0;) {
      if (logr[j] < logr[i]) break;
      left_peak = std::max(left_peak, logr[j]);
    }
    double right_peak = logr[i];
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      if (logr[j] < logr[i]) break;
      right_peak = std::max(right_peak, logr[j]);
    }
    const double prominence = std::min(left_peak, right_peak) - logr[i];
    if (prominence >= prominence_decades) dips.push_back({e[i], r[i], prominence});
  }
  return dips;
}

struct SpectrumComparison {
  double max_abs_log10_ratio = 0.0;
  std::size_t energies_compared = 0;
};

/// max |log10(R_a / R_b)| over points reliable in both, skipping points where
/// both R < 1e-9.
inline SpectrumComparison compare_spectra(const ReflectionSpectrum& a, const ReflectionSpectrum& b) {
  if (a.energies.size() != b.energies.size()) throw InvalidArgument("spectra differ in length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max(std::abs(a.energies[i]), 1.0);
    if (std::abs(a.energies[i] - b.energies[i]) > 1e-12 * scale) {
      throw InvalidArgument("spectra are sampled on different energy grids");
    }
  }
  SpectrumComparison out;
  bool any_reliable = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.reliable[i] || !b.reliable[i]) continue;
    any_reliable = true;
    if (a.R[i] < 1e-9 && b.R[i] < 1e-9) continue;
    double ratio = std::numeric_limits<double>::infinity();
    if (a.R[i] > 0.0 && b.R[i] > 0.0) ratio = std::abs(std::log10(a.R[i] / b.R[i]));
    out.max_abs_log10_ratio = std::max(out.max_abs_log10_ratio, ratio);
    ++out.energies_compared;
  }
  if (!any_reliable) throw InvalidArgument("spectra have disjoint reliable sets");
  return out;
}

/// Energy grid with n points on [e_min, e_max], linear or logarithmic.
inline std::vector<double> energy_grid(double e_min, double e_max, std::size_t n, bool logarithmic) {
  if (!(e_min > 0.0) || !(e_max > e_min) || n < 2) {
    throw InvalidArgument("energy sweep needs 0 < e_min < e_max and n >= 2");
  }
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    e[i] = logarithmic ? e_min * std::pow(e_max / e_min, t) : e_min + t * (e_max - e_min);
  }
  e.back() = e_max;
  return e;
}

}  // namespace pqsim
