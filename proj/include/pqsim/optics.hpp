#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pqsim/error.hpp"
#include "pqsim/field.hpp"
#include "pqsim/fourier.hpp"
#include "pqsim/potential.hpp"

namespace pqsim {

/// Scale bundle of the quantum -> optical mapping.
///
/// Positions map as xi = s x (um), propagation length as z = 2 w s^2 t, and the
/// optical k-vector is k_opt = 2 m w so that both the kinetic and the potential
/// phases per step coincide on the two sides.
class OpticalScales {
 public:
  OpticalScales(double s_um_per_bohr, double lambda_um, double mass_au)
      : s_(s_um_per_bohr), lambda_(lambda_um), mass_(mass_au) {
    if (!(s_ > 0.0) || !(lambda_ > 0.0) || !(mass_ > 0.0)) {
      throw InvalidArgument("optical scales need s > 0, lambda > 0, m > 0");
    }
    w_ = 2.0 * std::numbers::pi / lambda_;
    k_opt_ = 2.0 * mass_ * w_;
  }

  double s() const noexcept { return s_; }
  double lambda() const noexcept { return lambda_; }
  double mass() const noexcept { return mass_; }
  /// 2 pi / lambda, rad/um
  double w() const noexcept { return w_; }
  /// 2 m w, rad/um
  double k_opt() const noexcept { return k_opt_; }
  /// dz/dt = 2 w s^2, um per atomic time unit
  double z_per_t() const noexcept { return 2.0 * w_ * s_ * s_; }

  friend bool operator==(const OpticalScales& a, const OpticalScales& b) noexcept {
    return a.s_ == b.s_ && a.lambda_ == b.lambda_ && a.mass_ == b.mass_;
  }

 private:
  double s_;
  double lambda_;
  double mass_;
  double w_ = 0.0;
  double k_opt_ = 0.0;
};

struct IndexProfile {
  Grid1D grid;
  std::vector<double> n;
  double n_max = 1.0;
  OpticalScales scales;
};

/// 1 - n^2 = V / (2 m s^2 w^2).
inline double index_from_potential(double v, const OpticalScales& scales) {
  const double arg = 1.0 - v / (2.0 * scales.mass() * scales.s() * scales.s() *
                                scales.w() * scales.w());
  if (!(arg > 0.0)) {
    throw InvalidArgument("potential value " + std::to_string(v) +
                          " gives a non-positive n^2 (unphysical index)");
  }
  return std::sqrt(arg);
}

/// n_max = sqrt(1 - V_min / (2 m s^2 w^2)).
inline double max_index(double v_min, const OpticalScales& scales) {
  return index_from_potential(v_min, scales);
}

/// Index profile n(xi) = sqrt(1 - V(xi/s) / (2 m s^2 w^2)) on a micron grid.
inline IndexProfile index_profile(const PotentialModel& model, const OpticalScales& scales,
                                  const Grid1D& grid_um) {
  if (grid_um.unit() != UnitTag::micron) {
    throw InvalidArgument("index profiles are sampled on micron grids");
  }
  const auto xi = grid_um.positions();
  std::vector<double> n(xi.size());
  for (std::size_t j = 0; j < xi.size(); ++j) {
    n[j] = index_from_potential(eval_potential(model, xi[j] / scales.s()), scales);
  }
  const double n_max = *std::max_element(n.begin(), n.end());
  return IndexProfile{grid_um, std::move(n), n_max, scales};
}

/// V_eff(xi) = (k_opt / 2) (1 - n^2(xi)).
inline std::vector<double> effective_potential(const IndexProfile& profile) {
  const double half_k = 0.5 * profile.scales.k_opt();
  std::vector<double> v(profile.n.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = half_k * (1.0 - profile.n[j] * profile.n[j]);
  return v;
}

/// The quantum potential whose optical image is `v_eff`: V = 2 w s^2 V_eff.
inline std::vector<double> quantum_potential(const std::vector<double>& v_eff,
                                             const OpticalScales& scales) {
  std::vector<double> v(v_eff.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = scales.z_per_t() * v_eff[j];
  return v;
}

/// Optical counterpart of a quantum run. The boundary field carries the same
/// complex values as the quantum initial field; its norm in micron measure
/// is norm_scale (= s) times the quantum norm.
struct OpticalRun {
  Grid1D grid;
  double z_max = 0.0;
  WaveField boundary;
  double amplitude_scale = 1.0;
  double norm_scale = 1.0;
};

inline OpticalRun to_optical(const WaveField& quantum_initial, double t_max,
                             const OpticalScales& scales) {
  if (quantum_initial.unit() != UnitTag::atomic) {
    throw InvalidArgument("to_optical expects an atomic-unit field");
  }
  Grid1D grid_um = scaled_grid(quantum_initial.grid(), scales.s(), UnitTag::micron);
  std::vector<Complex> values(quantum_initial.values().begin(), quantum_initial.values().end());
  WaveField boundary(grid_um, std::move(values));
  return OpticalRun{grid_um, scales.z_per_t() * t_max, std::move(boundary), 1.0, scales.s()};
}

/// Position and time maps.
inline double optical_position(double x_au, const OpticalScales& scales) { return scales.s() * x_au; }
inline double optical_length(double t_au, const OpticalScales& scales) { return scales.z_per_t() * t_au; }

/// kappa = E / (2 w s^2). The stationary mode is U(x) exp(i kappa z); the sign
/// of kappa follows the sign of E, so kappa >= 0 for every E >= 0.
inline double kappa_of_energy(double energy_au, const OpticalScales& scales) {
  return energy_au / scales.z_per_t();
}

inline double energy_of_kappa(double kappa, const OpticalScales& scales) {
  return kappa * scales.z_per_t();
}

/// k_x = sqrt(2 k_opt kappa).
inline double transverse_wavevector(double kappa, const OpticalScales& scales) {
  if (kappa < 0.0) throw InvalidArgument("transverse_wavevector needs kappa >= 0");
  return std::sqrt(2.0 * scales.k_opt() * kappa);
}

struct FeasibilityLimits {
  double n_material_max = 1.6;
  /// um
  double fabrication_resolution = 0.1;
  double max_divergence = 0.1;
  /// smallest feature must exceed this many wavelengths
  double feature_wavelengths = 4.0;
};

struct FeasibilityReport {
  double n_max = 1.0;
  bool n_max_ok = true;
  /// (max n - min n) / max |dn/dxi|, um; +inf for a flat profile
  double feature_size = std::numeric_limits<double>::infinity();
  double feature_limit = 0.0;
  bool feature_ok = true;
  std::optional<double> divergence;
  std::optional<double> k_x_99;
  bool divergence_ok = true;
  /// largest |n(xi + res) - n(xi)| over the profile
  double max_index_step = 0.0;

  bool all_ok() const noexcept { return n_max_ok && feature_ok && divergence_ok; }
};

/// Smallest K with sum_{|k_j| <= K} |psi~_j|^2 >= fraction * total.
inline double spectral_quantile(const WaveField& field, double fraction) {
  const WaveField spec = forward_dft(field);
  const auto k = field.grid().wavenumbers();
  std::vector<std::pair<double, double>> bins(spec.size());
  double total = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    bins[j] = {std::abs(k[j]), std::norm(spec[j])};
    total += bins[j].second;
  }
  std::ranges::sort(bins);
  double acc = 0.0;
  for (const auto& [kk, w] : bins) {
    acc += w;
    if (acc >= fraction * total) return kk;
  }
  return bins.back().first;
}

inline FeasibilityReport feasibility_report(const IndexProfile& profile,
                                            const WaveField* optical_field,
                                            const FeasibilityLimits& limits = {}) {
  FeasibilityReport report;
  report.n_max = profile.n_max;
  report.n_max_ok = profile.n_max <= limits.n_material_max;

  const auto& n = profile.n;
  const double dx = profile.grid.dx();
  const std::size_t size = n.size();
  double max_grad = 0.0;
  for (std::size_t j = 0; j < size; ++j) {
    const double next = n[(j + 1) % size];
    const double prev = n[(j + size - 1) % size];
    max_grad = std::max(max_grad, std::abs(next - prev) / (2.0 * dx));
  }
  const auto [lo, hi] = std::minmax_element(n.begin(), n.end());
  if (max_grad > 0.0) report.feature_size = (*hi - *lo) / max_grad;
  report.feature_limit = limits.feature_wavelengths * profile.scales.lambda();
  report.feature_ok = report.feature_size >= report.feature_limit;

  // |n(xi + res) - n(xi)| by linear interpolation on the periodic grid.
  const double shift = limits.fabrication_resolution / dx;
  const auto whole = static_cast<std::size_t>(std::floor(shift));
  const double frac = shift - static_cast<double>(whole);
  for (std::size_t j = 0; j < size; ++j) {
    const double a = n[(j + whole) % size];
    const double b = n[(j + whole + 1) % size];
    report.max_index_step = std::max(report.max_index_step, std::abs((1.0 - frac) * a + frac * b - n[j]));
  }

  if (optical_field != nullptr) {
    const double k99 = spectral_quantile(*optical_field, 0.99);
    report.k_x_99 = k99;
    report.divergence = k99 / profile.scales.k_opt();
    report.divergence_ok = *report.divergence <= limits.max_divergence;
  }
  return report;
}

}  // namespace pqsim
