#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pqsim/error.hpp"
#include "pqsim/field.hpp"
#include "pqsim/fourier.hpp"

namespace pqsim {

/// Complex absorbing layer: -i * strength * d^4 on the outer `width_fraction`
/// of the domain at each edge, d in [0, 1] the depth into the layer.
struct AbsorbingLayer {
  double strength = 0.0;
  double width_fraction = 0.1;
  friend bool operator==(const AbsorbingLayer&, const AbsorbingLayer&) = default;
};

/// Discretized evolution i d/dtau psi = -A d^2/dx^2 psi + W(x) psi.
///
/// Schroedinger: A = 1/(2m), W = V, tau = t (atomic units).
/// Paraxial:     A = 1/(2k), W = V_eff, tau = z.
/// A negative d_tau runs the evolution backwards.
struct EvolutionSpec {
  double kinetic_coeff = 0.5;
  std::vector<double> potential;
  double d_tau = 1e-3;
  std::size_t n_steps = 1;
  /// 0 keeps only tau = 0 and the final state.
  std::size_t snapshot_stride = 0;
  std::optional<AbsorbingLayer> cap;
};

struct Snapshot {
  double tau = 0.0;
  std::size_t step = 0;
  WaveField field;
};

struct PropagationResult {
  WaveField final;
  std::vector<Snapshot> snapshots;
  /// norm_squared after each step, index 0 is the initial state.
  std::vector<double> norm_history;
  std::vector<std::string> warnings;
};

/// Phase advanced by the fastest representable mode in one step.
inline double kinetic_phase_per_step(double kinetic_coeff, const Grid1D& grid, double d_tau) {
  return kinetic_coeff * grid.k_max() * grid.k_max() * std::abs(d_tau);
}

/// Validates `spec` against `grid`. Throws on hard violations, returns warnings.
inline std::vector<std::string> check_spec(const EvolutionSpec& spec, const Grid1D& grid) {
  std::vector<std::string> warnings;
  if (!(spec.kinetic_coeff > 0.0) || !std::isfinite(spec.kinetic_coeff)) {
    throw InvalidArgument("kinetic coefficient must be positive");
  }
  if (spec.potential.size() != grid.size()) {
    throw InvalidArgument("potential length " + std::to_string(spec.potential.size()) +
                          " does not match grid size " + std::to_string(grid.size()));
  }
  if (!std::ranges::all_of(spec.potential, [](double w) { return std::isfinite(w); })) {
    throw InvalidArgument("potential contains non-finite values");
  }
  if (spec.d_tau == 0.0 || !std::isfinite(spec.d_tau)) {
    throw InvalidArgument("step size must be finite and nonzero");
  }
  const double phase = kinetic_phase_per_step(spec.kinetic_coeff, grid, spec.d_tau);
  if (phase >= std::numbers::pi) {
    throw InvalidArgument("step too large: A k_max^2 d_tau = " + std::to_string(phase) +
                          " >= pi");
  }
  if (phase > std::numbers::pi / 4.0) {
    warnings.push_back("kinetic phase per step A k_max^2 d_tau = " + std::to_string(phase) +
                       " exceeds pi/4");
  }
  if (spec.cap) {
    if (!(spec.cap->strength >= 0.0) || !(spec.cap->width_fraction > 0.0) ||
        !(spec.cap->width_fraction < 0.5)) {
      throw InvalidArgument("absorbing layer needs strength >= 0 and 0 < width_fraction < 0.5");
    }
  }
  return warnings;
}

/// Largest step with A k_max^2 d_tau <= pi/4 and max|W| d_tau <= 0.01.
inline double auto_step(double kinetic_coeff, std::span<const double> potential,
                        const Grid1D& grid) {
  double step = (std::numbers::pi / 4.0) / (kinetic_coeff * grid.k_max() * grid.k_max());
  double w_max = 0.0;
  for (double w : potential) w_max = std::max(w_max, std::abs(w));
  if (w_max > 0.0) step = std::min(step, 0.01 / w_max);
  return step;
}

struct StepPlan {
  double d_tau = 0.0;
  std::size_t n_steps = 0;
};

/// Smallest step count whose uniform step does not exceed `max_step` and lands
/// exactly on `tau_max`.
inline StepPlan plan_steps(double tau_max, double max_step) {
  if (!(tau_max > 0.0) || !(max_step > 0.0)) {
    throw InvalidArgument("plan_steps needs positive duration and step");
  }
  const auto n = static_cast<std::size_t>(std::ceil(tau_max / max_step * (1.0 - 1e-12)));
  const std::size_t steps = std::max<std::size_t>(n, 1);
  return {tau_max / static_cast<double>(steps), steps};
}

inline EvolutionSpec make_quantum_spec(double mass, std::vector<double> potential, double dt,
                                       std::size_t n_steps) {
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  EvolutionSpec spec;
  spec.kinetic_coeff = 1.0 / (2.0 * mass);
  spec.potential = std::move(potential);
  spec.d_tau = dt;
  spec.n_steps = n_steps;
  return spec;
}

inline EvolutionSpec make_optical_spec(double k_opt, std::vector<double> effective_potential,
                                       double dz, std::size_t n_steps) {
  if (!(k_opt > 0.0)) throw InvalidArgument("optical k-vector must be positive");
  EvolutionSpec spec;
  spec.kinetic_coeff = 1.0 / (2.0 * k_opt);
  spec.potential = std::move(effective_potential);
  spec.d_tau = dz;
  spec.n_steps = n_steps;
  return spec;
}

/// Strang splitting, potential first:
///   exp(-i W dtau/2) IDFT exp(-i A k^2 dtau) DFT exp(-i W dtau/2).
/// Consecutive half-potential factors are fused into one full factor.
class SplitOperatorPropagator {
 public:
  SplitOperatorPropagator(Grid1D grid, const EvolutionSpec& spec)
      : grid_(std::move(grid)), spec_(spec), fft_(grid_.size()) {
    warnings_ = check_spec(spec_, grid_);
    const std::size_t n = grid_.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto k = grid_.wavenumbers();
    kinetic_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      kinetic_[j] = std::polar(inv_n, -spec_.kinetic_coeff * k[j] * k[j] * spec_.d_tau);
    }
    const std::vector<double> gamma = absorption_profile();
    half_.resize(n);
    full_.resize(n);
    half_weight_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double damp = std::exp(-0.5 * gamma[j] * std::abs(spec_.d_tau));
      half_[j] = std::polar(damp, -0.5 * spec_.potential[j] * spec_.d_tau);
      full_[j] = std::polar(damp * damp, -spec_.potential[j] * spec_.d_tau);
      half_weight_[j] = damp * damp;
    }
    absorbing_ = std::ranges::any_of(gamma, [](double g) { return g > 0.0; });
  }

  const Grid1D& grid() const noexcept { return grid_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// One full Strang step.
  WaveField step(const WaveField& field) {
    load(field);
    auto buf = fft_.buffer();
    multiply(buf, half_);
    kinetic_step();
    multiply(buf, half_);
    return WaveField(grid_, std::vector<Complex>(buf.begin(), buf.end()));
  }

  PropagationResult run(const WaveField& initial) {
    if (spec_.n_steps == 0) throw InvalidArgument("n_steps must be >= 1");
    load(initial);
    auto buf = fft_.buffer();
    const double dx = grid_.dx();

    PropagationResult result{initial, {}, {}, warnings_};
    result.norm_history.reserve(spec_.n_steps + 1);
    result.norm_history.push_back(norm_squared(initial));
    result.snapshots.push_back({0.0, 0, initial});

    multiply(buf, half_);
    for (std::size_t s = 1; s <= spec_.n_steps; ++s) {
      kinetic_step();
      // buf now lacks the closing half-potential factor of step s.
      double norm = 0.0;
      if (absorbing_) {
        for (std::size_t j = 0; j < buf.size(); ++j) norm += std::norm(buf[j]) * half_weight_[j];
      } else {
        for (const auto& v : buf) norm += std::norm(v);
      }
      norm *= dx;
      if (!std::isfinite(norm)) throw NumericalAbort("non-finite field during propagation", s);
      result.norm_history.push_back(norm);

      const bool last = s == spec_.n_steps;
      const bool snap = last || (spec_.snapshot_stride > 0 && s % spec_.snapshot_stride == 0);
      if (snap) {
        std::vector<Complex> values(buf.begin(), buf.end());
        for (std::size_t j = 0; j < values.size(); ++j) values[j] *= half_[j];
        WaveField state(grid_, std::move(values));
        if (last) result.final = state;
        result.snapshots.push_back({static_cast<double>(s) * spec_.d_tau, s, std::move(state)});
      }
      if (!last) multiply(buf, full_);
    }
    return result;
  }

 private:
  void load(const WaveField& field) {
    if (!field.grid().same_as(grid_)) throw InvalidArgument("field grid does not match propagator");
    if (field.representation() != Representation::position) {
      throw InvalidArgument("propagation expects a position-space field");
    }
    std::ranges::copy(field.values(), fft_.buffer().begin());
  }

  void kinetic_step() {
    fft_.forward();
    multiply(fft_.buffer(), kinetic_);
    fft_.backward();
  }

  static void multiply(std::span<Complex> buf, const std::vector<Complex>& factor) {
    for (std::size_t j = 0; j < buf.size(); ++j) buf[j] *= factor[j];
  }

  std::vector<double> absorption_profile() const {
    std::vector<double> gamma(grid_.size(), 0.0);
    if (!spec_.cap || spec_.cap->strength == 0.0) return gamma;
    const double width = spec_.cap->width_fraction * grid_.length();
    const auto x = grid_.positions();
    for (std::size_t j = 0; j < gamma.size(); ++j) {
      const double inner = std::max(grid_.x_min() + width - x[j], x[j] - (grid_.x_max() - width));
      if (inner > 0.0) {
        const double d = std::min(inner / width, 1.0);
        gamma[j] = spec_.cap->strength * d * d * d * d;
      }
    }
    return gamma;
  }

  Grid1D grid_;
  EvolutionSpec spec_;
  FourierTransform fft_;
  std::vector<Complex> kinetic_;
  std::vector<Complex> half_;
  std::vector<Complex> full_;
  std::vector<double> half_weight_;
  bool absorbing_ = false;
  std::vector<std::string> warnings_;
};

inline WaveField strang_step(const WaveField& field, const EvolutionSpec& spec) {
  SplitOperatorPropagator propagator(field.grid(), spec);
  return propagator.step(field);
}

inline PropagationResult propagate(const WaveField& initial, const EvolutionSpec& spec) {
  SplitOperatorPropagator propagator(initial.grid(), spec);
  return propagator.run(initial);
}

}  // namespace pqsim
