#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "pqsim/error.hpp"
#include "pqsim/grid.hpp"

namespace pqsim {

using Complex = std::complex<double>;

enum class Representation { position, wavenumber };

/// Complex amplitude sampled on a Grid1D. Plays the role of both the quantum
/// wavefunction and the optical envelope.
///
/// In the wavenumber representation values[j] belongs to grid.wavenumbers()[j]
/// and is the unitary DFT coefficient (see forward_dft).
class WaveField {
 public:
  WaveField(Grid1D grid, std::vector<Complex> values,
            Representation rep = Representation::position)
      : grid_(std::move(grid)), values_(std::move(values)), rep_(rep) {
    if (values_.size() != grid_.size()) {
      throw InvalidArgument("field length " + std::to_string(values_.size()) +
                            " does not match grid size " + std::to_string(grid_.size()));
    }
    for (const auto& v : values_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw InvalidArgument("field contains non-finite values");
      }
    }
  }

  const Grid1D& grid() const noexcept { return grid_; }
  std::span<const Complex> values() const noexcept { return values_; }
  Representation representation() const noexcept { return rep_; }
  UnitTag unit() const noexcept { return grid_.unit(); }
  std::size_t size() const noexcept { return values_.size(); }
  const Complex& operator[](std::size_t j) const noexcept { return values_[j]; }

  /// Moves the samples out; the field is left empty and must not be used.
  std::vector<Complex> release() && { return std::move(values_); }

 private:
  Grid1D grid_;
  std::vector<Complex> values_;
  Representation rep_;
};

/// sum |psi|^2 dx
inline double norm_squared(const WaveField& field) {
  double sum = 0.0;
  for (const auto& v : field.values()) sum += std::norm(v);
  return sum * field.grid().dx();
}

inline double mean_position(const WaveField& field) {
  const auto x = field.grid().positions();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double rho = std::norm(field[j]);
    num += x[j] * rho;
    den += rho;
  }
  if (den == 0.0) throw InvalidArgument("mean_position of a zero field");
  return num / den;
}

/// sqrt(<x^2> - <x>^2) of |psi|^2.
inline double position_width(const WaveField& field) {
  const double mean = mean_position(field);
  const auto x = field.grid().positions();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double rho = std::norm(field[j]);
    num += (x[j] - mean) * (x[j] - mean) * rho;
    den += rho;
  }
  return std::sqrt(num / den);
}

/// Integral of |psi|^2 over [a, b] by the midpoint rule: sample j owns the cell
/// [x_j - dx/2, x_j + dx/2], partially covered cells contribute their covered
/// fraction, and the cell of x_min wraps around to x_max.
inline double probability_in(const WaveField& field, double a, double b) {
  const Grid1D& grid = field.grid();
  if (!(a < b)) throw InvalidArgument("probability_in requires a < b");
  if (a < grid.x_min() || b > grid.x_max()) {
    throw InvalidArgument("probability_in interval lies outside the grid domain");
  }
  const double dx = grid.dx();
  const double length = grid.length();
  const auto x = grid.positions();
  auto overlap = [&](double lo, double hi) {
    return std::max(0.0, std::min(hi, b) - std::max(lo, a));
  };
  double sum = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double lo = x[j] - 0.5 * dx;
    const double hi = x[j] + 0.5 * dx;
    double covered = overlap(lo, hi);
    if (lo < grid.x_min()) covered += overlap(lo + length, hi + length);
    if (covered > 0.0) sum += std::norm(field[j]) * covered;
  }
  return sum;
}

/// Continuous Fourier transform estimate at an arbitrary wavenumber,
/// (dx / sqrt(2 pi)) * sum_j psi_j exp(-i k x_j), restricted to samples with
/// lo <= x_j < hi. Exact trigonometric interpolation of the DFT for fields that
/// vanish at the domain edges.
inline Complex spectral_amplitude(const WaveField& field, double k, double lo, double hi) {
  const auto x = field.grid().positions();
  Complex sum = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    if (x[j] < lo || x[j] >= hi) continue;
    sum += field[j] * std::polar(1.0, -k * x[j]);
  }
  return sum * (field.grid().dx() / std::sqrt(2.0 * std::numbers::pi));
}

inline Complex spectral_amplitude(const WaveField& field, double k) {
  return spectral_amplitude(field, k, field.grid().x_min(), field.grid().x_max());
}

inline double max_abs_difference(const WaveField& a, const WaveField& b) {
  if (a.size() != b.size()) throw InvalidArgument("fields differ in length");
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
  return worst;
}

}  // namespace pqsim
