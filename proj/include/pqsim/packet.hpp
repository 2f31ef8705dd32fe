#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pqsim/error.hpp"
#include "pqsim/field.hpp"

namespace pqsim {

/// Gaussian wavepacket. sigma is the standard deviation of |psi|^2.
struct GaussianPacketSpec {
  double mass = 1.0;
  double x0 = 0.0;
  double p0 = 0.0;
  double sigma = 1.0;
  friend bool operator==(const GaussianPacketSpec&, const GaussianPacketSpec&) = default;
};

/// Fraction of the continuous density lying outside [x_min, x_max].
inline double packet_tail_mass(const GaussianPacketSpec& spec, const Grid1D& grid) {
  const double s = std::numbers::sqrt2 * spec.sigma;
  return 0.5 * std::erfc((spec.x0 - grid.x_min()) / s) +
         0.5 * std::erfc((grid.x_max() - spec.x0) / s);
}

/// psi(x) = (2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / (4 sigma^2)) exp(i p0 x).
///
/// Throws if more than 1e-6 of the density falls outside the grid. Appends a
/// warning when sigma < 4 dx or the centre is closer than 6 sigma to an edge.
inline WaveField gaussian_packet(const GaussianPacketSpec& spec, const Grid1D& grid,
                                 std::vector<std::string>* warnings = nullptr) {
  if (!(spec.mass > 0.0)) throw InvalidArgument("packet mass must be positive");
  if (!(spec.sigma > 0.0)) throw InvalidArgument("packet sigma must be positive");
  const double tail = packet_tail_mass(spec, grid);
  if (tail > 1e-6) {
    throw InvalidArgument("packet is not contained in the domain (tail mass " +
                          std::to_string(tail) + ")");
  }
  if (warnings != nullptr) {
    if (spec.sigma < 4.0 * grid.dx()) {
      warnings->push_back("packet sigma is under-resolved (sigma < 4 dx)");
    }
    if (spec.x0 - grid.x_min() < 6.0 * spec.sigma || grid.x_max() - spec.x0 < 6.0 * spec.sigma) {
      warnings->push_back("packet centre is within 6 sigma of the domain edge");
    }
  }
  const double amplitude = std::pow(2.0 * std::numbers::pi * spec.sigma * spec.sigma, -0.25);
  const double inv_4s2 = 1.0 / (4.0 * spec.sigma * spec.sigma);
  const auto x = grid.positions();
  std::vector<Complex> values(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - spec.x0;
    values[j] = std::polar(amplitude * std::exp(-d * d * inv_4s2), spec.p0 * x[j]);
  }
  return WaveField(grid, std::move(values));
}

}  // namespace pqsim
