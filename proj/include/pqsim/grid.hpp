#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "pqsim/error.hpp"

namespace pqsim {

enum class UnitTag { atomic, micron };

inline const char* to_string(UnitTag unit) {
  return unit == UnitTag::atomic ? "atomic" : "micron";
}

/// Uniform periodic grid x_j = x_min + j*dx, j = 0..N-1, together with its
/// conjugate wavenumbers in signed FFT order (0, dk, ..., +-N/2 dk, ..., -dk).
///
/// The point x_max itself is not sampled; it is identified with x_min.
/// Copies share the immutable sample arrays.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n_points, UnitTag unit) {
    if (!(std::isfinite(x_min) && std::isfinite(x_max)) || !(x_max > x_min)) {
      throw InvalidArgument("grid requires x_max > x_min");
    }
    if (n_points < 8 || (n_points & (n_points - 1)) != 0) {
      throw InvalidArgument("n_points must be a power of two >= 8, got " +
                            std::to_string(n_points));
    }
    auto data = std::make_shared<Data>();
    data->x_min = x_min;
    data->x_max = x_max;
    data->unit = unit;
    data->dx = (x_max - x_min) / static_cast<double>(n_points);
    data->x.resize(n_points);
    data->k.resize(n_points);
    const double dk = 2.0 * std::numbers::pi / (x_max - x_min);
    const auto n = static_cast<std::ptrdiff_t>(n_points);
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      data->x[j] = x_min + static_cast<double>(j) * data->dx;
      const std::ptrdiff_t signed_j = j <= n / 2 ? j : j - n;
      data->k[j] = dk * static_cast<double>(signed_j);
    }
    data_ = std::move(data);
  }

  double x_min() const noexcept { return data_->x_min; }
  double x_max() const noexcept { return data_->x_max; }
  double length() const noexcept { return data_->x_max - data_->x_min; }
  double dx() const noexcept { return data_->dx; }
  double dk() const noexcept { return 2.0 * std::numbers::pi / length(); }
  /// Nyquist wavenumber pi/dx.
  double k_max() const noexcept { return std::numbers::pi / data_->dx; }
  std::size_t size() const noexcept { return data_->x.size(); }
  UnitTag unit() const noexcept { return data_->unit; }

  std::span<const double> positions() const noexcept { return data_->x; }
  std::span<const double> wavenumbers() const noexcept { return data_->k; }

  /// Same geometry and unit (shared storage or not).
  bool same_as(const Grid1D& other) const noexcept {
    return data_ == other.data_ ||
           (x_min() == other.x_min() && x_max() == other.x_max() &&
            size() == other.size() && unit() == other.unit());
  }

  friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept { return a.same_as(b); }

 private:
  struct Data {
    double x_min = 0.0;
    double x_max = 0.0;
    double dx = 0.0;
    UnitTag unit = UnitTag::atomic;
    std::vector<double> x;
    std::vector<double> k;
  };
  std::shared_ptr<const Data> data_;
};

inline Grid1D make_grid(double x_min, double x_max, std::size_t n_points,
                        UnitTag unit = UnitTag::atomic) {
  return Grid1D(x_min, x_max, n_points, unit);
}

/// Grid with every coordinate multiplied by `scale` (scale > 0).
inline Grid1D scaled_grid(const Grid1D& grid, double scale, UnitTag unit) {
  if (!(scale > 0.0)) throw InvalidArgument("grid scale must be positive");
  return Grid1D(scale * grid.x_min(), scale * grid.x_max(), grid.size(), unit);
}

}  // namespace pqsim
