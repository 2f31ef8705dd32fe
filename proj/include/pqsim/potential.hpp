#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "pqsim/error.hpp"
#include "pqsim/grid.hpp"

namespace pqsim {

/// V(x) = -depth * tanh(|x|^power / depth): sixth- (power-) order at the origin,
/// saturating at -depth. The tanh saturation also serves as the truncation.
struct SmoothedPower {
  int power = 6;
  double depth = 10.0;
  friend bool operator==(const SmoothedPower&, const SmoothedPower&) = default;
};

/// v0 for x >= x0, 0 below. width > 0 replaces the jump by
/// (v0/2) (1 + tanh((x - x0)/width)).
struct Step {
  double v0 = 1.0;
  double x0 = 0.0;
  double width = 0.0;
  friend bool operator==(const Step&, const Step&) = default;
};

struct ZeroPotential {
  friend bool operator==(const ZeroPotential&, const ZeroPotential&) = default;
};

/// Samples (x_i, v_i) with strictly increasing x, linearly interpolated.
struct Tabulated {
  std::vector<double> x;
  std::vector<double> v;
  friend bool operator==(const Tabulated&, const Tabulated&) = default;
};

using PotentialModel = std::variant<SmoothedPower, Step, ZeroPotential, Tabulated>;

inline PotentialModel smoothed_power(int power, double depth) {
  if (power < 2 || power % 2 != 0) {
    throw InvalidArgument("smoothed power potential needs an even power >= 2");
  }
  if (!(depth > 0.0)) throw InvalidArgument("smoothed power potential needs depth > 0");
  return SmoothedPower{power, depth};
}

inline PotentialModel step_potential(double v0, double x0, double width = 0.0) {
  if (!std::isfinite(v0) || !std::isfinite(x0) || !(width >= 0.0)) {
    throw InvalidArgument("step potential needs finite v0, x0 and width >= 0");
  }
  return Step{v0, x0, width};
}

inline PotentialModel tabulated_potential(std::vector<double> x, std::vector<double> v) {
  if (x.size() != v.size() || x.size() < 2) {
    throw InvalidArgument("tabulated potential needs >= 2 matching samples");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(v[i])) {
      throw InvalidArgument("tabulated potential contains non-finite values");
    }
    if (i > 0 && !(x[i] > x[i - 1])) {
      throw InvalidArgument("tabulated potential x must be strictly increasing");
    }
  }
  return Tabulated{std::move(x), std::move(v)};
}

namespace detail {
inline double int_pow(double base, int exponent) {
  double result = 1.0;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}
}  // namespace detail

inline double eval_potential(const PotentialModel& model, double x) {
  return std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SmoothedPower>) {
          return -m.depth * std::tanh(detail::int_pow(std::abs(x), m.power) / m.depth);
        } else if constexpr (std::is_same_v<T, Step>) {
          if (m.width > 0.0) return 0.5 * m.v0 * (1.0 + std::tanh((x - m.x0) / m.width));
          return x >= m.x0 ? m.v0 : 0.0;
        } else if constexpr (std::is_same_v<T, ZeroPotential>) {
          return 0.0;
        } else {
          if (x < m.x.front() || x > m.x.back()) {
            throw InvalidArgument("tabulated potential queried outside its table range");
          }
          const auto it = std::upper_bound(m.x.begin(), m.x.end(), x);
          if (it == m.x.end()) return m.v.back();
          const auto i = static_cast<std::size_t>(it - m.x.begin());
          const double t = (x - m.x[i - 1]) / (m.x[i] - m.x[i - 1]);
          return (1.0 - t) * m.v[i - 1] + t * m.v[i];
        }
      },
      model);
}

/// Lowest value of V on the real line for closed-form models, of the samples
/// for tabulated ones.
inline double potential_minimum(const PotentialModel& model) {
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SmoothedPower>) {
          return -m.depth;
        } else if constexpr (std::is_same_v<T, Step>) {
          return std::min(0.0, m.v0);
        } else if constexpr (std::is_same_v<T, ZeroPotential>) {
          return 0.0;
        } else {
          return *std::min_element(m.v.begin(), m.v.end());
        }
      },
      model);
}

inline std::vector<double> sample_potential(const PotentialModel& model, const Grid1D& grid) {
  if (grid.unit() != UnitTag::atomic) {
    throw InvalidArgument("potentials are sampled on atomic-unit grids");
  }
  const auto x = grid.positions();
  std::vector<double> v(x.size());
  std::transform(x.begin(), x.end(), v.begin(),
                 [&](double xi) { return eval_potential(model, xi); });
  return v;
}

/// Midpoint samples of V on [a, b) with spacing h: V(a + (i + 1/2) h).
inline std::vector<double> sample_slices(const PotentialModel& model, double a, double b,
                                         double h) {
  if (!(b > a) || !(h > 0.0)) throw InvalidArgument("sample_slices needs b > a and h > 0");
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / h - 1e-9));
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = eval_potential(model, a + (static_cast<double>(i) + 0.5) * h);
  }
  return v;
}

/// Reads a `x,v` CSV (header required) into a tabulated model.
inline PotentialModel load_tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open tabulated potential file " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty tabulated potential file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,v") throw InvalidArgument("tabulated potential header must be `x,v`");
  std::vector<double> xs;
  std::vector<double> vs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    double xi = 0.0;
    double vi = 0.0;
    char comma = 0;
    if (!(row >> xi >> comma >> vi) || comma != ',') {
      throw InvalidArgument("malformed row " + std::to_string(line_no) + " in " + path);
    }
    xs.push_back(xi);
    vs.push_back(vi);
  }
  return tabulated_potential(std::move(xs), std::move(vs));
}

}  // namespace pqsim
