#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pqsim/error.hpp"
#include "pqsim/field.hpp"
#include "pqsim/optics.hpp"
#include "pqsim/scattering.hpp"

namespace pqsim::io {

/// Shortest decimal form that round-trips to the same double.
inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Compact form for console messages.
inline std::string show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file " + path.string());
  return out;
}

/// `x,re,im,abs2`, one row per grid point.
inline void write_field_csv(std::ostream& os, const WaveField& field) {
  if (field.representation() != Representation::position) {
    throw InvalidArgument("field CSV export expects a position-space field");
  }
  os << "x,re,im,abs2\n";
  const auto x = field.grid().positions();
  for (std::size_t j = 0; j < field.size(); ++j) {
    const Complex v = field[j];
    os << fmt(x[j]) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << ',' << fmt(std::norm(v))
       << '\n';
  }
}

/// `E_au,R,reliable,method`, plus `R_oracle` when an oracle column is given.
inline void write_spectrum_csv(std::ostream& os, const ReflectionSpectrum& spectrum,
                               std::span<const double> oracle = {}) {
  const bool with_oracle = !oracle.empty();
  if (with_oracle && oracle.size() != spectrum.size()) {
    throw InvalidArgument("oracle column length does not match the spectrum");
  }
  os << "E_au,R,reliable,method" << (with_oracle ? ",R_oracle" : "") << '\n';
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    os << fmt(spectrum.energies[i]) << ',' << fmt(spectrum.R[i]) << ','
       << (spectrum.reliable[i] ? 1 : 0) << ',' << to_string(spectrum.method);
    if (with_oracle) os << ',' << fmt(oracle[i]);
    os << '\n';
  }
}

inline void write_dips_csv(std::ostream& os, const std::vector<Dip>& dips) {
  os << "E_dip,R_dip,prominence_decades\n";
  for (const auto& d : dips) os << fmt(d.energy) << ',' << fmt(d.R) << ',' << fmt(d.prominence) << '\n';
}

inline void write_index_csv(std::ostream& os, const IndexProfile& profile) {
  os << "xi_um,n\n";
  const auto xi = profile.grid.positions();
  for (std::size_t j = 0; j < profile.n.size(); ++j) os << fmt(xi[j]) << ',' << fmt(profile.n[j]) << '\n';
}

inline nlohmann::json feasibility_json(const FeasibilityReport& r) {
  nlohmann::json j;
  j["n_max"] = r.n_max;
  j["n_max_ok"] = r.n_max_ok;
  j["feature_size_um"] = std::isfinite(r.feature_size) ? nlohmann::json(r.feature_size) : nlohmann::json(nullptr);
  j["feature_limit_um"] = r.feature_limit;
  j["feature_ok"] = r.feature_ok;
  j["divergence_rad"] = r.divergence ? nlohmann::json(*r.divergence) : nlohmann::json(nullptr);
  j["k_x_99"] = r.k_x_99 ? nlohmann::json(*r.k_x_99) : nlohmann::json(nullptr);
  j["divergence_ok"] = r.divergence_ok;
  j["max_index_step"] = r.max_index_step;
  j["all_ok"] = r.all_ok();
  return j;
}

/// {s, lambda_um, w, k_opt, m_au, n_max, feasibility}
inline nlohmann::json index_sidecar_json(const IndexProfile& profile, const FeasibilityReport& report) {
  nlohmann::json j;
  j["s"] = profile.scales.s();
  j["lambda_um"] = profile.scales.lambda();
  j["w"] = profile.scales.w();
  j["k_opt"] = profile.scales.k_opt();
  j["m_au"] = profile.scales.mass();
  j["n_max"] = profile.n_max;
  j["feasibility"] = feasibility_json(report);
  return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace pqsim::io
