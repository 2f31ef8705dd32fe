#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "pqsim/error.hpp"
#include "pqsim/io.hpp"

namespace pqsim {

struct PotentialConfig {
  /// smoothed_power | step | zero | tabulated
  std::string kind = "smoothed_power";
  int power = 6;
  double depth = 10.0;
  double v0 = 1.0;
  double x0 = 0.0;
  double width = 0.0;
  /// CSV with header `x,v`, for kind = tabulated
  std::string file;
  friend bool operator==(const PotentialConfig&, const PotentialConfig&) = default;
};

struct PacketConfig {
  double mass = 0.5;
  double x0 = -7.0;
  double p0 = 3.5;
  double sigma = std::numbers::sqrt2;
  friend bool operator==(const PacketConfig&, const PacketConfig&) = default;
};

struct GridConfig {
  double x_min = -120.0;
  double x_max = 120.0;
  std::size_t n_points = 4096;
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct TimeConfig {
  double t_max = 12.0;
  /// nullopt selects the automatic stability rule (`dt = "auto"`).
  std::optional<double> dt;
  std::size_t snapshot_stride = 0;
  double cap_strength = 0.0;
  double cap_width = 0.1;
  friend bool operator==(const TimeConfig&, const TimeConfig&) = default;
};

struct OpticsConfig {
  double s = 1.0;
  double lambda = 0.2;
  double n_material_max = 1.6;
  double fabrication_resolution = 0.1;
  double max_divergence = 0.1;
  double feature_wavelengths = 4.0;
  friend bool operator==(const OpticsConfig&, const OpticsConfig&) = default;
};

struct SweepConfig {
  double e_min = 0.5;
  double e_max = 6.0;
  std::size_t n_points = 64;
  bool logarithmic = false;
  /// momentum_sign | energy_filter
  std::string method = "momentum_sign";
  double split = 0.0;
  /// Region that must be empty for the packet to count as scattered; derived
  /// from the potential when unset.
  std::optional<double> support_min;
  std::optional<double> support_max;
  double scattered_tolerance = 1e-6;
  double reliability_floor = 1e-6;
  double prominence = 2.0;
  /// Oracle slices per grid cell.
  std::size_t oracle_oversample = 8;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct CompareConfig {
  std::string side_a = "quantum";
  std::string side_b = "optical";
  /// Step count of side b; nullopt reuses side a's count.
  std::optional<std::size_t> steps_b;
  bool spectra = true;
  double field_tolerance = 1e-8;
  double spectrum_tolerance = 0.02;
  friend bool operator==(const CompareConfig&, const CompareConfig&) = default;
};

struct RunSection {
  /// quantum | optical
  std::string side = "quantum";
  std::string output = "out";
  /// 0 = hardware concurrency
  unsigned threads = 0;
  bool oracle = false;
  friend bool operator==(const RunSection&, const RunSection&) = default;
};

struct RunConfig {
  PotentialConfig potential;
  PacketConfig packet;
  GridConfig grid;
  TimeConfig time;
  OpticsConfig optics;
  SweepConfig sweep;
  CompareConfig compare;
  RunSection run;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

class TableReader {
 public:
  TableReader(const toml::table* table, std::string section) : table_(table), section_(std::move(section)) {}

  /// Throws for keys that no getter consumed.
  void finish() const {
    if (table_ == nullptr) return;
    for (auto&& [key, node] : *table_) {
      const std::string k(key.str());
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) {
        throw ConfigError("unknown key '" + section_ + "." + k + "'");
      }
    }
  }

  void get(std::string_view key, double& out) {
    if (const toml::node* n = find(key)) {
      if (auto v = n->as_floating_point()) out = v->get();
      else if (auto i = n->as_integer()) out = static_cast<double>(i->get());
      else throw type_error(key, "a number");
    }
  }

  void get(std::string_view key, std::optional<double>& out) {
    if (const toml::node* n = find(key)) {
      double v = 0.0;
      get_number(key, *n, v);
      out = v;
    }
  }

  void get(std::string_view key, int& out) {
    if (const toml::node* n = find(key)) {
      auto i = n->as_integer();
      if (!i) throw type_error(key, "an integer");
      out = static_cast<int>(i->get());
    }
  }

  void get(std::string_view key, std::size_t& out) {
    if (const toml::node* n = find(key)) {
      auto i = n->as_integer();
      if (!i || i->get() < 0) throw type_error(key, "a non-negative integer");
      out = static_cast<std::size_t>(i->get());
    }
  }

  void get(std::string_view key, std::optional<std::size_t>& out) {
    if (find_raw(key) != nullptr) {
      std::size_t v = 0;
      get(key, v);
      out = v;
    }
  }

  void get(std::string_view key, unsigned& out) {
    std::size_t v = out;
    get(key, v);
    out = static_cast<unsigned>(v);
  }

  void get(std::string_view key, bool& out) {
    if (const toml::node* n = find(key)) {
      auto b = n->as_boolean();
      if (!b) throw type_error(key, "a boolean");
      out = b->get();
    }
  }

  void get(std::string_view key, std::string& out) {
    if (const toml::node* n = find(key)) {
      auto s = n->as_string();
      if (!s) throw type_error(key, "a string");
      out = s->get();
    }
  }

  /// A number or the string "auto" (-> nullopt).
  void get_auto(std::string_view key, std::optional<double>& out) {
    if (const toml::node* n = find(key)) {
      if (auto s = n->as_string()) {
        if (s->get() != "auto") throw type_error(key, "a number or \"auto\"");
        out.reset();
      } else {
        double v = 0.0;
        get_number(key, *n, v);
        out = v;
      }
    }
  }

 private:
  const toml::node* find_raw(std::string_view key) const {
    return table_ == nullptr ? nullptr : table_->get(key);
  }

  const toml::node* find(std::string_view key) {
    const toml::node* n = find_raw(key);
    if (n != nullptr) seen_.emplace_back(key);
    return n;
  }

  void get_number(std::string_view key, const toml::node& n, double& out) const {
    if (auto v = n.as_floating_point()) out = v->get();
    else if (auto i = n.as_integer()) out = static_cast<double>(i->get());
    else throw type_error(key, "a number");
  }

  ConfigError type_error(std::string_view key, const char* expected) const {
    return ConfigError("'" + section_ + "." + std::string(key) + "' must be " + expected);
  }

  const toml::table* table_;
  std::string section_;
  std::vector<std::string> seen_;
};

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

inline std::string toml_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::string s = io::fmt(v);
  // TOML floats need a fraction or an exponent.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

inline void check_sections(const toml::table& root) {
  static const char* const known[] = {"potential", "packet", "grid", "time", "optics", "sweep", "compare", "run"};
  for (auto&& [key, node] : root) {
    const std::string k(key.str());
    if (std::find(std::begin(known), std::end(known), k) == std::end(known)) {
      throw ConfigError("unknown section '" + k + "'");
    }
    if (!node.is_table()) throw ConfigError("'" + k + "' must be a table");
  }
}

}  // namespace detail

/// Builds a RunConfig from a parsed TOML document. Missing keys keep their
/// defaults; unknown keys and sections are rejected.
inline RunConfig config_from_table(const toml::table& root) {
  detail::check_sections(root);
  RunConfig c;
  auto section = [&](const char* name) { return detail::TableReader(root[name].as_table(), name); };

  auto p = section("potential");
  p.get("kind", c.potential.kind);
  p.get("power", c.potential.power);
  p.get("depth", c.potential.depth);
  p.get("v0", c.potential.v0);
  p.get("x0", c.potential.x0);
  p.get("width", c.potential.width);
  p.get("file", c.potential.file);
  p.finish();

  auto k = section("packet");
  k.get("mass", c.packet.mass);
  k.get("x0", c.packet.x0);
  k.get("p0", c.packet.p0);
  k.get("sigma", c.packet.sigma);
  k.finish();

  auto g = section("grid");
  g.get("x_min", c.grid.x_min);
  g.get("x_max", c.grid.x_max);
  g.get("n_points", c.grid.n_points);
  g.finish();

  auto t = section("time");
  t.get("t_max", c.time.t_max);
  t.get_auto("dt", c.time.dt);
  t.get("snapshot_stride", c.time.snapshot_stride);
  t.get("cap_strength", c.time.cap_strength);
  t.get("cap_width", c.time.cap_width);
  t.finish();

  auto o = section("optics");
  o.get("s", c.optics.s);
  o.get("lambda", c.optics.lambda);
  o.get("n_material_max", c.optics.n_material_max);
  o.get("fabrication_resolution", c.optics.fabrication_resolution);
  o.get("max_divergence", c.optics.max_divergence);
  o.get("feature_wavelengths", c.optics.feature_wavelengths);
  o.finish();

  auto s = section("sweep");
  s.get("e_min", c.sweep.e_min);
  s.get("e_max", c.sweep.e_max);
  s.get("n_points", c.sweep.n_points);
  s.get("logarithmic", c.sweep.logarithmic);
  s.get("method", c.sweep.method);
  s.get("split", c.sweep.split);
  s.get("support_min", c.sweep.support_min);
  s.get("support_max", c.sweep.support_max);
  s.get("scattered_tolerance", c.sweep.scattered_tolerance);
  s.get("reliability_floor", c.sweep.reliability_floor);
  s.get("prominence", c.sweep.prominence);
  s.get("oracle_oversample", c.sweep.oracle_oversample);
  s.finish();

  auto m = section("compare");
  m.get("side_a", c.compare.side_a);
  m.get("side_b", c.compare.side_b);
  m.get("steps_b", c.compare.steps_b);
  m.get("spectra", c.compare.spectra);
  m.get("field_tolerance", c.compare.field_tolerance);
  m.get("spectrum_tolerance", c.compare.spectrum_tolerance);
  m.finish();

  auto r = section("run");
  r.get("side", c.run.side);
  r.get("output", c.run.output);
  r.get("threads", c.run.threads);
  r.get("oracle", c.run.oracle);
  r.finish();
  return c;
}

inline toml::table parse_toml(std::string_view text, std::string_view source = "config") {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(msg.str());
  }
}

inline bool is_side(const std::string& side) { return side == "quantum" || side == "optical"; }

/// Checks value-level constraints that do not need the numerical modules.
inline void validate_config(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  const auto& pk = c.potential.kind;
  require(pk == "smoothed_power" || pk == "step" || pk == "zero" || pk == "tabulated",
          "potential.kind must be smoothed_power, step, zero or tabulated");
  if (pk == "smoothed_power") {
    require(c.potential.power >= 2 && c.potential.power % 2 == 0, "potential.power must be even and >= 2");
    require(c.potential.depth > 0.0, "potential.depth must be > 0");
  }
  if (pk == "step") require(c.potential.width >= 0.0, "potential.width must be >= 0");
  if (pk == "tabulated") require(!c.potential.file.empty(), "potential.file is required for tabulated potentials");

  require(c.packet.mass > 0.0, "packet.mass must be > 0");
  require(c.packet.sigma > 0.0, "packet.sigma must be > 0");
  require(std::isfinite(c.packet.x0) && std::isfinite(c.packet.p0), "packet.x0 and packet.p0 must be finite");

  require(c.grid.x_max > c.grid.x_min, "grid.x_max must exceed grid.x_min");
  const std::size_t n = c.grid.n_points;
  require(n >= 8 && (n & (n - 1)) == 0, "grid.n_points must be a power of two >= 8");

  require(c.time.t_max > 0.0 && std::isfinite(c.time.t_max), "time.t_max must be positive");
  require(!c.time.dt || (*c.time.dt > 0.0 && std::isfinite(*c.time.dt)), "time.dt must be positive or \"auto\"");
  require(c.time.cap_strength >= 0.0, "time.cap_strength must be >= 0");
  require(c.time.cap_width > 0.0 && c.time.cap_width < 0.5, "time.cap_width must be in (0, 0.5)");

  require(c.optics.s > 0.0 && c.optics.lambda > 0.0, "optics.s and optics.lambda must be > 0");
  require(c.optics.n_material_max >= 1.0, "optics.n_material_max must be >= 1");
  require(c.optics.fabrication_resolution > 0.0, "optics.fabrication_resolution must be > 0");
  require(c.optics.max_divergence > 0.0, "optics.max_divergence must be > 0");
  require(c.optics.feature_wavelengths >= 0.0, "optics.feature_wavelengths must be >= 0");

  require(c.sweep.e_min > 0.0 && c.sweep.e_max >= c.sweep.e_min, "sweep needs 0 < e_min <= e_max");
  require(c.sweep.n_points >= 1, "sweep.n_points must be >= 1");
  require(c.sweep.n_points == 1 || c.sweep.e_max > c.sweep.e_min, "sweep needs e_max > e_min for several points");
  require(c.sweep.method == "momentum_sign" || c.sweep.method == "energy_filter",
          "sweep.method must be momentum_sign or energy_filter");
  require(c.sweep.support_min.has_value() == c.sweep.support_max.has_value(),
          "sweep.support_min and sweep.support_max must be given together");
  require(!c.sweep.support_min || *c.sweep.support_min < *c.sweep.support_max,
          "sweep.support_min must be below sweep.support_max");
  require(c.sweep.scattered_tolerance > 0.0, "sweep.scattered_tolerance must be > 0");
  require(c.sweep.reliability_floor >= 0.0, "sweep.reliability_floor must be >= 0");
  require(c.sweep.prominence > 0.0, "sweep.prominence must be > 0");
  require(c.sweep.oracle_oversample >= 1, "sweep.oracle_oversample must be >= 1");

  require(is_side(c.compare.side_a) && is_side(c.compare.side_b), "compare sides must be quantum or optical");
  require(c.compare.field_tolerance > 0.0 && c.compare.spectrum_tolerance > 0.0,
          "compare tolerances must be > 0");

  require(is_side(c.run.side), "run.side must be quantum or optical");
}

inline RunConfig parse_config(std::string_view text, std::string_view source = "config") {
  RunConfig c = config_from_table(parse_toml(text, source));
  validate_config(c);
  return c;
}

/// Canonical TOML text; every key is written, so parse(serialize(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
  using detail::quote;
  using detail::toml_number;
  std::ostringstream os;
  os << "[potential]\n"
     << "kind = " << quote(c.potential.kind) << '\n'
     << "power = " << c.potential.power << '\n'
     << "depth = " << toml_number(c.potential.depth) << '\n'
     << "v0 = " << toml_number(c.potential.v0) << '\n'
     << "x0 = " << toml_number(c.potential.x0) << '\n'
     << "width = " << toml_number(c.potential.width) << '\n'
     << "file = " << quote(c.potential.file) << "\n\n";
  os << "[packet]\n"
     << "mass = " << toml_number(c.packet.mass) << '\n'
     << "x0 = " << toml_number(c.packet.x0) << '\n'
     << "p0 = " << toml_number(c.packet.p0) << '\n'
     << "sigma = " << toml_number(c.packet.sigma) << "\n\n";
  os << "[grid]\n"
     << "x_min = " << toml_number(c.grid.x_min) << '\n'
     << "x_max = " << toml_number(c.grid.x_max) << '\n'
     << "n_points = " << c.grid.n_points << "\n\n";
  os << "[time]\n"
     << "t_max = " << toml_number(c.time.t_max) << '\n'
     << "dt = " << (c.time.dt ? toml_number(*c.time.dt) : quote("auto")) << '\n'
     << "snapshot_stride = " << c.time.snapshot_stride << '\n'
     << "cap_strength = " << toml_number(c.time.cap_strength) << '\n'
     << "cap_width = " << toml_number(c.time.cap_width) << "\n\n";
  os << "[optics]\n"
     << "s = " << toml_number(c.optics.s) << '\n'
     << "lambda = " << toml_number(c.optics.lambda) << '\n'
     << "n_material_max = " << toml_number(c.optics.n_material_max) << '\n'
     << "fabrication_resolution = " << toml_number(c.optics.fabrication_resolution) << '\n'
     << "max_divergence = " << toml_number(c.optics.max_divergence) << '\n'
     << "feature_wavelengths = " << toml_number(c.optics.feature_wavelengths) << "\n\n";
  os << "[sweep]\n"
     << "e_min = " << toml_number(c.sweep.e_min) << '\n'
     << "e_max = " << toml_number(c.sweep.e_max) << '\n'
     << "n_points = " << c.sweep.n_points << '\n'
     << "logarithmic = " << (c.sweep.logarithmic ? "true" : "false") << '\n'
     << "method = " << quote(c.sweep.method) << '\n'
     << "split = " << toml_number(c.sweep.split) << '\n';
  if (c.sweep.support_min) os << "support_min = " << toml_number(*c.sweep.support_min) << '\n';
  if (c.sweep.support_max) os << "support_max = " << toml_number(*c.sweep.support_max) << '\n';
  os << "scattered_tolerance = " << toml_number(c.sweep.scattered_tolerance) << '\n'
     << "reliability_floor = " << toml_number(c.sweep.reliability_floor) << '\n'
     << "prominence = " << toml_number(c.sweep.prominence) << '\n'
     << "oracle_oversample = " << c.sweep.oracle_oversample << "\n\n";
  os << "[compare]\n"
     << "side_a = " << quote(c.compare.side_a) << '\n'
     << "side_b = " << quote(c.compare.side_b) << '\n';
  if (c.compare.steps_b) os << "steps_b = " << *c.compare.steps_b << '\n';
  os << "spectra = " << (c.compare.spectra ? "true" : "false") << '\n'
     << "field_tolerance = " << toml_number(c.compare.field_tolerance) << '\n'
     << "spectrum_tolerance = " << toml_number(c.compare.spectrum_tolerance) << "\n\n";
  os << "[run]\n"
     << "side = " << quote(c.run.side) << '\n'
     << "output = " << quote(c.run.output) << '\n'
     << "threads = " << c.run.threads << '\n'
     << "oracle = " << (c.run.oracle ? "true" : "false") << '\n';
  return os.str();
}

/// Applies `section.key=value` overrides to a parsed document. The value is
/// read as a TOML value; anything that does not parse is taken as a string.
inline void apply_override(toml::table& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq) {
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  }
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string value = assignment.substr(eq + 1);

  toml::table parsed;
  try {
    parsed = toml::parse("v = " + value);
  } catch (const toml::parse_error&) {
    parsed = toml::table{{"v", value}};
  }
  if (!root.contains(section)) root.insert(section, toml::table{});
  toml::table* target = root[section].as_table();
  if (target == nullptr) throw ConfigError("'" + section + "' is not a table");
  parsed.get("v")->visit([&](auto&& v) { target->insert_or_assign(key, v); });
}

inline RunConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  toml::table root = parse_toml(text.str(), path.string());
  for (const auto& o : overrides) apply_override(root, o);
  RunConfig c = config_from_table(root);
  validate_config(c);
  return c;
}

}  // namespace pqsim
