#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

namespace mwtcs {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Run parameters shared by the forward solver, inversion, and benchmark.
/// Defaults follow the 400 MHz / 16-transmitter / 32-receiver setup; geometry
/// (1.5 m domain, 3 m antenna rings) is our choice and is recorded here so a
/// config file alone reproduces a run.
struct RunConfig {
  double frequency_hz = 4.0e8;
  double grid_side_m = 1.5;
  int grid_pixels_per_side = 16;  // M; the image has I = M*M pixels
  int n_inc = 16;
  int n_rec = 32;
  double tx_radius_m = 3.0;
  double rx_radius_m = 3.0;
  double alpha = 0.1;
  double epsilon0 = 8.85e-12;
  double fista_lambda = 0.0;  // 0 = scale-aware automatic choice
  int fista_iters = 200;
  int als_iters = 10;
  std::uint64_t seed = 1;

  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw ConfigError("invalid config: " + field + " " + why);
    };
    if (!(frequency_hz > 0.0)) fail("frequency_hz", "must be > 0");
    if (!(grid_side_m > 0.0)) fail("grid_side_m", "must be > 0");
    if (grid_pixels_per_side < 1) fail("grid_pixels_per_side", "must be >= 1");
    if (n_inc < 1) fail("n_inc", "must be >= 1");
    if (n_rec < 1) fail("n_rec", "must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha", "must lie strictly in (0,1)");
    if (!(epsilon0 > 0.0)) fail("epsilon0", "must be > 0");
    if (!(fista_lambda >= 0.0)) fail("fista_lambda", "must be >= 0");
    if (fista_iters < 1) fail("fista_iters", "must be >= 1");
    if (als_iters < 1) fail("als_iters", "must be >= 1");
    // antennas must sit outside the imaging domain
    const double half_diag = grid_side_m * std::sqrt(2.0) / 2.0;
    if (!(tx_radius_m > half_diag)) fail("tx_radius_m", "must exceed half the grid diagonal");
    if (!(rx_radius_m > half_diag)) fail("rx_radius_m", "must exceed half the grid diagonal");
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{
      {"frequency_hz", c.frequency_hz},
      {"grid_side_m", c.grid_side_m},
      {"grid_pixels_per_side", c.grid_pixels_per_side},
      {"n_inc", c.n_inc},
      {"n_rec", c.n_rec},
      {"tx_radius_m", c.tx_radius_m},
      {"rx_radius_m", c.rx_radius_m},
      {"alpha", c.alpha},
      {"epsilon0", c.epsilon0},
      {"fista_lambda", c.fista_lambda},
      {"fista_iters", c.fista_iters},
      {"als_iters", c.als_iters},
      {"seed", c.seed},
  };
}

namespace detail {

inline double config_number(const std::string& key, const nlohmann::json& v) {
  if (!v.is_number()) throw ConfigError("config key " + key + " must be a number");
  return v.get<double>();
}

inline int config_int(const std::string& key, const nlohmann::json& v) {
  if (!v.is_number_integer()) throw ConfigError("config key " + key + " must be an integer");
  return v.get<int>();
}

inline std::uint64_t config_u64(const std::string& key, const nlohmann::json& v) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    throw ConfigError("config key " + key + " must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "frequency_hz") c.frequency_hz = detail::config_number(key, value);
    else if (key == "grid_side_m") c.grid_side_m = detail::config_number(key, value);
    else if (key == "grid_pixels_per_side") c.grid_pixels_per_side = detail::config_int(key, value);
    else if (key == "n_inc") c.n_inc = detail::config_int(key, value);
    else if (key == "n_rec") c.n_rec = detail::config_int(key, value);
    else if (key == "tx_radius_m") c.tx_radius_m = detail::config_number(key, value);
    else if (key == "rx_radius_m") c.rx_radius_m = detail::config_number(key, value);
    else if (key == "alpha") c.alpha = detail::config_number(key, value);
    else if (key == "epsilon0") c.epsilon0 = detail::config_number(key, value);
    else if (key == "fista_lambda") c.fista_lambda = detail::config_number(key, value);
    else if (key == "fista_iters") c.fista_iters = detail::config_int(key, value);
    else if (key == "als_iters") c.als_iters = detail::config_int(key, value);
    else if (key == "seed") c.seed = detail::config_u64(key, value);
    else throw ConfigError("unknown config key: " + key);
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const std::string& path, const RunConfig& c) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open config file for writing: " + path);
  f << to_json(c).dump(2) << "\n";
}

/// Applies a dotted-key override such as "alpha=0.2" on top of a JSON config.
inline void apply_override(nlohmann::json& j, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value: " + kv);
  const std::string key = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  const auto parsed = nlohmann::json::parse(raw, nullptr, false);
  j[key] = parsed.is_discarded() ? nlohmann::json(raw) : parsed;
}

}  // namespace mwtcs
