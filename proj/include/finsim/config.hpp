#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "finsim/body.hpp"
#include "finsim/control.hpp"
#include "finsim/errors.hpp"
#include "finsim/mechanism.hpp"
#include "finsim/swim.hpp"

namespace finsim {

/// Full configuration for one scenario run. Parsed from a flat key = value
/// file with dotted section prefixes; every key carries its unit in the name.
struct ScenarioConfig {
  MechanismGeometry geometry;
  BodyParams body;
  SwimParams swim;
  ControllerConfig controller;
  double command_omega_rad_per_s = 2.0 * M_PI;
  double command_theta2_hold_rad = -M_PI / 2.0;
  double t_end_s = 0.0;  // 0 means "use the scenario default"
  double dt_s = 1e-3;
  // metric.* entries read back from a manifest; ignored by simulations but
  // kept so a manifest round-trips through the parser.
  std::map<std::string, double> metrics;

  void validate() const {
    geometry.validate();
    body.validate();
    swim.validate();
    controller.validate();
    if (t_end_s < 0.0) throw ConfigError("run: t_end_s must be >= 0");
    if (!(dt_s > 0.0)) throw ConfigError("run: dt_s must be > 0");
    if (!(command_theta2_hold_rad >= -M_PI && command_theta2_hold_rad <= M_PI)) {
      throw ConfigError("command: theta2_hold_rad must lie in [-pi, pi]");
    }
    if (!std::isfinite(command_omega_rad_per_s)) {
      throw ConfigError("command: omega_rad_per_s must be finite");
    }
  }
};

namespace detail {

inline std::map<std::string, std::function<double*(ScenarioConfig&)>>&
config_key_table() {
  static std::map<std::string, std::function<double*(ScenarioConfig&)>> table = {
      {"geometry.wheel_radius_m", [](ScenarioConfig& c) { return &c.geometry.wheel_radius_m; }},
      {"geometry.reel_radius_m", [](ScenarioConfig& c) { return &c.geometry.reel_radius_m; }},
      {"geometry.offset_l1_m", [](ScenarioConfig& c) { return &c.geometry.offset_l1_m; }},
      {"geometry.offset_l2_m", [](ScenarioConfig& c) { return &c.geometry.offset_l2_m; }},
      {"body.spine_length_m", [](ScenarioConfig& c) { return &c.body.spine_length_m; }},
      {"body.wire_offset_m", [](ScenarioConfig& c) { return &c.body.wire_offset_m; }},
      {"body.stiffness_nm_per_rad", [](ScenarioConfig& c) { return &c.body.stiffness_nm_per_rad; }},
      {"body.damping_kgm2_per_s_rad", [](ScenarioConfig& c) { return &c.body.damping_kgm2_per_s_rad; }},
      {"body.drag_coeff", [](ScenarioConfig& c) { return &c.body.drag_coeff; }},
      {"body.water_density_kg_per_m3", [](ScenarioConfig& c) { return &c.body.water_density_kg_per_m3; }},
      {"body.fin_area_m2", [](ScenarioConfig& c) { return &c.body.fin_area_m2; }},
      {"body.added_mass_coeff", [](ScenarioConfig& c) { return &c.body.added_mass_coeff; }},
      {"body.diameter_root_m", [](ScenarioConfig& c) { return &c.body.diameter_root_m; }},
      {"body.diameter_tip_m", [](ScenarioConfig& c) { return &c.body.diameter_tip_m; }},
      {"swim.body_mass_kg", [](ScenarioConfig& c) { return &c.swim.body_mass_kg; }},
      {"swim.yaw_inertia_kgm2", [](ScenarioConfig& c) { return &c.swim.yaw_inertia_kgm2; }},
      {"swim.surge_drag_coeff_kg_per_m", [](ScenarioConfig& c) { return &c.swim.surge_drag_coeff_kg_per_m; }},
      {"swim.yaw_drag_coeff_nms2_per_rad2", [](ScenarioConfig& c) { return &c.swim.yaw_drag_coeff_nms2_per_rad2; }},
      {"swim.yaw_lin_damp_nms_per_rad", [](ScenarioConfig& c) { return &c.swim.yaw_lin_damp_nms_per_rad; }},
      {"swim.thrust_coeff", [](ScenarioConfig& c) { return &c.swim.thrust_coeff; }},
      {"swim.steer_coeff", [](ScenarioConfig& c) { return &c.swim.steer_coeff; }},
      {"swim.tail_moment_arm_m", [](ScenarioConfig& c) { return &c.swim.tail_moment_arm_m; }},
      {"controller.k_p", [](ScenarioConfig& c) { return &c.controller.k_p; }},
      {"controller.psi_target_rad", [](ScenarioConfig& c) { return &c.controller.psi_target_rad; }},
      {"controller.omega_cmd_rad_per_s", [](ScenarioConfig& c) { return &c.controller.omega_cmd_rad_per_s; }},
      {"controller.theta2_limit_rad", [](ScenarioConfig& c) { return &c.controller.theta2_limit_rad; }},
      {"command.omega_rad_per_s", [](ScenarioConfig& c) { return &c.command_omega_rad_per_s; }},
      {"command.theta2_hold_rad", [](ScenarioConfig& c) { return &c.command_theta2_hold_rad; }},
      {"run.t_end_s", [](ScenarioConfig& c) { return &c.t_end_s; }},
      {"run.dt_s", [](ScenarioConfig& c) { return &c.dt_s; }},
  };
  return table;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses the flat key = value format. Lines starting with '#' (after
/// whitespace) are comments. Unknown keys are hard errors; 'metric.*' keys are
/// collected verbatim so an emitted manifest re-parses cleanly.
inline ScenarioConfig parse_config_text(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = detail::trim(stripped.substr(0, eq));
    const std::string value_str = detail::trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    double value = 0.0;
    try {
      std::size_t pos = 0;
      value = std::stod(value_str, &pos);
      if (pos != value_str.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": cannot parse numeric value '" + value_str +
                        "' for key '" + key + "'");
    }
    if (key.rfind("metric.", 0) == 0) {
      cfg.metrics[key] = value;
      continue;
    }
    auto& table = detail::config_key_table();
    const auto it = table.find(key);
    if (it == table.end()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
    *it->second(cfg) = value;
  }
  cfg.validate();
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Serializes every known key (plus any metrics) in deterministic order with
/// enough digits to round-trip exactly.
inline std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  char buf[64];
  ScenarioConfig& mutable_cfg = const_cast<ScenarioConfig&>(cfg);
  for (const auto& [key, accessor] : detail::config_key_table()) {
    std::snprintf(buf, sizeof buf, "%.17g", *accessor(mutable_cfg));
    out << key << " = " << buf << "\n";
  }
  for (const auto& [key, value] : cfg.metrics) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << key << " = " << buf << "\n";
  }
  return out.str();
}

}  // namespace finsim
