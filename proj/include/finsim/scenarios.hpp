#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "finsim/body.hpp"
#include "finsim/config.hpp"
#include "finsim/control.hpp"
#include "finsim/csv_io.hpp"
#include "finsim/mechanism.hpp"
#include "finsim/swim.hpp"

namespace finsim {

struct ScenarioResult {
  std::vector<std::string> written_files;
  std::map<std::string, double> metrics;
};

namespace detail {

inline void write_manifest(const ScenarioConfig& cfg,
                           const std::map<std::string, double>& metrics,
                           const std::string& out_dir, ScenarioResult& result) {
  ScenarioConfig echoed = cfg;
  echoed.metrics = metrics;
  const std::string path = out_dir + "/manifest.cfg";
  write_text_file(serialize_config(echoed), path);
  result.written_files.push_back(path);
  result.metrics = metrics;
}

inline double peak_abs(const TimeSeries& ts, const std::string& channel) {
  double peak = 0.0;
  const Eigen::Index j = ts.index(channel);
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    peak = std::max(peak, std::abs(ts.column(channel)[i]));
  }
  (void)j;
  return peak;
}

/// Unwrapped heading slope between the first and last controller update whose
/// held command sits at the saturation limit; falls back to the overall slope
/// when the command never saturates for two consecutive updates.
inline double maneuver_turn_rate(const ClosedLoopResult& res,
                                 const ControllerConfig& cc) {
  const auto& ts = res.series;
  const Eigen::Index jt = ts.index("t_s");
  const Eigen::Index jcmd = ts.index("theta2_cmd_rad");
  const Eigen::Index jpsi = ts.index("psi_rad");
  // unwrap psi along the whole run
  std::vector<double> t, psi_unwrapped, cmd;
  double offset = 0.0, prev = ts.column("psi_rad")[0];
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    const double p = ts.column("psi_rad")[i];
    offset += wrap_angle(p - prev) - (p - prev);
    prev = p;
    t.push_back(ts.column("t_s")[i]);
    psi_unwrapped.push_back(p + offset);
    cmd.push_back(ts.column("theta2_cmd_rad")[i]);
  }
  (void)jt; (void)jcmd; (void)jpsi;
  const double limit = cc.theta2_limit_rad - 1e-9;
  std::size_t first = t.size(), last = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(cmd[i]) >= limit) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  if (first >= last || t[last] - t[first] < 1.0) {
    first = 0;
    last = t.size() - 1;
  }
  return (psi_unwrapped[last] - psi_unwrapped[first]) / (t[last] - t[first]);
}

}  // namespace detail

/// Fig. 5-style open-loop sweep of both drive modes: reel angle and rate
/// traces for the symmetric mode and the asymmetric mode with the held wheel.
inline ScenarioResult run_mode_sweep(const ScenarioConfig& cfg,
                                     const std::string& out_dir) {
  const double t_end = cfg.t_end_s > 0.0 ? cfg.t_end_s : 2.0;
  ScenarioResult result;
  std::map<std::string, double> metrics;

  const ModeCommand sym{MotionMode::symmetric, cfg.command_omega_rad_per_s, 0.0};
  const ModeCommand asym{MotionMode::asymmetric, cfg.command_omega_rad_per_s,
                         cfg.command_theta2_hold_rad};
  const TimeSeries ts_sym =
      generate_mode_trajectory(cfg.geometry, sym, t_end, cfg.dt_s);
  const TimeSeries ts_asym =
      generate_mode_trajectory(cfg.geometry, asym, t_end, cfg.dt_s);

  const std::string sym_path = out_dir + "/mode_symmetric.csv";
  const std::string asym_path = out_dir + "/mode_asymmetric.csv";
  emit_timeseries(ts_sym, sym_path);
  emit_timeseries(ts_asym, asym_path);
  result.written_files = {sym_path, asym_path};

  metrics["metric.theta3_mean_symmetric_rad"] =
      channel_mean_after(ts_sym, "theta3_rad", 0.0);
  metrics["metric.theta3_mean_asymmetric_rad"] =
      channel_mean_after(ts_asym, "theta3_rad", 0.0);
  metrics["metric.theta3_peak_symmetric_rad"] =
      detail::peak_abs(ts_sym, "theta3_rad");
  metrics["metric.theta3_peak_asymmetric_rad"] =
      detail::peak_abs(ts_asym, "theta3_rad");
  detail::write_manifest(cfg, metrics, out_dir, result);
  return result;
}

/// Fig. 7 reproduction: per-motor torque demand over symmetric 1 Hz cycles.
inline ScenarioResult run_torque_1hz(const ScenarioConfig& cfg,
                                     const std::string& out_dir) {
  const double t_end = cfg.t_end_s > 0.0 ? cfg.t_end_s : 2.0;
  ScenarioResult result;
  std::map<std::string, double> metrics;

  const ModeCommand sym{MotionMode::symmetric, cfg.command_omega_rad_per_s, 0.0};
  const TimeSeries ts =
      motor_load_profile(cfg.geometry, cfg.body, sym, t_end, cfg.dt_s);
  const std::string path = out_dir + "/torque_1hz.csv";
  emit_timeseries(ts, path);
  result.written_files = {path};

  metrics["metric.peak_tau1_nm"] = detail::peak_abs(ts, "tau1_Nm");
  metrics["metric.peak_tau2_nm"] = detail::peak_abs(ts, "tau2_Nm");
  metrics["metric.peak_wire_tension_n"] = detail::peak_abs(ts, "T_wire_N");
  detail::write_manifest(cfg, metrics, out_dir, result);
  return result;
}

/// Straight cruising in symmetric mode; reports mean speed and Strouhal number
/// over the settled window.
inline ScenarioResult run_swim_forward(const ScenarioConfig& cfg,
                                       const std::string& out_dir) {
  const double t_end = cfg.t_end_s > 0.0 ? cfg.t_end_s : 20.0;
  ScenarioResult result;
  std::map<std::string, double> metrics;

  const ModeCommand sym{MotionMode::symmetric, cfg.command_omega_rad_per_s, 0.0};
  const TimeSeries ts =
      simulate_swimming(cfg.geometry, cfg.body, cfg.swim, sym, t_end, cfg.dt_s);
  const std::string path = out_dir + "/swim_forward.csv";
  emit_timeseries(ts, path);
  result.written_files = {path};

  const double window = std::min(0.5 * t_end, 10.0);
  const double mean_u = channel_mean_after(ts, "u_m_per_s", window);
  const double pp = tail_peak_to_peak(ts, cfg.body, window);
  const double freq = cfg.command_omega_rad_per_s / (2.0 * M_PI);
  metrics["metric.mean_speed_m_per_s"] = mean_u;
  metrics["metric.tail_peak_to_peak_m"] = pp;
  metrics["metric.strouhal"] = strouhal_number(pp, freq, mean_u);
  metrics["metric.peak_tau1_nm"] = detail::peak_abs(ts, "tau1_Nm");
  metrics["metric.peak_tau2_nm"] = detail::peak_abs(ts, "tau2_Nm");
  detail::write_manifest(cfg, metrics, out_dir, result);
  return result;
}

/// Steady turning in asymmetric mode; fits the settled path to a circle.
inline ScenarioResult run_turn(const ScenarioConfig& cfg,
                               const std::string& out_dir) {
  const double t_end = cfg.t_end_s > 0.0 ? cfg.t_end_s : 40.0;
  ScenarioResult result;
  std::map<std::string, double> metrics;

  const ModeCommand asym{MotionMode::asymmetric, cfg.command_omega_rad_per_s,
                         cfg.command_theta2_hold_rad};
  const TimeSeries ts =
      simulate_swimming(cfg.geometry, cfg.body, cfg.swim, asym, t_end, cfg.dt_s);
  const std::string path = out_dir + "/turn.csv";
  emit_timeseries(ts, path);
  result.written_files = {path};

  const double window = std::min(0.5 * t_end, 15.0);
  const CircleFit fit = fit_circle(ts, window);
  const double mean_r = channel_mean_after(ts, "r_rad_per_s", window);
  metrics["metric.turn_radius_m"] = fit.radius;
  metrics["metric.yaw_rate_deg_per_s"] = mean_r * 180.0 / M_PI;
  metrics["metric.mean_speed_m_per_s"] = channel_mean_after(ts, "u_m_per_s", window);
  metrics["metric.peak_tau1_nm"] = detail::peak_abs(ts, "tau1_Nm");
  metrics["metric.peak_tau2_nm"] = detail::peak_abs(ts, "tau2_Nm");
  detail::write_manifest(cfg, metrics, out_dir, result);
  return result;
}

/// Closed-loop heading regulation: step to the configured target heading.
inline ScenarioResult run_heading_step(const ScenarioConfig& cfg,
                                       const std::string& out_dir) {
  const double t_end = cfg.t_end_s > 0.0 ? cfg.t_end_s : 30.0;
  ScenarioResult result;
  std::map<std::string, double> metrics;

  const ClosedLoopResult res = closed_loop_simulate(
      cfg.geometry, cfg.body, cfg.swim, cfg.controller, t_end, cfg.dt_s);
  const std::string path = out_dir + "/heading_step.csv";
  emit_timeseries(res.series, path);

  TimeSeries samples({"t_s", "psi_robot_rad"});
  for (const HeadingSample& hs : res.heading_samples) {
    Eigen::Vector2d row(hs.t_mean_s, hs.psi_robot_rad);
    samples.append(row);
  }
  const std::string samples_path = out_dir + "/heading_samples.csv";
  emit_timeseries(samples, samples_path);
  result.written_files = {path, samples_path};

  // steady-state error: phase-averaged wrapped error over the final 5 s
  const auto& ts = res.series;
  double err_acc = 0.0;
  long n = 0;
  const double tail_start = std::max(0.0, t_end - 5.0);
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    if (ts.column("t_s")[i] < tail_start) continue;
    err_acc += wrap_angle(cfg.controller.psi_target_rad - ts.column("psi_rad")[i]);
    ++n;
  }
  const double ss_error = n > 0 ? err_acc / static_cast<double>(n) : 0.0;

  // response time: first update after which every sampled error stays small
  double response_time = t_end;
  for (std::size_t i = res.heading_samples.size(); i-- > 0;) {
    const double e = std::abs(wrap_angle(cfg.controller.psi_target_rad -
                                         res.heading_samples[i].psi_robot_rad));
    if (e > 0.15) break;
    response_time = res.heading_samples[i].t_mean_s;
  }

  metrics["metric.steady_state_error_rad"] = ss_error;
  metrics["metric.response_time_s"] = response_time;
  metrics["metric.maneuver_turn_rate_deg_per_s"] =
      detail::maneuver_turn_rate(res, cfg.controller) * 180.0 / M_PI;
  detail::write_manifest(cfg, metrics, out_dir, result);
  return result;
}

/// Fits thrust/steer coefficients against the cruise-speed and turn-radius
/// targets and writes a ready-to-use calibrated config.
inline ScenarioResult run_calibrate(const ScenarioConfig& cfg,
                                    const std::string& out_dir) {
  ScenarioResult result;
  std::map<std::string, double> metrics;

  CalibrationTargets targets;
  targets.omega = cfg.command_omega_rad_per_s;
  const SwimParams fitted =
      calibrate(cfg.geometry, cfg.body, cfg.swim, targets, cfg.dt_s);

  ScenarioConfig calibrated = cfg;
  calibrated.swim = fitted;
  const std::string cfg_path = out_dir + "/swim_calibrated.cfg";
  write_text_file(serialize_config(calibrated), cfg_path);
  result.written_files = {cfg_path};

  // verification pass with the fitted coefficients
  const ModeCommand sym{MotionMode::symmetric, targets.omega, 0.0};
  const TimeSeries cruise = simulate_swimming(cfg.geometry, cfg.body, fitted,
                                              sym, 20.0, cfg.dt_s);
  const ModeCommand asym{MotionMode::asymmetric, targets.omega,
                         targets.turn_theta2_hold};
  const TimeSeries turning = simulate_swimming(cfg.geometry, cfg.body, fitted,
                                               asym, 40.0, cfg.dt_s);
  const double mean_u = channel_mean_after(cruise, "u_m_per_s", 10.0);
  const double pp = tail_peak_to_peak(cruise, cfg.body, 10.0);
  const CircleFit fit = fit_circle(turning, 15.0);
  metrics["metric.thrust_coeff"] = fitted.thrust_coeff;
  metrics["metric.steer_coeff"] = fitted.steer_coeff;
  metrics["metric.mean_speed_m_per_s"] = mean_u;
  metrics["metric.strouhal"] =
      strouhal_number(pp, targets.omega / (2.0 * M_PI), mean_u);
  metrics["metric.turn_radius_m"] = fit.radius;
  metrics["metric.yaw_rate_deg_per_s"] =
      channel_mean_after(turning, "r_rad_per_s", 15.0) * 180.0 / M_PI;
  detail::write_manifest(calibrated, metrics, out_dir, result);
  return result;
}

struct ScenarioEntry {
  std::string name;
  std::string description;
  ScenarioResult (*run)(const ScenarioConfig&, const std::string&);
};

inline const std::vector<ScenarioEntry>& scenario_registry() {
  static const std::vector<ScenarioEntry> registry = {
      {"mode-sweep", "open-loop reel angle/rate traces for both drive modes",
       &run_mode_sweep},
      {"torque-1hz", "per-motor torque demand over symmetric 1 Hz cycles",
       &run_torque_1hz},
      {"swim-forward", "straight cruising; mean speed and Strouhal number",
       &run_swim_forward},
      {"turn", "steady asymmetric-mode turning; fitted radius and yaw rate",
       &run_turn},
      {"heading-step", "closed-loop heading step; settling and turn rate",
       &run_heading_step},
      {"calibrate", "fit thrust/steer coefficients and write a calibrated config",
       &run_calibrate},
  };
  return registry;
}

inline ScenarioResult run_scenario(const std::string& name,
                                   const ScenarioConfig& cfg,
                                   const std::string& out_dir) {
  for (const ScenarioEntry& entry : scenario_registry()) {
    if (entry.name == name) return entry.run(cfg, out_dir);
  }
  throw ConfigError("unknown scenario: " + name);
}

}  // namespace finsim
