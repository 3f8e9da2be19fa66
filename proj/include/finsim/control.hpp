#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "finsim/errors.hpp"
#include "finsim/mechanism.hpp"
#include "finsim/numerics.hpp"
#include "finsim/swim.hpp"
#include "finsim/time_series.hpp"

namespace finsim {

struct ControllerConfig {
  double k_p = 1.0;                       // rad command per rad error
  double psi_target_rad = M_PI;
  double omega_cmd_rad_per_s = 2.0 * M_PI;
  double theta2_limit_rad = M_PI / 2.0;

  void validate() const {
    if (!(k_p > 0.0)) throw ConfigError("controller: k_p must be positive");
    if (!(theta2_limit_rad > 0.0 && theta2_limit_rad <= M_PI)) {
      throw ConfigError("controller: theta2_limit_rad must lie in (0, pi]");
    }
    if (psi_target_rad <= -M_PI || psi_target_rad > M_PI) {
      throw ConfigError("controller: psi_target_rad must lie in (-pi, pi]");
    }
  }
};

struct HeadingSample {
  double t_mean_s = 0.0;
  double psi_robot_rad = 0.0;
};

/// Timestamps where the rotating wheel passes its mean position (theta1 a
/// multiple of 2*pi), located by linear interpolation between samples.
inline std::vector<double> detect_mean_crossing(const TimeSeries& theta1_series) {
  std::vector<double> crossings;
  const Eigen::Index jt = theta1_series.index("t_s");
  const Eigen::Index j1 = theta1_series.index("theta1_rad");
  const double two_pi = 2.0 * M_PI;
  for (Eigen::Index i = 0; i + 1 < theta1_series.rows(); ++i) {
    const double t0 = theta1_series.row(i)[jt], t1 = theta1_series.row(i + 1)[jt];
    const double a0 = theta1_series.row(i)[j1], a1 = theta1_series.row(i + 1)[j1];
    if (a0 == a1) continue;
    // multiples of 2*pi inside [a0, a1) (or (a1, a0] when decreasing)
    const double lo = std::min(a0, a1), hi = std::max(a0, a1);
    long k_first = static_cast<long>(std::ceil(lo / two_pi - 1e-12));
    for (long k = k_first; k * two_pi < hi - 1e-12 * std::max(1.0, hi); ++k) {
      const double target = k * two_pi;
      if (a0 < a1 && (target < a0 - 1e-12 || target >= a1)) continue;
      if (a0 > a1 && (target > a0 + 1e-12 || target <= a1)) continue;
      crossings.push_back(t0 + (t1 - t0) * (target - a0) / (a1 - a0));
    }
  }
  return crossings;
}

/// Proportional law with shortest-path error wrap and saturation.
inline double control_update(const ControllerConfig& cfg, const HeadingSample& sample) {
  const double error = wrap_angle(cfg.psi_target_rad - sample.psi_robot_rad);
  return std::clamp(cfg.k_p * error, -cfg.theta2_limit_rad, cfg.theta2_limit_rad);
}

struct ClosedLoopResult {
  TimeSeries series;  // t, pose, rates, theta2 command
  std::vector<HeadingSample> heading_samples;
};

/// Closed-loop heading regulation: asymmetric mode with the held wheel angle
/// refreshed only at mean-crossing instants (zero-order hold in between).
inline ClosedLoopResult closed_loop_simulate(const MechanismGeometry& g,
                                             const BodyParams& bp, const SwimParams& sp,
                                             const ControllerConfig& cfg, double t_end,
                                             double dt) {
  g.validate();
  bp.validate();
  sp.validate();
  cfg.validate();
  if (!(dt > 0.0) || !(t_end > 0.0)) {
    throw SimulationError("closed_loop_simulate: t_end and dt must be positive");
  }
  const double omega = cfg.omega_cmd_rad_per_s;
  if (omega == 0.0) {
    throw SimulationError("closed_loop_simulate: omega_cmd must be non-zero");
  }
  const double period = std::abs(2.0 * M_PI / omega);
  const long n_steps = std::lround(t_end / dt);

  ClosedLoopResult result;
  result.series = TimeSeries({"t_s", "x_m", "y_m", "psi_rad", "u_m_per_s",
                              "r_rad_per_s", "theta2_cmd_rad"});
  result.series.reserve(static_cast<std::size_t>(n_steps) + 1);

  SwimState st;
  double theta2_cmd = 0.0;
  double next_crossing = 0.0;
  double prev_adot = 0.0;
  std::optional<double> prev_theta3;
  Eigen::VectorXd row(7);

  for (long k = 0; k <= n_steps; ++k) {
    const double t = dt * static_cast<double>(k);
    if (t >= next_crossing - 0.5 * dt) {
      const HeadingSample sample{next_crossing, st.psi_rad};
      const double updated = control_update(cfg, sample);
      if (updated != theta2_cmd) prev_theta3.reset();  // command step: re-anchor branch
      theta2_cmd = updated;
      result.heading_samples.push_back(sample);
      next_crossing += period;
    }

    const MechanismState mech =
        mechanism_state(g, omega * t, theta2_cmd, omega, 0.0, prev_theta3);
    prev_theta3 = mech.theta3;
    auto [a, adot] =
        attack_angle_from_reel(bp, mech.theta3, mech.theta3_dot, g.reel_radius_m);
    const double addot = (k == 0) ? 0.0 : (adot - prev_adot) / dt;
    prev_adot = adot;

    row << t, st.x_m, st.y_m, st.psi_rad, st.u_m_per_s, st.r_rad_per_s, theta2_cmd;
    result.series.append(row);

    if (k < n_steps) {
      const TailReaction tr = tail_reaction(sp, bp, {a, adot, addot});
      st = step_swim(sp, st, tr.f_thrust_n, tr.m_yaw_nm, dt);
    }
  }
  return result;
}

}  // namespace finsim
