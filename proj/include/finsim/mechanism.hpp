#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>

#include "finsim/errors.hpp"
#include "finsim/numerics.hpp"
#include "finsim/time_series.hpp"

namespace finsim {

/// 2-DoF crank-slider geometry. Wheel 2 sits at the origin, the reel axis at
/// (L2, 0) and wheel 1 at (L1 + L2, 0). Wheel joints lie at angle theta_i on
/// their wheels; the reel crank reference points the opposite way, so the reel
/// joint is at (L2 - R_b cos theta3, -R_b sin theta3). With that convention the
/// closed-form reel angle keeps the three joints exactly collinear.
struct MechanismGeometry {
  double wheel_radius_m = 0.010;   // R_a
  double reel_radius_m = 0.020;    // R_b
  double offset_l1_m = 0.030;
  double offset_l2_m = 0.210;

  void validate() const {
    if (!(wheel_radius_m > 0.0 && reel_radius_m > 0.0 && offset_l1_m > 0.0 &&
          offset_l2_m > 0.0)) {
      throw ConfigError("geometry: all lengths must be strictly positive");
    }
    if (!(wheel_radius_m < reel_radius_m)) {
      throw ConfigError("geometry: wheel_radius_m must be < reel_radius_m");
    }
    if (!(wheel_radius_m < std::min(offset_l1_m, offset_l2_m))) {
      throw ConfigError("geometry: wheel_radius_m must be < min(offset_l1_m, offset_l2_m)");
    }
  }
};

struct MechanismState {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta1_dot = 0.0;
  double theta2_dot = 0.0;
  double theta3 = 0.0;
  double theta3_dot = 0.0;
  double theta_rod = 0.0;
  double d1 = 0.0;  // |reel joint -> wheel joint 1| along the rod
  double d2 = 0.0;  // |reel joint -> wheel joint 2| along the rod
};

enum class MotionMode { symmetric, asymmetric };

struct ModeCommand {
  MotionMode mode = MotionMode::symmetric;
  double omega = 2.0 * M_PI;     // rad/s
  double theta2_hold = 0.0;      // rad, asymmetric only

  void validate() const {
    if (!std::isfinite(omega)) throw ConfigError("mode: omega must be finite");
    if (theta2_hold < -M_PI || theta2_hold > M_PI) {
      throw ConfigError("mode: theta2_hold must lie in [-pi, pi]");
    }
  }
};

inline Eigen::Vector2d wheel1_joint(const MechanismGeometry& g, double theta1) {
  return {g.offset_l1_m + g.offset_l2_m + g.wheel_radius_m * std::cos(theta1),
          g.wheel_radius_m * std::sin(theta1)};
}

inline Eigen::Vector2d wheel2_joint(const MechanismGeometry& g, double theta2) {
  return {g.wheel_radius_m * std::cos(theta2), g.wheel_radius_m * std::sin(theta2)};
}

inline Eigen::Vector2d reel_joint(const MechanismGeometry& g, double theta3) {
  return {g.offset_l2_m - g.reel_radius_m * std::cos(theta3),
          -g.reel_radius_m * std::sin(theta3)};
}

namespace detail {

struct LineCoeffs {
  double a, b, c;  // a sin(theta3) + b cos(theta3) = c
};

inline LineCoeffs collinearity_coeffs(const MechanismGeometry& g, double theta1,
                                      double theta2) {
  const double ra = g.wheel_radius_m, rb = g.reel_radius_m;
  const double l1 = g.offset_l1_m, l2 = g.offset_l2_m;
  return {ra * rb * (std::cos(theta1) - std::cos(theta2)) + rb * (l1 + l2),
          ra * rb * (std::sin(theta2) - std::sin(theta1)),
          ra * ra * std::sin(theta1 - theta2) -
              ra * (std::sin(theta1) * l2 + std::sin(theta2) * l1)};
}

}  // namespace detail

/// Reel angle from the two wheel angles (principal arcsin branch).
inline double solve_reel_angle(const MechanismGeometry& g, double theta1, double theta2) {
  const auto [a, b, c] = detail::collinearity_coeffs(g, theta1, theta2);
  const double mag = std::hypot(a, b);
  const double q = c / mag;
  if (std::abs(q) > 1.0 + 1e-12) {
    throw UnreachableConfiguration(
        "unreachable configuration: theta1 = " + std::to_string(theta1) +
        ", theta2 = " + std::to_string(theta2) +
        ", C/sqrt(A^2+B^2) = " + std::to_string(q));
  }
  const double arg = std::clamp(q, -1.0, 1.0);
  return wrap_angle(std::asin(arg) - std::atan2(b, a));
}

/// Branch-aware variant: of the two roots of the collinearity equation,
/// returns the one closer to theta3_prev. The physical reel moves
/// continuously, so trajectory generation tracks the previous sample.
inline double solve_reel_angle_near(const MechanismGeometry& g, double theta1,
                                    double theta2, double theta3_prev) {
  const auto [a, b, c] = detail::collinearity_coeffs(g, theta1, theta2);
  const double q = std::clamp(c / std::hypot(a, b), -1.0, 1.0);
  const double base = std::asin(q);
  const double shift = std::atan2(b, a);
  const double cand1 = wrap_angle(base - shift);
  const double cand2 = wrap_angle(M_PI - base - shift);
  const double principal = solve_reel_angle(g, theta1, theta2);  // domain check
  (void)principal;
  return std::abs(wrap_angle(cand1 - theta3_prev)) <=
                 std::abs(wrap_angle(cand2 - theta3_prev))
             ? cand1
             : cand2;
}

/// Orientation of the connecting rod (wheel joint 2 -> wheel joint 1).
inline double rod_orientation(const MechanismGeometry& g, double theta1, double theta2) {
  const Eigen::Vector2d diff = wheel1_joint(g, theta1) - wheel2_joint(g, theta2);
  if (diff.norm() < 1e-12) {
    throw SimulationError("rod_orientation: wheel joints coincide");
  }
  return std::atan2(diff.y(), diff.x());
}

/// Full kinematic state at (theta1, theta2) with motor rates. Normal-to-rod
/// velocities at the two wheel joints fix an affine normal-velocity field
/// along the rod; evaluating it at the reel joint yields theta3_dot.
inline MechanismState mechanism_state(const MechanismGeometry& g, double theta1,
                                      double theta2, double theta1_dot,
                                      double theta2_dot,
                                      std::optional<double> theta3_prev = std::nullopt) {
  MechanismState st;
  st.theta1 = theta1;
  st.theta2 = theta2;
  st.theta1_dot = theta1_dot;
  st.theta2_dot = theta2_dot;
  st.theta3 = theta3_prev ? solve_reel_angle_near(g, theta1, theta2, *theta3_prev)
                          : solve_reel_angle(g, theta1, theta2);
  st.theta_rod = rod_orientation(g, theta1, theta2);

  const Eigen::Vector2d p1 = wheel1_joint(g, theta1);
  const Eigen::Vector2d p2 = wheel2_joint(g, theta2);
  const Eigen::Vector2d p3 = reel_joint(g, st.theta3);
  const Eigen::Vector2d tangent{std::cos(st.theta_rod), std::sin(st.theta_rod)};
  const Eigen::Vector2d normal{-std::sin(st.theta_rod), std::cos(st.theta_rod)};

  const double s1 = (p1 - p3).dot(tangent);
  const double s2 = (p2 - p3).dot(tangent);
  st.d1 = std::abs(s1);
  st.d2 = std::abs(s2);
  if (st.d1 + st.d2 < 1e-9) {
    throw SimulationError("mechanism_state: wheel joints collapse onto the reel joint");
  }

  const double ra = g.wheel_radius_m, rb = g.reel_radius_m;
  const double v1n = theta1_dot * ra * std::cos(theta1 - st.theta_rod);
  const double v2n = theta2_dot * ra * std::cos(theta2 - st.theta_rod);
  const double v3n = (v1n * (-s2) + v2n * s1) / (s1 - s2);

  // d(reel joint)/d(theta3) projected on the rod normal.
  const double e3n = rb * (std::sin(st.theta3) * normal.x() -
                           std::cos(st.theta3) * normal.y());
  if (std::abs(e3n) < rb * 1e-6) {
    throw TransmissionSingularity(
        "transmission singularity: rod normal to reel crank at theta1 = " +
        std::to_string(theta1));
  }
  st.theta3_dot = v3n / e3n;
  return st;
}

/// Reel angular velocity for a state whose angles are already known.
inline double reel_velocity(const MechanismGeometry& g, const MechanismState& state) {
  return mechanism_state(g, state.theta1, state.theta2, state.theta1_dot,
                         state.theta2_dot, state.theta3)
      .theta3_dot;
}

namespace detail {

/// Quasi-static torque split for a signed reel load torque (N*m at the reel
/// axis). Frictionless rigid-rod statics: the slots transmit rod-normal
/// forces only, so the rod pushes the reel pin along its normal; the moment
/// balance about the reel joint distributes the load across the wheels.
inline std::pair<double, double> split_reel_load(const MechanismGeometry& g,
                                                 const MechanismState& st,
                                                 double reel_load_torque) {
  const double ra = g.wheel_radius_m, rb = g.reel_radius_m;
  const Eigen::Vector2d p1 = wheel1_joint(g, st.theta1);
  const Eigen::Vector2d p2 = wheel2_joint(g, st.theta2);
  const Eigen::Vector2d p3 = reel_joint(g, st.theta3);
  const Eigen::Vector2d tangent{std::cos(st.theta_rod), std::sin(st.theta_rod)};
  const Eigen::Vector2d normal{-std::sin(st.theta_rod), std::cos(st.theta_rod)};
  const double s1 = (p1 - p3).dot(tangent);
  const double s2 = (p2 - p3).dot(tangent);

  const double e3n = rb * (std::sin(st.theta3) * normal.x() -
                           std::cos(st.theta3) * normal.y());
  if (std::abs(e3n) < rb * 1e-6) {
    throw TransmissionSingularity("split_reel_load: transmission singular");
  }
  const double total_normal_force = reel_load_torque / e3n;
  const double f1 = total_normal_force * (-s2) / (s1 - s2);
  const double f2 = total_normal_force * s1 / (s1 - s2);
  const double tau1 = f1 * ra * std::cos(st.theta1 - st.theta_rod);
  const double tau2 = f2 * ra * std::cos(st.theta2 - st.theta_rod);
  return {tau1, tau2};
}

}  // namespace detail

/// Motor torques holding a wire tension T_wire (N, non-negative) applied at
/// the reel radius. Satisfies tau1*theta1_dot + tau2*theta2_dot =
/// T_wire*R_b*theta3_dot (ideal-mechanism power balance).
inline std::pair<double, double> split_motor_torques(const MechanismGeometry& g,
                                                     const MechanismState& state,
                                                     double wire_tension_n) {
  if (wire_tension_n < 0.0) {
    throw SimulationError("split_motor_torques: wire tension cannot be negative");
  }
  return detail::split_reel_load(g, state, wire_tension_n * g.reel_radius_m);
}

/// Motor angle schedules for the two motion modes.
inline void mode_angles(const ModeCommand& cmd, double t, double& theta1,
                        double& theta2, double& theta1_dot, double& theta2_dot) {
  theta1 = cmd.omega * t;
  theta1_dot = cmd.omega;
  if (cmd.mode == MotionMode::symmetric) {
    theta2 = cmd.omega * t;
    theta2_dot = cmd.omega;
  } else {
    theta2 = cmd.theta2_hold;
    theta2_dot = 0.0;
  }
}

/// Sampled (theta1, theta2, theta3, theta3_dot) along a mode trajectory.
inline TimeSeries generate_mode_trajectory(const MechanismGeometry& g,
                                           const ModeCommand& cmd, double t_end,
                                           double dt) {
  g.validate();
  cmd.validate();
  if (!(dt > 0.0) || !(t_end > 0.0)) {
    throw SimulationError("generate_mode_trajectory: t_end and dt must be positive");
  }
  const long n_steps = std::lround(t_end / dt);
  TimeSeries out({"t_s", "theta1_rad", "theta2_rad", "theta3_rad",
                  "theta3dot_rad_per_s"});
  out.reserve(static_cast<std::size_t>(n_steps) + 1);

  std::optional<double> prev_theta3;
  Eigen::VectorXd row(5);
  for (long k = 0; k <= n_steps; ++k) {
    const double t = dt * static_cast<double>(k);
    double th1, th2, th1d, th2d;
    mode_angles(cmd, t, th1, th2, th1d, th2d);
    try {
      const MechanismState st = mechanism_state(g, th1, th2, th1d, th2d, prev_theta3);
      prev_theta3 = st.theta3;
      row << t, th1, th2, st.theta3, st.theta3_dot;
      out.append(row);
    } catch (const SimulationError& e) {
      throw SimulationError(std::string(e.what()) + " (at t = " + std::to_string(t) + " s)");
    }
  }
  return out;
}

}  // namespace finsim
