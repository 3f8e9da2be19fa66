#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "finsim/errors.hpp"
#include "finsim/mechanism.hpp"
#include "finsim/numerics.hpp"
#include "finsim/time_series.hpp"

namespace finsim {

/// Constant-curvature elastic tail parameters. The diameter profile is a
/// linear taper from diameter_root_m at s = 0 to diameter_tip_m at s = L.
struct BodyParams {
  double spine_length_m = 0.25;            // L
  double wire_offset_m = 0.010;            // d
  double stiffness_nm_per_rad = 0.248;     // K_eq
  double damping_kgm2_per_s_rad = 0.02;    // C_damp
  double drag_coeff = 1.2;                 // C_d
  double water_density_kg_per_m3 = 1000.0;
  double fin_area_m2 = 0.016;
  double added_mass_coeff = 1.0;           // multiplies the rho*D(s) integrand
  double diameter_root_m = 0.060;
  double diameter_tip_m = 0.015;
  std::vector<double> section_masses_kg{0.060, 0.060, 0.060};
  std::vector<double> section_com_arclengths_m{0.25 / 6.0, 0.25 / 2.0, 5.0 * 0.25 / 6.0};
  int arc_grid_points = 101;

  double diameter(double s) const {
    return diameter_root_m + (diameter_tip_m - diameter_root_m) * s / spine_length_m;
  }

  Grid1D arc_grid() const { return {0.0, spine_length_m, arc_grid_points}; }

  void validate() const {
    if (!(spine_length_m > 0.0 && wire_offset_m > 0.0 && stiffness_nm_per_rad > 0.0)) {
      throw ConfigError("body: L, d and K_eq must be strictly positive");
    }
    if (damping_kgm2_per_s_rad < 0.0 || drag_coeff < 0.0 || fin_area_m2 < 0.0 ||
        water_density_kg_per_m3 < 0.0 || added_mass_coeff < 0.0) {
      throw ConfigError("body: damping, drag, density and fin area must be >= 0");
    }
    if (diameter_root_m < 0.0 || diameter_tip_m < 0.0) {
      throw ConfigError("body: diameter profile must be non-negative");
    }
    if (section_masses_kg.size() != section_com_arclengths_m.size()) {
      throw ConfigError("body: section mass and CoM lists must have equal length");
    }
    for (double c : section_com_arclengths_m) {
      if (c < 0.0 || c > spine_length_m) {
        throw ConfigError("body: section CoM arc lengths must lie in [0, L]");
      }
    }
    Grid1D grid = arc_grid();
    grid.validate();
  }
};

struct BodyState {
  double theta_a = 0.0;
  double theta_a_dot = 0.0;
  double theta_a_ddot = 0.0;
};

struct LoadReport {
  double m_wire_nm = 0.0;
  double t_wire_n = 0.0;
  double m_elastic_nm = 0.0;
  double q_drag_nm = 0.0;
  double q_damp_nm = 0.0;
  double kinetic_energy_j = 0.0;
  double potential_energy_j = 0.0;
};

/// Attack angle and rate from the reel motion: theta_a = R_b * theta3 / d.
inline std::pair<double, double> attack_angle_from_reel(const BodyParams& p,
                                                        double theta3,
                                                        double theta3_dot,
                                                        double reel_radius_m) {
  const double theta_a = reel_radius_m * theta3 / p.wire_offset_m;
  if (std::abs(theta_a) >= M_PI) {
    throw SimulationError("attack_angle_from_reel: |theta_a| >= pi (arc self-intersects)");
  }
  return {theta_a, reel_radius_m * theta3_dot / p.wire_offset_m};
}

namespace detail {

// Switch to 4th-order Taylor series below this curvature; the closed form
// divides by theta_a.
constexpr double kStraightTailEps = 1e-4;

}  // namespace detail

/// Tangent angle of the arc at arc length s.
inline double tangent_angle(const BodyParams& p, double theta_a, double s) {
  return theta_a * s / p.spine_length_m;
}

/// Position of the arc point at arc length s, tail-root frame (x along the
/// undeflected spine, y lateral).
inline Eigen::Vector2d body_point(const BodyParams& p, double theta_a, double s) {
  if (s < 0.0 || s > p.spine_length_m) {
    throw SimulationError("body_point: s outside [0, L]");
  }
  const double L = p.spine_length_m;
  const double sigma = s / L;
  const double a = theta_a;
  if (std::abs(a) < detail::kStraightTailEps) {
    const double as = a * sigma;
    return {s * (1.0 - as * as / 6.0 + as * as * as * as / 120.0),
            0.5 * s * s * a / L * (1.0 - as * as / 12.0 + as * as * as * as / 360.0)};
  }
  const double phi = a * sigma;
  return {L / a * std::sin(phi), L / a * (1.0 - std::cos(phi))};
}

struct ShapeJacobian {
  Eigen::Vector2d j;      // d r / d theta_a
  Eigen::Vector2d dj_da;  // d^2 r / d theta_a^2
};

/// Analytic partials of body_point with respect to theta_a.
inline ShapeJacobian shape_jacobian(const BodyParams& p, double theta_a, double s) {
  if (s < 0.0 || s > p.spine_length_m) {
    throw SimulationError("shape_jacobian: s outside [0, L]");
  }
  const double L = p.spine_length_m;
  const double sigma = s / L;
  const double a = theta_a;
  ShapeJacobian out;
  if (std::abs(a) < detail::kStraightTailEps) {
    const double as = a * sigma;
    out.j = {s * sigma * sigma * a * (-1.0 / 3.0 + as * as / 30.0),
             0.5 * s * s / L * (1.0 - as * as / 4.0 + as * as * as * as / 72.0)};
    out.dj_da = {s * sigma * sigma * (-1.0 / 3.0 + as * as / 10.0),
                 s * s * sigma * sigma * a / L * (-0.25 + as * as / 36.0)};
    return out;
  }
  const double phi = a * sigma;
  const double sp = std::sin(phi), cp = std::cos(phi);
  out.j = {L * (phi * cp - sp) / (a * a), L * (phi * sp - (1.0 - cp)) / (a * a)};
  out.dj_da = {L * (2.0 * sp - 2.0 * phi * cp - phi * phi * sp) / (a * a * a),
               L * (phi * phi * cp - 2.0 * phi * sp + 2.0 - 2.0 * cp) / (a * a * a)};
  return out;
}

struct KineticEnergy {
  double t_j = 0.0;            // kinetic energy
  double i_eff = 0.0;          // generalized inertia about theta_a
  double di_dtheta = 0.0;      // d i_eff / d theta_a
};

/// Generalized inertia: added-mass integral rho*D(s)*|J|^2 over the spine
/// plus the lumped section masses, with its analytic theta_a derivative.
inline KineticEnergy kinetic_energy(const BodyParams& p, double theta_a,
                                    double theta_a_dot) {
  KineticEnergy out;
  const double rho = p.added_mass_coeff * p.water_density_kg_per_m3;
  out.i_eff = rho * simpson_integrate(
                        [&](double s) {
                          return p.diameter(s) * shape_jacobian(p, theta_a, s).j.squaredNorm();
                        },
                        p.arc_grid());
  out.di_dtheta = rho * simpson_integrate(
                            [&](double s) {
                              const ShapeJacobian sj = shape_jacobian(p, theta_a, s);
                              return p.diameter(s) * 2.0 * sj.j.dot(sj.dj_da);
                            },
                            p.arc_grid());
  for (std::size_t i = 0; i < p.section_masses_kg.size(); ++i) {
    const ShapeJacobian sj = shape_jacobian(p, theta_a, p.section_com_arclengths_m[i]);
    out.i_eff += p.section_masses_kg[i] * sj.j.squaredNorm();
    out.di_dtheta += p.section_masses_kg[i] * 2.0 * sj.j.dot(sj.dj_da);
  }
  out.t_j = 0.5 * theta_a_dot * theta_a_dot * out.i_eff;
  return out;
}

/// Quasi-steady fluid drag torque; opposes the motion for any state.
inline double drag_torque(const BodyParams& p, double theta_a, double theta_a_dot) {
  const double speed_factor = theta_a_dot * std::abs(theta_a_dot);
  if (speed_factor == 0.0) return 0.0;
  const double body_part = simpson_integrate(
      [&](double s) {
        const double jn = shape_jacobian(p, theta_a, s).j.norm();
        return p.diameter(s) * jn * jn * jn;
      },
      p.arc_grid());
  const double jl = shape_jacobian(p, theta_a, p.spine_length_m).j.norm();
  const double fin_part = p.fin_area_m2 * jl * jl * jl;
  return -0.5 * p.water_density_kg_per_m3 * p.drag_coeff * speed_factor *
         (body_part + fin_part);
}

inline double damping_torque(const BodyParams& p, double theta_a_dot) {
  return -p.damping_kgm2_per_s_rad * theta_a_dot;
}

inline double potential_energy(const BodyParams& p, double theta_a) {
  return 0.5 * p.stiffness_nm_per_rad * theta_a * theta_a;
}

/// Wire moment and tendon tension for one state:
/// M_wire = I*a'' + (1/2)(dI/da)*a'^2 + K_eq*a - Q_drag - Q_damp.
inline LoadReport load_report(const BodyParams& p, const BodyState& st) {
  if (std::abs(st.theta_a) >= M_PI) {
    throw SimulationError("load_report: |theta_a| >= pi");
  }
  LoadReport rep;
  const KineticEnergy ke = kinetic_energy(p, st.theta_a, st.theta_a_dot);
  rep.kinetic_energy_j = ke.t_j;
  rep.potential_energy_j = potential_energy(p, st.theta_a);
  rep.m_elastic_nm = p.stiffness_nm_per_rad * st.theta_a;
  rep.q_drag_nm = drag_torque(p, st.theta_a, st.theta_a_dot);
  rep.q_damp_nm = damping_torque(p, st.theta_a_dot);
  rep.m_wire_nm = ke.i_eff * st.theta_a_ddot +
                  0.5 * ke.di_dtheta * st.theta_a_dot * st.theta_a_dot +
                  rep.m_elastic_nm - rep.q_drag_nm - rep.q_damp_nm;
  rep.t_wire_n = rep.m_wire_nm / p.wire_offset_m;
  return rep;
}

struct BodyTrajectory {
  double dt = 0.0;
  std::vector<BodyState> samples;
};

/// Inverse dynamics along a uniformly sampled trajectory.
inline std::vector<LoadReport> inverse_dynamics(const BodyParams& p,
                                                const BodyTrajectory& traj) {
  p.validate();
  if (!(traj.dt > 0.0)) {
    throw SimulationError("inverse_dynamics: non-uniform or non-positive time grid");
  }
  std::vector<LoadReport> out;
  out.reserve(traj.samples.size());
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    LoadReport rep = load_report(p, traj.samples[i]);
    if (!std::isfinite(rep.m_wire_nm) || !std::isfinite(rep.t_wire_n)) {
      throw SimulationError("inverse_dynamics: non-finite load at t = " +
                            std::to_string(traj.dt * static_cast<double>(i)));
    }
    out.push_back(rep);
  }
  return out;
}

/// Attack-angle trajectory implied by a mechanism mode trajectory. The
/// angular acceleration is obtained by central time-differencing of the
/// analytic rate sequence (one-sided at the ends).
inline BodyTrajectory attack_trajectory(const BodyParams& p,
                                        const MechanismGeometry& g,
                                        const TimeSeries& mode_traj) {
  BodyTrajectory out;
  out.dt = mode_traj.dt();
  const Eigen::VectorXd theta3 = mode_traj.column("theta3_rad");
  const Eigen::VectorXd theta3_dot = mode_traj.column("theta3dot_rad_per_s");
  const Eigen::Index n = theta3.size();
  out.samples.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [a, adot] = attack_angle_from_reel(p, theta3[i], theta3_dot[i], g.reel_radius_m);
    out.samples[static_cast<std::size_t>(i)] = {a, adot, 0.0};
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double addot;
    if (i == 0) {
      addot = (out.samples[1].theta_a_dot - out.samples[0].theta_a_dot) / out.dt;
    } else if (i == n - 1) {
      addot = (out.samples[static_cast<std::size_t>(n - 1)].theta_a_dot -
               out.samples[static_cast<std::size_t>(n - 2)].theta_a_dot) /
              out.dt;
    } else {
      addot = (out.samples[static_cast<std::size_t>(i + 1)].theta_a_dot -
               out.samples[static_cast<std::size_t>(i - 1)].theta_a_dot) /
              (2.0 * out.dt);
    }
    out.samples[static_cast<std::size_t>(i)].theta_a_ddot = addot;
  }
  return out;
}

/// Motor torques, tendon tension and attack angle over a mode trajectory.
inline TimeSeries motor_load_profile(const MechanismGeometry& g, const BodyParams& p,
                                     const ModeCommand& cmd, double t_end, double dt) {
  p.validate();
  const TimeSeries mode_traj = generate_mode_trajectory(g, cmd, t_end, dt);
  const BodyTrajectory body_traj = attack_trajectory(p, g, mode_traj);
  const std::vector<LoadReport> loads = inverse_dynamics(p, body_traj);

  TimeSeries out({"t_s", "tau1_Nm", "tau2_Nm", "T_wire_N", "theta_a_rad"});
  out.reserve(static_cast<std::size_t>(mode_traj.rows()));
  Eigen::VectorXd row(5);
  std::optional<double> prev_theta3;
  for (Eigen::Index i = 0; i < mode_traj.rows(); ++i) {
    const double t = mode_traj.row(i)[0];
    double th1, th2, th1d, th2d;
    mode_angles(cmd, t, th1, th2, th1d, th2d);
    const MechanismState st = mechanism_state(g, th1, th2, th1d, th2d, prev_theta3);
    prev_theta3 = st.theta3;
    const LoadReport& rep = loads[static_cast<std::size_t>(i)];
    // Signed reel load; the statics split is linear in the load torque.
    const auto [tau1, tau2] =
        detail::split_reel_load(g, st, rep.t_wire_n * g.reel_radius_m);
    row << t, tau1, tau2, rep.t_wire_n,
        body_traj.samples[static_cast<std::size_t>(i)].theta_a;
    out.append(row);
  }
  return out;
}

}  // namespace finsim
