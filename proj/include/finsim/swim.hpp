#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "finsim/body.hpp"
#include "finsim/errors.hpp"
#include "finsim/mechanism.hpp"
#include "finsim/numerics.hpp"
#include "finsim/time_series.hpp"

namespace finsim {

/// Planar rigid-body surrogate converting tail motion into thrust and yaw
/// moment. The two gain coefficients are calibration knobs.
struct SwimParams {
  double body_mass_kg = 2.05;
  double yaw_inertia_kgm2 = 1.0;  // includes hydrodynamic added inertia
  double surge_drag_coeff_kg_per_m = 3.0;
  double yaw_drag_coeff_nms2_per_rad2 = 0.02;
  double yaw_lin_damp_nms_per_rad = 0.8;
  double thrust_coeff = 0.07;
  double steer_coeff = 2.6;
  double tail_moment_arm_m = 0.20;

  void validate() const {
    if (!(body_mass_kg > 0.0 && yaw_inertia_kgm2 > 0.0 &&
          surge_drag_coeff_kg_per_m > 0.0 && yaw_drag_coeff_nms2_per_rad2 > 0.0 &&
          thrust_coeff > 0.0 && steer_coeff > 0.0 && tail_moment_arm_m > 0.0)) {
      throw ConfigError("swim: all parameters must be strictly positive");
    }
    if (yaw_lin_damp_nms_per_rad < 0.0) {
      throw ConfigError("swim: yaw_lin_damp_nms_per_rad must be >= 0");
    }
  }
};

struct SwimState {
  double x_m = 0.0;
  double y_m = 0.0;
  double psi_rad = 0.0;        // wrapped to (-pi, pi]
  double u_m_per_s = 0.0;      // surge velocity
  double r_rad_per_s = 0.0;    // yaw rate
};

namespace detail {

/// Instantaneous fluid force on the fish from the moving tail, tail-root
/// frame (x from head toward tail tip, y lateral). Two contributions:
/// quasi-steady resistive drag along the local arc normal, and an
/// added-mass reaction at the caudal fin. The resistive part alone has zero
/// cycle mean in the longitudinal direction for any odd tail trajectory;
/// the fin reaction carries the mean thrust.
inline Eigen::Vector2d tail_fluid_force(const BodyParams& p, const BodyState& st) {
  const double a = st.theta_a;
  const double adot = st.theta_a_dot;
  const double speed_factor = adot * std::abs(adot);

  Eigen::Vector2d force = Eigen::Vector2d::Zero();
  const double half_rho_cd = 0.5 * p.water_density_kg_per_m3 * p.drag_coeff;

  if (speed_factor != 0.0) {
    const auto integrand_x = [&](double s) {
      const double phi = tangent_angle(p, a, s);
      return p.diameter(s) * shape_jacobian(p, a, s).j.squaredNorm() * (-std::sin(phi));
    };
    const auto integrand_y = [&](double s) {
      const double phi = tangent_angle(p, a, s);
      return p.diameter(s) * shape_jacobian(p, a, s).j.squaredNorm() * std::cos(phi);
    };
    force.x() -= half_rho_cd * speed_factor * simpson_integrate(integrand_x, p.arc_grid());
    force.y() -= half_rho_cd * speed_factor * simpson_integrate(integrand_y, p.arc_grid());

    const Eigen::Vector2d fin_normal{-std::sin(a), std::cos(a)};
    const double jl2 = shape_jacobian(p, a, p.spine_length_m).j.squaredNorm();
    force -= half_rho_cd * speed_factor * p.fin_area_m2 * jl2 * fin_normal;
  }

  // Fin added-mass reaction: m_a * dv_n/dt along the fin normal.
  const ShapeJacobian sj = shape_jacobian(p, a, p.spine_length_m);
  const Eigen::Vector2d fin_normal{-std::sin(a), std::cos(a)};
  const Eigen::Vector2d dnormal_da{-std::cos(a), -std::sin(a)};
  const double jn = sj.j.dot(fin_normal);
  const double djn_da = sj.dj_da.dot(fin_normal) + sj.j.dot(dnormal_da);
  const double vn_dot = jn * st.theta_a_ddot + djn_da * adot * adot;
  const double fin_added_mass =
      p.water_density_kg_per_m3 * std::pow(p.fin_area_m2, 1.5);
  force -= fin_added_mass * vn_dot * fin_normal;
  return force;
}

}  // namespace detail

struct TailReaction {
  double f_thrust_n = 0.0;
  double m_yaw_nm = 0.0;
};

/// Thrust (positive forward) and yaw moment (positive = heading increases)
/// on the head from the tail. Fish forward is -x of the tail-root frame.
inline TailReaction tail_reaction(const SwimParams& sp, const BodyParams& bp,
                                  const BodyState& st) {
  const Eigen::Vector2d f = detail::tail_fluid_force(bp, st);
  // Forward is -x of the tail frame; a positive held theta2 biases the tail
  // so that the mean lateral force turns the heading positive.
  return {sp.thrust_coeff * (-f.x()),
          sp.steer_coeff * f.y() * sp.tail_moment_arm_m};
}

/// One RK4 step of the planar rigid-body dynamics under constant inputs.
inline SwimState step_swim(const SwimParams& p, const SwimState& st, double f_thrust_n,
                           double m_yaw_nm, double dt) {
  if (!(dt > 0.0)) throw SimulationError("step_swim: dt must be positive");
  const auto rhs = [&](double, const Eigen::VectorXd& y) {
    Eigen::VectorXd dy(5);
    const double u = y[3], r = y[4];
    dy[0] = u * std::cos(y[2]);
    dy[1] = u * std::sin(y[2]);
    dy[2] = r;
    dy[3] = (f_thrust_n - p.surge_drag_coeff_kg_per_m * u * std::abs(u)) / p.body_mass_kg;
    dy[4] = (m_yaw_nm - p.yaw_drag_coeff_nms2_per_rad2 * r * std::abs(r) -
             p.yaw_lin_damp_nms_per_rad * r) /
            p.yaw_inertia_kgm2;
    return dy;
  };
  Eigen::VectorXd y(5);
  y << st.x_m, st.y_m, st.psi_rad, st.u_m_per_s, st.r_rad_per_s;
  y = rk4_step(rhs, 0.0, y, dt);
  if (!y.allFinite()) throw SimulationError("step_swim: non-finite state");
  return {y[0], y[1], wrap_angle(y[2]), y[3], y[4]};
}

/// Full open-loop pipeline: mechanism mode -> tail motion -> reaction forces
/// -> planar pose integration.
inline TimeSeries simulate_swimming(const MechanismGeometry& g, const BodyParams& bp,
                                    const SwimParams& sp, const ModeCommand& cmd,
                                    double t_end, double dt) {
  sp.validate();
  const TimeSeries loads = motor_load_profile(g, bp, cmd, t_end, dt);
  const TimeSeries mode_traj = generate_mode_trajectory(g, cmd, t_end, dt);
  const BodyTrajectory body_traj = attack_trajectory(bp, g, mode_traj);

  TimeSeries out({"t_s", "x_m", "y_m", "psi_rad", "u_m_per_s", "r_rad_per_s",
                  "theta_a_rad", "tau1_Nm", "tau2_Nm"});
  out.reserve(static_cast<std::size_t>(loads.rows()));
  SwimState st;
  Eigen::VectorXd row(9);
  for (Eigen::Index i = 0; i < loads.rows(); ++i) {
    const BodyState& bs = body_traj.samples[static_cast<std::size_t>(i)];
    row << loads.row(i)[0], st.x_m, st.y_m, st.psi_rad, st.u_m_per_s, st.r_rad_per_s,
        bs.theta_a, loads.at(i, "tau1_Nm"), loads.at(i, "tau2_Nm");
    out.append(row);
    if (i + 1 < loads.rows()) {
      const TailReaction tr = tail_reaction(sp, bp, bs);
      st = step_swim(sp, st, tr.f_thrust_n, tr.m_yaw_nm, dt);
    }
  }
  return out;
}

/// St = f * A / U.
inline double strouhal_number(double tail_peak_to_peak_m, double frequency_hz,
                              double mean_speed_m_per_s) {
  if (!(mean_speed_m_per_s > 0.0)) {
    throw SimulationError("strouhal_number: mean speed must be positive");
  }
  return frequency_hz * tail_peak_to_peak_m / mean_speed_m_per_s;
}

/// Mean of a channel over t >= t_start.
inline double channel_mean_after(const TimeSeries& ts, const std::string& channel,
                                 double t_start) {
  double acc = 0.0;
  long n = 0;
  const Eigen::Index j = ts.index(channel);
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    if (ts.row(i)[0] >= t_start) {
      acc += ts.row(i)[j];
      ++n;
    }
  }
  if (n == 0) throw SimulationError("channel_mean_after: empty window");
  return acc / static_cast<double>(n);
}

struct CircleFit {
  double cx = 0.0, cy = 0.0, radius = 0.0;
};

/// Algebraic least-squares circle through the (x, y) samples with t >= t_start.
inline CircleFit fit_circle(const TimeSeries& ts, double t_start) {
  std::vector<Eigen::Vector2d> pts;
  const Eigen::Index jx = ts.index("x_m"), jy = ts.index("y_m");
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    if (ts.row(i)[0] >= t_start) pts.push_back({ts.row(i)[jx], ts.row(i)[jy]});
  }
  if (pts.size() < 3) throw SimulationError("fit_circle: need at least 3 points");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& p = pts[static_cast<std::size_t>(i)];
    m.row(i) << p.x(), p.y(), 1.0;
    b[i] = p.squaredNorm();
  }
  const Eigen::Vector3d sol = m.colPivHouseholderQr().solve(b);
  CircleFit fit;
  fit.cx = 0.5 * sol[0];
  fit.cy = 0.5 * sol[1];
  fit.radius = std::sqrt(std::max(0.0, sol[2] + fit.cx * fit.cx + fit.cy * fit.cy));
  return fit;
}

/// Lateral tail-tip peak-to-peak excursion over t >= t_start.
inline double tail_peak_to_peak(const TimeSeries& ts, const BodyParams& bp,
                                double t_start) {
  double lo = 1e300, hi = -1e300;
  const Eigen::Index ja = ts.index("theta_a_rad");
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    if (ts.row(i)[0] < t_start) continue;
    const double y = body_point(bp, ts.row(i)[ja], bp.spine_length_m).y();
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  if (hi < lo) throw SimulationError("tail_peak_to_peak: empty window");
  return hi - lo;
}

struct CalibrationTargets {
  double cruise_speed_m_per_s = 0.32;
  double turn_radius_m = 0.56;
  double omega = 2.0 * M_PI;
  double turn_theta2_hold = -M_PI / 2.0;
};

namespace detail {

/// Precomputed per-sample fluid forces for one actuation mode; the gain
/// coefficients scale these linearly, so candidate evaluations only
/// integrate the cheap rigid-body states.
struct ForceTrace {
  double dt = 0.0;
  std::vector<Eigen::Vector2d> fluid_force;
};

inline ForceTrace force_trace(const MechanismGeometry& g, const BodyParams& bp,
                              const ModeCommand& cmd, double t_end, double dt) {
  const TimeSeries mode_traj = generate_mode_trajectory(g, cmd, t_end, dt);
  const BodyTrajectory body_traj = attack_trajectory(bp, g, mode_traj);
  ForceTrace trace;
  trace.dt = dt;
  trace.fluid_force.reserve(body_traj.samples.size());
  for (const BodyState& bs : body_traj.samples) {
    trace.fluid_force.push_back(tail_fluid_force(bp, bs));
  }
  return trace;
}

inline TimeSeries integrate_trace(const SwimParams& sp, const ForceTrace& trace) {
  TimeSeries out({"t_s", "x_m", "y_m", "psi_rad", "u_m_per_s", "r_rad_per_s"});
  out.reserve(trace.fluid_force.size());
  SwimState st;
  Eigen::VectorXd row(6);
  for (std::size_t i = 0; i < trace.fluid_force.size(); ++i) {
    row << trace.dt * static_cast<double>(i), st.x_m, st.y_m, st.psi_rad, st.u_m_per_s,
        st.r_rad_per_s;
    out.append(row);
    if (i + 1 < trace.fluid_force.size()) {
      const Eigen::Vector2d& f = trace.fluid_force[i];
      st = step_swim(sp, st, sp.thrust_coeff * (-f.x()),
                     sp.steer_coeff * f.y() * sp.tail_moment_arm_m, trace.dt);
    }
  }
  return out;
}

/// Deterministic bisection for a scalar monotone response. `eval` maps a
/// positive parameter to a response value; finds param with response near
/// target, expanding the bracket geometrically first.
template <typename Eval>
double bisect_monotone(Eval&& eval, double initial, double target, bool increasing,
                       int max_iters = 60) {
  double lo = initial, hi = initial;
  double f_initial = eval(initial);
  const auto above = [&](double f) { return increasing ? f > target : f < target; };
  if (above(f_initial)) {
    for (int i = 0; i < 40 && above(eval(lo)); ++i) lo *= 0.5;
    if (above(eval(lo))) throw SimulationError("calibrate: bracket expansion failed (low)");
  } else {
    for (int i = 0; i < 40 && !above(eval(hi)); ++i) hi *= 2.0;
    if (!above(eval(hi))) throw SimulationError("calibrate: bracket expansion failed (high)");
  }
  for (int i = 0; i < max_iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (above(eval(mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
    if ((hi - lo) < 1e-6 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Fits thrust_coeff and steer_coeff so the surrogate reproduces the target
/// cruise speed and turning radius. Surge dynamics are independent of the
/// yaw gain, so one pass per coefficient suffices. Deterministic.
inline SwimParams calibrate(const MechanismGeometry& g, const BodyParams& bp,
                            const SwimParams& initial, const CalibrationTargets& targets,
                            double dt = 1e-3) {
  if (!(targets.cruise_speed_m_per_s > 0.0 && targets.turn_radius_m > 0.0)) {
    throw ConfigError("calibrate: targets must be positive");
  }
  initial.validate();
  const double period = 2.0 * M_PI / targets.omega;
  const double t_end_cruise = 20.0 * period;
  const double t_end_turn = 16.0 * period;

  const detail::ForceTrace sym_trace = detail::force_trace(
      g, bp, {MotionMode::symmetric, targets.omega, 0.0}, t_end_cruise, dt);
  const detail::ForceTrace turn_trace = detail::force_trace(
      g, bp, {MotionMode::asymmetric, targets.omega, targets.turn_theta2_hold},
      t_end_turn, dt);

  const auto cruise_speed = [&](double thrust_coeff) {
    SwimParams sp = initial;
    sp.thrust_coeff = thrust_coeff;
    const TimeSeries ts = detail::integrate_trace(sp, sym_trace);
    return channel_mean_after(ts, "u_m_per_s", t_end_cruise - 5.0 * period);
  };
  const auto turn_radius = [&](const SwimParams& sp) {
    const TimeSeries ts = detail::integrate_trace(sp, turn_trace);
    return fit_circle(ts, t_end_turn - 6.0 * period).radius;
  };

  SwimParams result = initial;
  const double u0 = cruise_speed(initial.thrust_coeff);
  const double r0 = turn_radius(initial);
  if (std::abs(u0 - targets.cruise_speed_m_per_s) <= 0.02 * targets.cruise_speed_m_per_s &&
      std::abs(r0 - targets.turn_radius_m) <= 0.02 * targets.turn_radius_m) {
    return result;  // initial guess already within tolerance
  }

  result.thrust_coeff = detail::bisect_monotone(cruise_speed, initial.thrust_coeff,
                                                targets.cruise_speed_m_per_s, true);
  result.steer_coeff = detail::bisect_monotone(
      [&](double steer) {
        SwimParams sp = result;
        sp.steer_coeff = steer;
        return turn_radius(sp);
      },
      initial.steer_coeff, targets.turn_radius_m, false);

  const double u_res = std::abs(cruise_speed(result.thrust_coeff) -
                                targets.cruise_speed_m_per_s) /
                       targets.cruise_speed_m_per_s;
  const double r_res =
      std::abs(turn_radius(result) - targets.turn_radius_m) / targets.turn_radius_m;
  if (u_res > 0.02 || r_res > 0.02) {
    throw SimulationError("calibrate: residuals exceed 2% (speed " +
                          std::to_string(u_res) + ", radius " + std::to_string(r_res) + ")");
  }
  return result;
}

}  // namespace finsim
