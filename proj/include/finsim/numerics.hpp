#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>

#include "finsim/errors.hpp"
#include "finsim/time_series.hpp"

namespace finsim {

/// Uniform 1-D quadrature grid. Composite Simpson needs an odd point count.
struct Grid1D {
  double lower = 0.0;
  double upper = 1.0;
  int n_points = 101;

  void validate() const {
    if (!(upper > lower)) throw SimulationError("Grid1D: upper must exceed lower");
    if (n_points < 3 || n_points % 2 == 0) {
      throw SimulationError("Grid1D: n_points must be odd and >= 3");
    }
  }
};

/// Composite Simpson rule. Exact for polynomials up to degree 3.
template <typename F>
double simpson_integrate(F&& f, const Grid1D& grid) {
  grid.validate();
  const int n = grid.n_points;
  const double h = (grid.upper - grid.lower) / (n - 1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = grid.lower + h * i;
    const double fx = f(x);
    if (!std::isfinite(fx)) {
      throw SimulationError("simpson_integrate: non-finite integrand at x = " +
                            std::to_string(x));
    }
    const double w = (i == 0 || i == n - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * fx;
  }
  return acc * h / 3.0;
}

/// Symmetric difference quotient (f(x+h) - f(x-h)) / 2h.
template <typename F>
double central_difference(F&& f, double x, double h = 1e-5) {
  if (!(h > 0.0)) throw SimulationError("central_difference: h must be positive");
  const double fp = f(x + h);
  const double fm = f(x - h);
  if (!std::isfinite(fp) || !std::isfinite(fm)) {
    throw SimulationError("central_difference: non-finite evaluation near x = " +
                          std::to_string(x));
  }
  return (fp - fm) / (2.0 * h);
}

struct OdeProblem {
  Eigen::Index state_dimension = 0;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> right_hand_side;
  double t0 = 0.0;
  Eigen::VectorXd y0;
};

/// One classical RK4 step of dy/dt = f(t, y).
template <typename F>
Eigen::VectorXd rk4_step(F&& f, double t, const Eigen::VectorXd& y, double dt) {
  const Eigen::VectorXd k1 = f(t, y);
  const Eigen::VectorXd k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = f(t + dt, y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 over [t0, t_end], sampled at every step. Deterministic:
/// identical inputs give bit-identical output.
inline TimeSeries rk4_integrate(const OdeProblem& problem, double dt, double t_end) {
  if (!(dt > 0.0)) throw SimulationError("rk4_integrate: dt must be positive");
  if (!(t_end > problem.t0)) throw SimulationError("rk4_integrate: t_end must exceed t0");
  if (problem.y0.size() != problem.state_dimension) {
    throw SimulationError("rk4_integrate: y0 length != state_dimension");
  }
  const double span = t_end - problem.t0;
  const double steps_real = span / dt;
  const long n_steps = std::lround(steps_real);
  if (n_steps < 1 || std::abs(steps_real - static_cast<double>(n_steps)) > 1e-9 * steps_real) {
    throw SimulationError("rk4_integrate: dt must divide t_end - t0");
  }

  std::vector<std::string> names{"t_s"};
  for (Eigen::Index i = 0; i < problem.state_dimension; ++i) {
    names.push_back("y" + std::to_string(i));
  }
  TimeSeries out(names);
  out.reserve(static_cast<std::size_t>(n_steps) + 1);

  Eigen::VectorXd y = problem.y0;
  Eigen::VectorXd row(problem.state_dimension + 1);
  for (long k = 0; k <= n_steps; ++k) {
    const double t = problem.t0 + dt * static_cast<double>(k);
    if (!y.allFinite()) {
      throw SimulationError("rk4_integrate: non-finite state at t = " + std::to_string(t));
    }
    row[0] = t;
    row.tail(problem.state_dimension) = y;
    out.append(row);
    if (k < n_steps) y = rk4_step(problem.right_hand_side, t, y, dt);
  }
  return out;
}

/// Shortest-path wrap to (-pi, pi].
inline double wrap_angle(double a) {
  const double two_pi = 2.0 * M_PI;
  double w = std::remainder(a, two_pi);
  if (w <= -M_PI) w += two_pi;
  return w;
}

}  // namespace finsim
