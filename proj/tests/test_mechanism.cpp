#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <optional>
#include <random>

#include "doctest.h"
#include "finsim/mechanism.hpp"

using namespace finsim;

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Signed collinearity residual of the three joints as a function of theta3.
double joint_residual(const MechanismGeometry& g, double t1, double t2, double t3) {
  const Eigen::Vector2d p1 = wheel1_joint(g, t1);
  const Eigen::Vector2d p2 = wheel2_joint(g, t2);
  const Eigen::Vector2d p3 = reel_joint(g, t3);
  return cross2(p1 - p3, p2 - p3);
}

// Independent geometric oracle: bisection roots of the residual over a dense
// theta3 scan, no use of the closed-form solution.
std::vector<double> collinearity_roots(const MechanismGeometry& g, double t1,
                                       double t2) {
  std::vector<double> roots;
  const int n = 2000;
  double prev_theta = -M_PI;
  double prev_res = joint_residual(g, t1, t2, prev_theta);
  for (int i = 1; i <= n; ++i) {
    const double theta = -M_PI + 2.0 * M_PI * i / n;
    const double res = joint_residual(g, t1, t2, theta);
    if (prev_res == 0.0 || prev_res * res < 0.0) {
      double lo = prev_theta, hi = theta;
      double flo = prev_res;
      for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = joint_residual(g, t1, t2, mid);
        if (flo * fmid <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fmid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_theta = theta;
    prev_res = res;
  }
  return roots;
}

const MechanismGeometry kDefault{};

}  // namespace

TEST_CASE("solve_reel_angle trivial zero") {
  CHECK(solve_reel_angle(kDefault, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("solve_reel_angle symmetric quarter turn") {
  CHECK(solve_reel_angle(kDefault, M_PI / 2.0, M_PI / 2.0) ==
        doctest::Approx(std::asin(-0.5)).epsilon(1e-9));
}

TEST_CASE("solve_reel_angle matches independent root-find") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (int i = 0; i < 200; ++i) {
    const double t1 = angle(rng), t2 = angle(rng);
    const double t3 = solve_reel_angle(kDefault, t1, t2);
    const auto roots = collinearity_roots(kDefault, t1, t2);
    REQUIRE(!roots.empty());
    double best = 1e9;
    for (double r : roots) best = std::min(best, std::abs(wrap_angle(r - t3)));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("collinearity residual over random configurations") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  const double scale = (kDefault.offset_l1_m + kDefault.offset_l2_m) *
                       (kDefault.offset_l1_m + kDefault.offset_l2_m);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double t1 = angle(rng), t2 = angle(rng);
    const double t3 = solve_reel_angle(kDefault, t1, t2);
    worst = std::max(worst, std::abs(joint_residual(kDefault, t1, t2, t3)) / scale);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("symmetric reduction identity") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  const double ratio = kDefault.wheel_radius_m / kDefault.reel_radius_m;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double t1 = angle(rng);
    const double t3 = solve_reel_angle(kDefault, t1, t1);
    worst = std::max(worst, std::abs(std::sin(t3) + ratio * std::sin(t1)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("unreachable configuration carries the arcsin argument") {
  // wheel larger than the reel violates the feasibility invariant; the solver
  // reports the out-of-range arcsin argument instead of silently clamping
  MechanismGeometry bad = kDefault;
  bad.wheel_radius_m = 0.05;
  bool found = false;
  for (double t1 = 0.0; t1 < 2.0 * M_PI; t1 += 0.1) {
    try {
      solve_reel_angle(bad, t1, t1);
    } catch (const UnreachableConfiguration& e) {
      found = true;
      CHECK(std::string(e.what()).find("C/sqrt") != std::string::npos);
      break;
    }
  }
  CHECK(found);
}

TEST_CASE("geometry validation") {
  MechanismGeometry g = kDefault;
  g.wheel_radius_m = 0.03;  // >= reel radius
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = kDefault;
  g.offset_l1_m = -1.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = kDefault;
  g.offset_l1_m = 0.005;  // wheel collides with reel axis
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("rod orientation zero at equal angles") {
  for (double a = -3.0; a <= 3.0; a += 0.37) {
    CHECK(std::abs(rod_orientation(kDefault, a, a)) < 1e-12);
  }
}

TEST_CASE("rod orientation vector oracle") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (int i = 0; i < 500; ++i) {
    const double t1 = angle(rng), t2 = angle(rng);
    const Eigen::Vector2d d = wheel1_joint(kDefault, t1) - wheel2_joint(kDefault, t2);
    CHECK(rod_orientation(kDefault, t1, t2) ==
          doctest::Approx(std::atan2(d.y(), d.x())).epsilon(1e-12));
  }
}

TEST_CASE("reel velocity zero for stationary mechanism") {
  const MechanismState st = mechanism_state(kDefault, 0.7, -0.3, 0.0, 0.0);
  CHECK(st.theta3_dot == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("reel velocity symmetric-mode identity") {
  const double ratio = kDefault.wheel_radius_m / kDefault.reel_radius_m;
  for (double t1 = 0.05; t1 < 2.0 * M_PI; t1 += 0.1) {
    const MechanismState st = mechanism_state(kDefault, t1, t1, 1.0, 1.0);
    const double lhs = std::cos(st.theta3) * st.theta3_dot;
    const double rhs = -ratio * std::cos(t1) * 1.0;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("reel velocity finite-difference oracle along both modes") {
  const double omega = 2.0 * M_PI;
  for (bool symmetric : {true, false}) {
    const auto theta3_of_t = [&](double t) {
      const double t1 = omega * t;
      const double t2 = symmetric ? omega * t : M_PI / 2.0;
      return solve_reel_angle(kDefault, t1, t2);
    };
    for (double t = 0.0; t <= 1.0; t += 0.01) {
      const double t1 = omega * t;
      const double t2 = symmetric ? omega * t : M_PI / 2.0;
      const MechanismState st =
          mechanism_state(kDefault, t1, t2, omega, symmetric ? omega : 0.0);
      const double fd = central_difference(theta3_of_t, t, 1e-6);
      const double tol = std::max(1e-6, 1e-4 * std::abs(st.theta3_dot));
      CHECK(std::abs(st.theta3_dot - fd) < tol);
    }
  }
}

TEST_CASE("transmission singularity raises rather than exploding") {
  // A crafted state with the reel crank parallel to the rod normal is the
  // singular transmission; split_reel_load must refuse it.
  MechanismState st;
  st.theta1 = 0.0;
  st.theta2 = 0.0;
  st.theta3 = M_PI / 2.0;  // crank normal aligned with rod normal
  st.theta_rod = 0.0;
  st.d1 = 0.1;
  st.d2 = 0.1;
  CHECK_THROWS_AS(detail::split_reel_load(kDefault, st, 1.0), TransmissionSingularity);
}

TEST_CASE("mode trajectory symmetric amplitude and zero mean") {
  const ModeCommand cmd{MotionMode::symmetric, 2.0 * M_PI, 0.0};
  const TimeSeries ts = generate_mode_trajectory(kDefault, cmd, 2.0, 1e-3);
  const double amp = std::asin(kDefault.wheel_radius_m / kDefault.reel_radius_m);
  double mean = 0.0, peak = 0.0;
  for (Eigen::Index i = 0; i < ts.rows(); ++i) {
    const double v = ts.at(i, "theta3_rad");
    mean += v;
    peak = std::max(peak, std::abs(v));
  }
  mean /= static_cast<double>(ts.rows());
  CHECK(std::abs(mean) < 1e-9);
  CHECK(peak == doctest::Approx(amp).epsilon(1e-4));
  CHECK(peak < amp + 1e-9);
}

TEST_CASE("mode trajectory asymmetric hold at zero degenerates toward zero mean") {
  MechanismGeometry wide = kDefault;
  wide.offset_l1_m = 0.5;
  wide.offset_l2_m = 0.5;
  const ModeCommand cmd{MotionMode::asymmetric, 2.0 * M_PI, 0.0};
  const TimeSeries ts = generate_mode_trajectory(wide, cmd, 1.0, 1e-3);
  double mean = 0.0;
  for (Eigen::Index i = 0; i < ts.rows(); ++i) mean += ts.at(i, "theta3_rad");
  mean /= static_cast<double>(ts.rows());
  CHECK(std::abs(mean) < 2e-3);
}

TEST_CASE("mode trajectory asymmetric hold has nonzero mean, same fundamental") {
  const ModeCommand cmd{MotionMode::asymmetric, 2.0 * M_PI, -M_PI / 2.0};
  const TimeSeries ts = generate_mode_trajectory(kDefault, cmd, 2.0, 1e-3);
  double mean = 0.0;
  for (Eigen::Index i = 0; i < ts.rows(); ++i) mean += ts.at(i, "theta3_rad");
  mean /= static_cast<double>(ts.rows());
  CHECK(std::abs(mean) > 1e-3);
}

TEST_CASE("mode trajectory periodicity") {
  for (MotionMode mode : {MotionMode::symmetric, MotionMode::asymmetric}) {
    const ModeCommand cmd{mode, 2.0 * M_PI, M_PI / 2.0};
    const TimeSeries ts = generate_mode_trajectory(kDefault, cmd, 2.0, 1e-3);
    // one period = 1000 samples at dt = 1e-3
    for (Eigen::Index i = 0; i + 1000 < ts.rows(); i += 37) {
      CHECK(std::abs(ts.at(i + 1000, "theta3_rad") - ts.at(i, "theta3_rad")) < 1e-9);
    }
  }
}

TEST_CASE("mode trajectory branch continuity") {
  for (MotionMode mode : {MotionMode::symmetric, MotionMode::asymmetric}) {
    const ModeCommand cmd{mode, 2.0 * M_PI, -M_PI / 2.0};
    const TimeSeries ts = generate_mode_trajectory(kDefault, cmd, 2.0, 1e-3);
    for (Eigen::Index i = 1; i < ts.rows(); ++i) {
      CHECK(std::abs(wrap_angle(ts.at(i, "theta3_rad") - ts.at(i - 1, "theta3_rad"))) <
            M_PI / 2.0);
    }
  }
}

TEST_CASE("torque split: unloaded and symmetric sharing") {
  const MechanismState st = mechanism_state(kDefault, 1.1, 1.1, 1.0, 1.0);
  const auto [z1, z2] = split_motor_torques(kDefault, st, 0.0);
  CHECK(z1 == 0.0);
  CHECK(z2 == 0.0);
  CHECK_THROWS_AS(split_motor_torques(kDefault, st, -1.0), SimulationError);

  // with theta1 = theta2 the rod is horizontal and both wheel joints see the
  // same projection angle, so the torques split inversely with the lever arms
  const MechanismState st2 = mechanism_state(kDefault, 0.6, 0.6, 1.0, 1.0);
  const auto [tau1, tau2] = split_motor_torques(kDefault, st2, 2.0);
  CHECK(tau1 * st2.d1 == doctest::Approx(tau2 * st2.d2).epsilon(1e-9));
}

TEST_CASE("virtual work balance") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  std::uniform_real_distribution<double> rate(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const double t1 = angle(rng);
    const double t2 = angle(rng);
    const double w1 = rate(rng), w2 = rate(rng);
    const MechanismState st = mechanism_state(kDefault, t1, t2, w1, w2);
    const double tension = 3.0;
    const auto [tau1, tau2] = split_motor_torques(kDefault, st, tension);
    const double input = tau1 * w1 + tau2 * w2;
    const double output = tension * kDefault.reel_radius_m * st.theta3_dot;
    CHECK(std::abs(input - output) <=
          1e-9 * std::max(1.0, std::max(std::abs(input), std::abs(output))));
  }
}
