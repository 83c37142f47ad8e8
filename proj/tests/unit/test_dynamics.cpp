#include <doctest.h>

#include <cmath>
#include <random>

#include "tshc/dynamics.hpp"
#include "support/oracles.hpp"

using namespace tshc;
using oracle::Accel;
using oracle::LagrangeAccel;

namespace {

ActuatorLimits SymmetricLimits() {
  ActuatorLimits lim;
  lim.vdot_min = -5.0;
  lim.vdot_max = 5.0;
  return lim;
}

}  // namespace

TEST_CASE("clamp_controls hand-evaluated boxes") {
  const ActuatorLimits lim = SymmetricLimits();
  const Control prev{0.0, 0.0};
  CHECK(ClampControls({50.0, 0.0}, prev, lim, 0.01).v == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(ClampControls({-50.0, 0.0}, prev, lim, 0.01).v == doctest::Approx(-0.05).epsilon(1e-15));

  const Control inside{0.01, DegToRad(0.1)};
  const Control out = ClampControls(inside, prev, lim, 0.01);
  CHECK(out.v == inside.v);
  CHECK(out.delta == inside.delta);
}

TEST_CASE("clamp_controls degenerate box snaps to the nearest rate-feasible endpoint") {
  ActuatorLimits lim;
  // Previous velocity far above the absolute box: the best the rate limit
  // allows is prev + vdot_min * ts.
  const Control out = ClampControls({0.0, 0.0}, {20.0, 0.0}, lim, 0.01);
  CHECK(out.v == 20.0 + lim.vdot_min * 0.01);
  const Control low = ClampControls({0.0, 0.0}, {-20.0, 0.0}, lim, 0.01);
  CHECK(low.v == -20.0 + lim.vdot_max * 0.01);
}

TEST_CASE("clamp_controls is idempotent and always admissible") {
  const ActuatorLimits lim;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wide(-30.0, 30.0);
  std::uniform_real_distribution<double> v_prev(lim.v_min, lim.v_max);
  std::uniform_real_distribution<double> d_prev(lim.delta_min, lim.delta_max);
  for (int i = 0; i < 20000; ++i) {
    const Control prev{v_prev(rng), d_prev(rng)};
    const Control raw{wide(rng), wide(rng)};
    const double ts = 0.001 + 0.3 * std::uniform_real_distribution<double>()(rng);
    const Control a = ClampControls(raw, prev, lim, ts);
    const Control b = ClampControls(a, prev, lim, ts);
    REQUIRE(a.v == b.v);
    REQUIRE(a.delta == b.delta);
    REQUIRE(a.v >= lim.v_min);
    REQUIRE(a.v <= lim.v_max);
    REQUIRE(a.v >= prev.v + lim.vdot_min * ts - 1e-12);
    REQUIRE(a.v <= prev.v + lim.vdot_max * ts + 1e-12);
    REQUIRE(a.delta >= lim.delta_min);
    REQUIRE(a.delta <= lim.delta_max);
    REQUIRE(a.delta >= prev.delta + lim.deltadot_min * ts - 1e-12);
    REQUIRE(a.delta <= prev.delta + lim.deltadot_max * ts + 1e-12);
  }
}

TEST_CASE("bicycle single steps") {
  VehicleParams p;
  p.ts = 0.01;

  SUBCASE("zero velocity is a fixed point") {
    VehicleState s{1.5, -2.0, 0.7, 0.0, 0.2, 3};
    const VehicleState n = StepBicycle(s, {0.0, 0.3}, p);
    CHECK(n.x == s.x);
    CHECK(n.y == s.y);
    CHECK(n.psi == s.psi);
    CHECK(n.t == 4);
  }
  SUBCASE("straight unit-speed step") {
    const VehicleState n = StepBicycle({}, {1.0, 0.0}, p);
    CHECK(std::abs(n.x - 0.01) <= 1e-12);
    CHECK(n.y == 0.0);
    CHECK(n.psi == 0.0);
    CHECK(n.v_prev == 1.0);
  }
  SUBCASE("unit yaw rate") {
    const VehicleState n = StepBicycle({}, {3.5, kPi / 4.0}, p);
    CHECK(std::abs(n.psi - 0.01) <= 1e-12);
    CHECK(std::abs(n.x - 0.035) <= 1e-12);
    CHECK(n.delta_prev == kPi / 4.0);
  }
  SUBCASE("heading is wrapped") {
    VehicleState s;
    s.psi = kPi - 1e-4;
    const VehicleState n = StepBicycle(s, {10.0, DegToRad(40.0)}, p);
    CHECK(n.psi > -kPi);
    CHECK(n.psi <= kPi);
    CHECK(n.psi < 0.0);
  }
}

TEST_CASE("bicycle properties") {
  VehicleParams p;
  const ActuatorLimits lim;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    VehicleState s{5 * u(rng), 5 * u(rng), 1.4 * u(rng), 0, 0, 0};
    const VehicleState n = StepBicycle(s, {10.0 * u(rng), 0.0}, p);
    REQUIRE(std::abs((n.y - s.y) - std::tan(s.psi) * (n.x - s.x)) <= 1e-12);

    s.psi = kPi * u(rng);
    const Control a{lim.v_max * u(rng), lim.delta_max * u(rng)};
    const VehicleState m = StepBicycle(s, a, p);
    const double bound = p.ts * lim.v_max * std::tan(lim.delta_max) / p.wheelbase;
    REQUIRE(std::abs(WrapAngle(m.psi - s.psi)) <= bound + 1e-15);

    const VehicleState again = StepBicycle(s, a, p);
    REQUIRE(again.x == m.x);
    REQUIRE(again.y == m.y);
    REQUIRE(again.psi == m.psi);
  }
}

TEST_CASE("crash geometry") {
  VehicleParams p;
  p.obstacles.push_back({2.0, 2.0, 4.0, 3.0});
  VehicleState s;
  CHECK_FALSE(CrashCheck(s, p));
  s.x = 150.0;
  CHECK(CrashCheck(s, p));
  s.x = 3.0;
  s.y = 2.5;
  CHECK(CrashCheck(s, p));
  s.y = 3.5;
  CHECK_FALSE(CrashCheck(s, p));
}

TEST_CASE("wrap angle") {
  CHECK(WrapAngle(kPi) == kPi);
  CHECK(WrapAngle(-kPi) == doctest::Approx(kPi));
  CHECK(WrapAngle(3 * kPi) == doctest::Approx(kPi));
  CHECK(WrapAngle(DegToRad(350.0)) == doctest::Approx(DegToRad(-10.0)));
  CHECK(WrapAngle(0.3) == 0.3);
}

TEST_CASE("pendulum equilibria") {
  const PendulumParams c;
  const PendulumState up{};
  PendulumState n = StepPendulum(up, 0.0, c);
  CHECK(n.p == 0.0);
  CHECK(n.p_dot == 0.0);
  CHECK(n.theta == 0.0);
  CHECK(n.theta_dot == 0.0);

  PendulumState down;
  down.theta = kPi;
  n = StepPendulum(down, 0.0, c);
  CHECK(n.p == 0.0);
  CHECK(std::abs(n.p_dot) <= 1e-15);
  CHECK(n.theta == kPi);
  CHECK(std::abs(n.theta_dot) <= 1e-15);
}

TEST_CASE("pendulum one step matches the Lagrangian oracle") {
  const PendulumParams c;
  const PendulumState up{};
  const Accel a = LagrangeAccel(up, 10.0, c);
  const PendulumState n = StepPendulum(up, 10.0, c);
  CHECK(std::abs(n.p_dot - 0.02 * a.p_dd) <= 1e-12);
  CHECK(std::abs(n.theta_dot - 0.02 * a.theta_dd) <= 1e-12);
  CHECK(n.p == 0.0);
  CHECK(n.theta == 0.0);
  CHECK(n.t == 1);
  // Closed form at theta = 0: det = (M+m)(4/3 m l^2) - (m l)^2.
  const double m = 0.1, l = 0.5, M = 1.0;
  const double det = (M + m) * (4.0 / 3.0) * m * l * l - m * l * m * l;
  CHECK(std::abs(a.p_dd - 10.0 * (4.0 / 3.0) * m * l * l / det) <= 1e-12);
  CHECK(std::abs(a.theta_dd + 10.0 * m * l / det) <= 1e-12);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    PendulumState s{2.0 * u(rng), 3.0 * u(rng), kPi * u(rng), 6.0 * u(rng), 0};
    const double f = 10.0 * u(rng);
    const Accel o = LagrangeAccel(s, f, c);
    const PendulumState x = StepPendulum(s, f, c);
    REQUIRE(std::abs(x.p - (s.p + 0.02 * s.p_dot)) <= 1e-12);
    REQUIRE(std::abs(x.p_dot - (s.p_dot + 0.02 * o.p_dd)) <= 1e-12);
    REQUIRE(std::abs(WrapAngle(x.theta - (s.theta + 0.02 * s.theta_dot))) <= 1e-12);
    REQUIRE(std::abs(x.theta_dot - (s.theta_dot + 0.02 * o.theta_dd)) <= 1e-12);
  }
}

TEST_CASE("pendulum energy drift shrinks with the step size") {
  PendulumParams c;
  const PendulumState s{0.0, 0.4, 0.6, -1.2, 0};
  const double e0 = PendulumEnergy(s, c);
  c.ts = 0.02;
  const double err_full = std::abs(PendulumEnergy(StepPendulum(s, 0.0, c), c) - e0);
  c.ts = 0.01;
  const double err_half = std::abs(PendulumEnergy(StepPendulum(s, 0.0, c), c) - e0);
  CHECK(err_full > 0.0);
  // Local error is second order, so the drift per unit time halves.
  const double per_time_ratio = (err_full / 0.02) / (err_half / 0.01);
  CHECK(per_time_ratio == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("pendulum track limit") {
  const PendulumParams c;
  PendulumState s;
  s.p = 2.3;
  CHECK_FALSE(PendulumCrashCheck(s, c));
  s.p = -2.5;
  CHECK(PendulumCrashCheck(s, c));
}
