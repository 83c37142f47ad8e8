#pragma once

// Deterministic discrete-time simulators: Euler-discretized kinematic bicycle
// with actuator absolute/rate limits, and the classic frictionless cart-pole.

#include <numbers>
#include <span>
#include <vector>

namespace tshc {

inline constexpr double kPi = std::numbers::pi;

constexpr double DegToRad(double deg) { return deg * kPi / 180.0; }
constexpr double RadToDeg(double rad) { return rad * 180.0 / kPi; }
constexpr double KmhToMps(double kmh) { return kmh / 3.6; }

// Wraps an angle to (-pi, pi]. Values already inside are returned untouched,
// so WrapAngle(-a) == -WrapAngle(a) bit-for-bit away from the +-pi seam.
double WrapAngle(double angle);

struct Control {
  double v = 0.0;      // velocity command [m/s]
  double delta = 0.0;  // steering angle [rad]
};

struct ActuatorLimits {
  double v_min = -10.0;
  double v_max = 10.0;
  double vdot_min = -8.0;
  double vdot_max = 5.0;
  double delta_min = DegToRad(-40.0);
  double delta_max = DegToRad(40.0);
  double deltadot_min = DegToRad(-40.0);
  double deltadot_max = DegToRad(40.0);

  // min < max for every pair.
  bool Valid() const;
};

// Closed interval on one actuator channel.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Intersection of the absolute box [abs_lo, abs_hi] with the rate box around
// `prev`. When the two do not overlap the result collapses onto the
// rate-feasible endpoint nearest the absolute box.
Interval AdmissibleInterval(double prev, double abs_lo, double abs_hi,
                            double rate_lo, double rate_hi, double ts);

Interval VelocityInterval(double prev_v, const ActuatorLimits& lim, double ts);
Interval SteeringInterval(double prev_delta, const ActuatorLimits& lim,
                          double ts);

// Projects a raw control onto the admissible box valid at this step.
Control ClampControls(const Control& raw, const Control& prev,
                      const ActuatorLimits& lim, double ts);

struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool Contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
};

struct VehicleParams {
  double wheelbase = 3.5;  // l_f [m]
  double ts = 0.01;        // sampling time [s]
  Rect workspace{-100.0, -100.0, 100.0, 100.0};
  std::vector<Rect> obstacles;

  bool Valid() const;
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double v_prev = 0.0;
  double delta_prev = 0.0;
  int t = 0;

  Control PreviousControl() const { return {v_prev, delta_prev}; }
};

// One Euler step of the kinematic bicycle. The control is expected to be
// admissible already (see ClampControls / ScaleOutputs).
VehicleState StepBicycle(const VehicleState& s, const Control& a,
                         const VehicleParams& p);

// 1 iff the position lies outside the workspace or inside an obstacle.
bool CrashCheck(const VehicleState& s, const VehicleParams& p);

struct PendulumParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double gravity = 9.8;
  double force_max = 10.0;
  double ts = 0.02;
  // Cart leaves the track when |p| exceeds this; <= 0 disables the check.
  double track_limit = 2.4;

  bool Valid() const;
};

struct PendulumState {
  double p = 0.0;
  double p_dot = 0.0;
  double theta = 0.0;  // 0 = upright
  double theta_dot = 0.0;
  int t = 0;
};

// Explicit Euler step of the cart-pole; theta is wrapped afterwards.
PendulumState StepPendulum(const PendulumState& s, double force,
                           const PendulumParams& params);

bool PendulumCrashCheck(const PendulumState& s, const PendulumParams& params);

// Total mechanical energy (kinetic + potential, potential zero at the pivot
// height), the quantity conserved by the continuous-time model.
double PendulumEnergy(const PendulumState& s, const PendulumParams& params);

}  // namespace tshc
