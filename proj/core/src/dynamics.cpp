#include "tshc/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace tshc {

double WrapAngle(double angle) {
  if (angle > -kPi && angle <= kPi) return angle;
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

bool ActuatorLimits::Valid() const {
  return v_min < v_max && vdot_min < vdot_max && delta_min < delta_max &&
         deltadot_min < deltadot_max;
}

Interval AdmissibleInterval(double prev, double abs_lo, double abs_hi,
                            double rate_lo, double rate_hi, double ts) {
  const double reach_lo = prev + rate_lo * ts;
  const double reach_hi = prev + rate_hi * ts;
  if (reach_hi < abs_lo) return {reach_hi, reach_hi};
  if (reach_lo > abs_hi) return {reach_lo, reach_lo};
  return {std::max(reach_lo, abs_lo), std::min(reach_hi, abs_hi)};
}

Interval VelocityInterval(double prev_v, const ActuatorLimits& lim, double ts) {
  return AdmissibleInterval(prev_v, lim.v_min, lim.v_max, lim.vdot_min,
                            lim.vdot_max, ts);
}

Interval SteeringInterval(double prev_delta, const ActuatorLimits& lim,
                          double ts) {
  return AdmissibleInterval(prev_delta, lim.delta_min, lim.delta_max,
                            lim.deltadot_min, lim.deltadot_max, ts);
}

Control ClampControls(const Control& raw, const Control& prev,
                      const ActuatorLimits& lim, double ts) {
  const Interval v = VelocityInterval(prev.v, lim, ts);
  const Interval d = SteeringInterval(prev.delta, lim, ts);
  return {std::clamp(raw.v, v.lo, v.hi), std::clamp(raw.delta, d.lo, d.hi)};
}

bool VehicleParams::Valid() const {
  return wheelbase > 0.0 && ts > 0.0 && workspace.x_min < workspace.x_max &&
         workspace.y_min < workspace.y_max;
}

VehicleState StepBicycle(const VehicleState& s, const Control& a,
                         const VehicleParams& p) {
  VehicleState next;
  next.x = s.x + p.ts * a.v * std::cos(s.psi);
  next.y = s.y + p.ts * a.v * std::sin(s.psi);
  next.psi = WrapAngle(s.psi + p.ts * (a.v / p.wheelbase) * std::tan(a.delta));
  next.v_prev = a.v;
  next.delta_prev = a.delta;
  next.t = s.t + 1;
  return next;
}

bool CrashCheck(const VehicleState& s, const VehicleParams& p) {
  if (!p.workspace.Contains(s.x, s.y)) return true;
  return std::any_of(p.obstacles.begin(), p.obstacles.end(),
                     [&](const Rect& r) { return r.Contains(s.x, s.y); });
}

bool PendulumParams::Valid() const {
  return cart_mass > 0.0 && pole_mass > 0.0 && half_length > 0.0 &&
         gravity > 0.0 && force_max > 0.0 && ts > 0.0;
}

PendulumState StepPendulum(const PendulumState& s, double force,
                           const PendulumParams& params) {
  const double total_mass = params.cart_mass + params.pole_mass;
  const double pole_moment = params.pole_mass * params.half_length;
  const double sin_t = std::sin(s.theta);
  const double cos_t = std::cos(s.theta);

  const double temp =
      (force + pole_moment * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (params.gravity * sin_t - cos_t * temp) /
      (params.half_length *
       (4.0 / 3.0 - params.pole_mass * cos_t * cos_t / total_mass));
  const double p_acc = temp - pole_moment * theta_acc * cos_t / total_mass;

  PendulumState next;
  next.p = s.p + params.ts * s.p_dot;
  next.p_dot = s.p_dot + params.ts * p_acc;
  next.theta = WrapAngle(s.theta + params.ts * s.theta_dot);
  next.theta_dot = s.theta_dot + params.ts * theta_acc;
  next.t = s.t + 1;
  return next;
}

bool PendulumCrashCheck(const PendulumState& s, const PendulumParams& params) {
  return params.track_limit > 0.0 && std::abs(s.p) > params.track_limit;
}

double PendulumEnergy(const PendulumState& s, const PendulumParams& params) {
  const double total_mass = params.cart_mass + params.pole_mass;
  const double m = params.pole_mass;
  const double l = params.half_length;
  return 0.5 * total_mass * s.p_dot * s.p_dot +
         m * l * s.p_dot * s.theta_dot * std::cos(s.theta) +
         (2.0 / 3.0) * m * l * l * s.theta_dot * s.theta_dot +
         m * params.gravity * l * std::cos(s.theta);
}

}  // namespace tshc
