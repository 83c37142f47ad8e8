#pragma once

// Closed-loop simulation of one task under one parameter vector.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tshc/dynamics.hpp"
#include "tshc/policy.hpp"
#include "tshc/reward.hpp"
#include "tshc/tasks.hpp"

namespace tshc {

enum class RewardMode { kSparse, kRich };

const char* ToString(RewardMode mode);
RewardMode ParseRewardMode(const std::string& name);

// Everything a rollout needs besides the task and the parameters.
struct EnvConfig {
  VehicleParams vehicle;
  ActuatorLimits limits;
  VvcConfig vvc;
  PendulumParams pendulum;
  Normalization norm;
  RewardMode reward = RewardMode::kSparse;
  // Per-coordinate weights of the squared-error reward, state order.
  std::array<double, 4> rich_weights{1.0, 1.0, 1.0, 1.0};
};

struct RolloutOptions {
  int t_max = 100;
  int t_goal = 1;
  bool mirror = false;  // reflect features and steering about the x-axis
  bool record_trajectory = false;
};

// One row per simulated instant. Vehicle: state = [x, y, psi, v],
// control = [v, delta] applied on the way in. Pendulum: state = [p, p_dot,
// theta, theta_dot], control = [force, 0].
struct TrajectoryPoint {
  int t = 0;
  StateVec state{};
  std::array<double, 2> control{};
};

struct RolloutResult {
  bool solved = false;  // F
  double pathlength = 0.0;  // P (<= 0)
  Reward reward;            // J
  int steps = 0;
  bool crashed = false;
  StateVec final_state{};
  std::vector<TrajectoryPoint> trajectory;  // initial state + one per step
};

// Runs up to t_max steps (task.t_max overrides options.t_max). At each step:
// features -> network -> scaled control -> dynamics; then reward, pathlength
// and the goal flag of the new state are accumulated. Stops after the step
// that completes t_goal consecutive goal flags, or on a crash. A non-finite
// state counts as a crash. `policy` must match the task's feature and
// control dimensions.
RolloutResult Rollout(std::span<const double> theta, MlpPolicy& policy,
                      const Task& task, const EnvConfig& env,
                      const RolloutOptions& options);

}  // namespace tshc
