#include "tshc/rollout.hpp"

#include <cmath>
#include <stdexcept>

namespace tshc {
namespace {

bool Finite(const StateVec& z) {
  return std::isfinite(z[0]) && std::isfinite(z[1]) && std::isfinite(z[2]) &&
         std::isfinite(z[3]);
}

void CheckShapes(const MlpPolicy& policy, const Task& task) {
  const MlpSpec& spec = policy.spec();
  if (spec.InputDim() != FeatureDim(task.recipe) ||
      spec.OutputDim() != ControlDim(task.env)) {
    throw ShapeError("network [" + std::to_string(spec.InputDim()) + " in, " +
                     std::to_string(spec.OutputDim()) + " out] does not fit " +
                     ToString(task.env) + " task '" + task.id + "' [" +
                     std::to_string(FeatureDim(task.recipe)) + " in, " +
                     std::to_string(ControlDim(task.env)) + " out]");
  }
}

RolloutResult RolloutVehicle(std::span<const double> theta, MlpPolicy& policy,
                             const Task& task, const EnvConfig& env,
                             const RolloutOptions& options, int t_max) {
  const Pose goal = task.GoalPose();
  const std::array<double, 4> goal_vec = task.z_goal;
  const VehicleParams& params = env.vehicle;

  std::array<double, 5> features{};
  std::array<double, 2> raw{};
  const auto feature_span =
      std::span<double>(features.data(), static_cast<std::size_t>(
                                             FeatureDim(task.recipe)));

  RolloutResult result;
  VehicleState state = InitialVehicleState(task);
  if (options.record_trajectory) {
    result.trajectory.reserve(static_cast<std::size_t>(t_max) + 1);
    result.trajectory.push_back(
        {0, {state.x, state.y, state.psi, state.v_prev}, {state.v_prev, 0.0}});
  }
  double last_raw_steer = 0.0;
  int consecutive = 0;

  for (int t = 0; t < t_max; ++t) {
    const Pose pose = ToPose(state);
    VehicleFeatures(pose, goal, task.recipe, last_raw_steer, env.norm,
                    feature_span);
    if (options.mirror) MirrorFeatures(feature_span, task.recipe);
    policy.Forward(theta, feature_span, raw);
    if (options.mirror) MirrorControl(raw);
    last_raw_steer = raw[kSteerOutput];

    std::optional<Interval> vvc_box;
    if (env.vvc.mode != VvcMode::kOff) {
      const double e_d = std::hypot(pose.x - goal.x, pose.y - goal.y);
      vvc_box = VvcBounds(e_d, goal.v, env.limits.v_min, env.limits.v_max,
                          env.vvc);
    }
    const Control a = ScaleOutputs(raw, state.PreviousControl(), env.limits,
                                   vvc_box, params.ts);
    const VehicleState next = StepBicycle(state, a, params);
    const StateVec z_next{next.x, next.y, next.psi, next.v_prev};
    const bool crash = !Finite(z_next) || CrashCheck(next, params);

    Reward r;
    if (env.reward == RewardMode::kSparse) {
      r = SparseReward(crash);
    } else {
      StateVec err = z_next;
      err[2] = WrapAngle(z_next[2] - goal_vec[2]) + goal_vec[2];
      r = RichReward(err, goal_vec, env.rich_weights, crash);
    }
    result.pathlength += PathlengthDelta(state.x, state.y, next.x, next.y);
    result.reward += r;
    const bool flag = !crash && GoalFlag(ToPose(next), goal, task.tolerances);
    consecutive = flag ? consecutive + 1 : 0;

    state = next;
    result.steps = t + 1;
    if (options.record_trajectory) {
      result.trajectory.push_back({state.t, z_next, {a.v, a.delta}});
    }
    if (consecutive >= options.t_goal) {
      result.solved = true;
      break;
    }
    if (crash) {
      result.crashed = true;
      break;
    }
  }
  result.final_state = {state.x, state.y, state.psi, state.v_prev};
  return result;
}

RolloutResult RolloutPendulum(std::span<const double> theta, MlpPolicy& policy,
                              const Task& task, const EnvConfig& env,
                              const RolloutOptions& options, int t_max) {
  const PendulumParams& params = env.pendulum;
  std::array<double, 4> features{};
  std::array<double, 1> raw{};

  RolloutResult result;
  PendulumState state = InitialPendulumState(task);
  auto as_vec = [](const PendulumState& s) {
    return StateVec{s.p, s.p_dot, s.theta, s.theta_dot};
  };
  if (options.record_trajectory) {
    result.trajectory.reserve(static_cast<std::size_t>(t_max) + 1);
    result.trajectory.push_back({0, as_vec(state), {0.0, 0.0}});
  }
  int consecutive = 0;

  for (int t = 0; t < t_max; ++t) {
    PendulumFeatures(state, env.norm, features);
    policy.Forward(theta, features, raw);
    const double force =
        ScaleToInterval(raw[0], {-params.force_max, params.force_max});
    const PendulumState next = StepPendulum(state, force, params);
    const StateVec z_next = as_vec(next);
    const bool crash = !Finite(z_next) || PendulumCrashCheck(next, params);

    Reward r;
    if (env.reward == RewardMode::kSparse) {
      r = SparseReward(crash);
    } else {
      StateVec err = z_next;
      err[2] = WrapAngle(z_next[2] - task.z_goal[2]) + task.z_goal[2];
      r = RichReward(err, task.z_goal, env.rich_weights, crash);
    }
    result.pathlength += -std::abs(next.p - state.p);
    result.reward += r;
    const bool flag = !crash && PendulumGoalFlag(next, task);
    consecutive = flag ? consecutive + 1 : 0;

    state = next;
    result.steps = t + 1;
    if (options.record_trajectory) {
      result.trajectory.push_back({state.t, z_next, {force, 0.0}});
    }
    if (consecutive >= options.t_goal) {
      result.solved = true;
      break;
    }
    if (crash) {
      result.crashed = true;
      break;
    }
  }
  result.final_state = as_vec(state);
  return result;
}

}  // namespace

const char* ToString(RewardMode mode) {
  return mode == RewardMode::kSparse ? "sparse" : "rich";
}

RewardMode ParseRewardMode(const std::string& name) {
  if (name == "sparse") return RewardMode::kSparse;
  if (name == "rich") return RewardMode::kRich;
  throw std::invalid_argument("unknown reward mode '" + name +
                              "' (expected sparse, rich)");
}

RolloutResult Rollout(std::span<const double> theta, MlpPolicy& policy,
                      const Task& task, const EnvConfig& env,
                      const RolloutOptions& options) {
  CheckShapes(policy, task);
  if (options.t_goal < 1) throw std::invalid_argument("T_goal must be >= 1");
  const int t_max = task.t_max.value_or(options.t_max);
  policy.ResetState();
  if (task.env == EnvKind::kVehicle) {
    return RolloutVehicle(theta, policy, task, env, options, t_max);
  }
  return RolloutPendulum(theta, policy, task, env, options, t_max);
}

}  // namespace tshc
