#include "tshc/tasks.hpp"

#include <cmath>
#include <sstream>

namespace tshc {

const char* ToString(EnvKind kind) {
  return kind == EnvKind::kVehicle ? "vehicle" : "pendulum";
}

EnvKind ParseEnvKind(const std::string& name) {
  if (name == "vehicle") return EnvKind::kVehicle;
  if (name == "pendulum") return EnvKind::kPendulum;
  throw std::invalid_argument("unknown env kind '" + name +
                              "' (expected vehicle, pendulum)");
}

const char* ToString(FeatureRecipe recipe) {
  switch (recipe) {
    case FeatureRecipe::kGoalDiff4:
      return "goal-diff-4";
    case FeatureRecipe::kGoalDiff5:
      return "goal-diff-5";
    case FeatureRecipe::kPendulum:
      return "pendulum";
  }
  return "?";
}

FeatureRecipe ParseFeatureRecipe(const std::string& name) {
  if (name == "goal-diff-4") return FeatureRecipe::kGoalDiff4;
  if (name == "goal-diff-5") return FeatureRecipe::kGoalDiff5;
  if (name == "pendulum") return FeatureRecipe::kPendulum;
  throw std::invalid_argument(
      "unknown feature recipe '" + name +
      "' (expected goal-diff-4, goal-diff-5, pendulum)");
}

int FeatureDim(FeatureRecipe recipe) {
  return recipe == FeatureRecipe::kGoalDiff5 ? 5 : 4;
}

int ControlDim(EnvKind kind) { return kind == EnvKind::kVehicle ? 2 : 1; }

bool Task::Valid() const {
  for (double z : z0)
    if (!std::isfinite(z)) return false;
  for (double z : z_goal)
    if (!std::isfinite(z)) return false;
  if (t_max && *t_max < 1) return false;
  const bool recipe_ok = (env == EnvKind::kPendulum) ==
                         (recipe == FeatureRecipe::kPendulum);
  return tolerances.Valid() && recipe_ok;
}

Pose ToPose(const VehicleState& s) { return {s.x, s.y, s.psi, s.v_prev}; }

VehicleState InitialVehicleState(const Task& task) {
  VehicleState s;
  s.x = task.z0[0];
  s.y = task.z0[1];
  s.psi = WrapAngle(task.z0[2]);
  s.v_prev = task.z0[3];
  return s;
}

PendulumState InitialPendulumState(const Task& task) {
  PendulumState s;
  s.p = task.z0[0];
  s.p_dot = task.z0[1];
  s.theta = WrapAngle(task.z0[2]);
  s.theta_dot = task.z0[3];
  return s;
}

void VehicleFeatures(const Pose& state, const Pose& goal, FeatureRecipe recipe,
                     double last_raw_steer, const Normalization& norm,
                     std::span<double> out) {
  out[0] = (goal.x - state.x) / norm.dx;
  out[1] = (goal.y - state.y) / norm.dy;
  out[2] = WrapAngle(goal.psi - state.psi) / norm.dpsi;
  out[3] = (goal.v - state.v) / norm.dv;
  if (recipe == FeatureRecipe::kGoalDiff5) out[4] = last_raw_steer;
}

void PendulumFeatures(const PendulumState& state, const Normalization& norm,
                      std::span<double> out) {
  out[0] = state.p / norm.pendulum[0];
  out[1] = state.p_dot / norm.pendulum[1];
  out[2] = state.theta / norm.pendulum[2];
  out[3] = state.theta_dot / norm.pendulum[3];
}

std::vector<double> FeatureVector(const Pose& state, const Task& task,
                                  double last_raw_steer,
                                  const Normalization& norm) {
  std::vector<double> out(static_cast<std::size_t>(FeatureDim(task.recipe)));
  VehicleFeatures(state, task.GoalPose(), task.recipe, last_raw_steer, norm,
                  out);
  return out;
}

Pose MirrorPose(const Pose& p) { return {p.x, -p.y, -p.psi, p.v}; }

Task MirrorTask(const Task& task) {
  Task m = task;
  m.id = task.id + "-mirrored";
  m.z0[1] = -task.z0[1];
  m.z0[2] = -task.z0[2];
  m.z_goal[1] = -task.z_goal[1];
  m.z_goal[2] = -task.z_goal[2];
  return m;
}

void MirrorFeatures(std::span<double> features, FeatureRecipe recipe) {
  features[1] = -features[1];
  features[2] = -features[2];
  if (recipe == FeatureRecipe::kGoalDiff5) features[4] = -features[4];
}

void MirrorControl(std::span<double> raw_outputs) {
  raw_outputs[kSteerOutput] = -raw_outputs[kSteerOutput];
}

bool NeedsMirroring(const Pose& goal) { return WrapAngle(goal.psi) < 0.0; }

std::vector<Task> HeadingGrid(double step_deg, double max_deg,
                              const Tolerances& tol) {
  if (!(step_deg > 0.0) || step_deg > max_deg || max_deg > 180.0) {
    throw std::invalid_argument("heading grid needs 0 < step <= max <= 180");
  }
  const int count = static_cast<int>(std::floor(max_deg / step_deg)) + 1;
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double deg = k * step_deg;
    Task task;
    std::ostringstream id;
    id << "heading_" << deg;
    task.id = id.str();
    task.env = EnvKind::kVehicle;
    task.z_goal = {0.0, 0.0, DegToRad(deg), 0.0};
    task.tolerances = tol;
    task.recipe = FeatureRecipe::kGoalDiff5;
    tasks.push_back(task);
  }
  return tasks;
}

Task NavigationTask(const Pose& goal, const Tolerances& tol) {
  Task task;
  task.id = "navigation";
  task.env = EnvKind::kVehicle;
  task.z_goal = {goal.x, goal.y, goal.psi, goal.v};
  task.tolerances = tol;
  task.recipe = FeatureRecipe::kGoalDiff4;
  return task;
}

PendulumTaskKind ParsePendulumTaskKind(const std::string& name) {
  if (name == "stabilize") return PendulumTaskKind::kStabilize;
  if (name == "swingup") return PendulumTaskKind::kSwingUp;
  if (name == "both") return PendulumTaskKind::kBoth;
  throw std::invalid_argument("unknown pendulum task kind '" + name +
                              "' (expected stabilize, swingup, both)");
}

std::vector<Task> PendulumTasks(PendulumTaskKind kind) {
  Task base;
  base.env = EnvKind::kPendulum;
  base.recipe = FeatureRecipe::kPendulum;
  base.tolerances.eps_psi = kPendulumUprightTolerance;

  std::vector<Task> tasks;
  if (kind != PendulumTaskKind::kSwingUp) {
    Task stabilize = base;
    stabilize.id = "stabilize";
    tasks.push_back(stabilize);
  }
  if (kind != PendulumTaskKind::kStabilize) {
    Task swingup = base;
    swingup.id = "swingup";
    swingup.z0 = {0.0, 0.0, kPi, 0.0};
    tasks.push_back(swingup);
  }
  return tasks;
}

bool PendulumGoalFlag(const PendulumState& s, const Task& task) {
  return std::abs(WrapAngle(s.theta - task.z_goal[2])) <
         task.tolerances.eps_psi;
}

double LookupDistance(const Pose& setpoint, const Pose& achieved,
                      const LookupWeights& w) {
  const GoalErrors e = ComputeGoalErrors(setpoint, achieved);
  return w.w_d * e.e_d + w.w_psi_per_deg * RadToDeg(e.e_psi) + w.w_v * e.e_v;
}

std::size_t NearestGoalIndex(const Pose& setpoint,
                             std::span<const GoalTuple> store,
                             const LookupWeights& w) {
  if (store.empty()) throw LookupError("goal tuple store is empty");
  std::size_t best = 0;
  double best_dist = LookupDistance(setpoint, store[0].achieved, w);
  for (std::size_t i = 1; i < store.size(); ++i) {
    const double d = LookupDistance(setpoint, store[i].achieved, w);
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  return best;
}

const GoalTuple& NearestGoalLookup(const Pose& setpoint,
                                   std::span<const GoalTuple> store,
                                   const LookupWeights& w) {
  return store[NearestGoalIndex(setpoint, store, w)];
}

}  // namespace tshc
