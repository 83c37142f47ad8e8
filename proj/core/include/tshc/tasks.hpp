#pragma once

// Training tasks (motion primitives), feature-vector recipes, control
// mirroring about the x-axis, and the achieved/commanded goal tuple store.

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tshc/dynamics.hpp"
#include "tshc/policy.hpp"
#include "tshc/reward.hpp"

namespace tshc {

enum class EnvKind { kVehicle, kPendulum };

enum class FeatureRecipe {
  kGoalDiff4,  // [dx, dy, dpsi, dv] / normalization
  kGoalDiff5,  // same plus the previous raw steering output
  kPendulum,   // [p, p_dot, theta, theta_dot] / normalization
};

const char* ToString(EnvKind kind);
EnvKind ParseEnvKind(const std::string& name);
const char* ToString(FeatureRecipe recipe);
FeatureRecipe ParseFeatureRecipe(const std::string& name);
int FeatureDim(FeatureRecipe recipe);
int ControlDim(EnvKind kind);

struct Normalization {
  double dx = 20.0;
  double dy = 20.0;
  double dpsi = kPi;
  double dv = 10.0;
  std::array<double, 4> pendulum{2.4, 3.0, kPi, 4.0 * kPi};
};

// Full-state vectors: vehicle [x, y, psi, v]; pendulum [p, p_dot, theta,
// theta_dot].
using StateVec = std::array<double, 4>;

struct Task {
  std::string id;
  EnvKind env = EnvKind::kVehicle;
  StateVec z0{};
  StateVec z_goal{};
  Tolerances tolerances;
  std::optional<int> t_max;
  FeatureRecipe recipe = FeatureRecipe::kGoalDiff5;

  Pose GoalPose() const { return {z_goal[0], z_goal[1], z_goal[2], z_goal[3]}; }
  bool Valid() const;
};

Pose ToPose(const VehicleState& s);
VehicleState InitialVehicleState(const Task& task);
PendulumState InitialPendulumState(const Task& task);

// Fills `out` (FeatureDim(recipe) entries). `last_raw_steer` is the previous
// steering-related network output before scaling, in [-1, 1].
void VehicleFeatures(const Pose& state, const Pose& goal, FeatureRecipe recipe,
                     double last_raw_steer, const Normalization& norm,
                     std::span<double> out);
void PendulumFeatures(const PendulumState& state, const Normalization& norm,
                      std::span<double> out);

std::vector<double> FeatureVector(const Pose& state, const Task& task,
                                  double last_raw_steer,
                                  const Normalization& norm);

// Reflection about the x-axis.
Pose MirrorPose(const Pose& p);
Task MirrorTask(const Task& task);
// Negates the lateral entries (dy, dpsi and the previous steering output).
void MirrorFeatures(std::span<double> features, FeatureRecipe recipe);
// Negates the steering output; velocity output unchanged.
void MirrorControl(std::span<double> raw_outputs);
// True when the goal heading wraps to a negative angle, i.e. the goal is
// served by the network trained on the reflected (positive) heading.
bool NeedsMirroring(const Pose& goal);

// Goal-reaching tasks psi_goal = 0, step, ..., <= max [deg], all from rest at
// the origin.
std::vector<Task> HeadingGrid(double step_deg, double max_deg,
                              const Tolerances& tol = {});

// Freeform navigation from rest at the origin, four-feature recipe.
Task NavigationTask(const Pose& goal, const Tolerances& tol = {});

enum class PendulumTaskKind { kStabilize, kSwingUp, kBoth };
PendulumTaskKind ParsePendulumTaskKind(const std::string& name);

inline constexpr double kPendulumUprightTolerance = DegToRad(12.0);

// Goal is the upright pole within +-12 deg (angle-only criterion).
std::vector<Task> PendulumTasks(PendulumTaskKind kind);

bool PendulumGoalFlag(const PendulumState& s, const Task& task);

struct GoalTuple {
  Pose achieved;   // terminal state actually reached in training
  Pose commanded;  // goal fed to the network to reach it
};

// Defaults scale each error by the default goal tolerance, so one unit of
// distance is one tolerance band in any coordinate.
struct LookupWeights {
  double w_d = 4.0;            // per metre
  double w_psi_per_deg = 1.0;  // per degree of heading error
  double w_v = 0.72;           // per m/s
};

class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double LookupDistance(const Pose& setpoint, const Pose& achieved,
                      const LookupWeights& w);

// Index of the tuple whose achieved goal is closest to the setpoint; ties go
// to the lowest index. Throws LookupError on an empty store.
std::size_t NearestGoalIndex(const Pose& setpoint,
                             std::span<const GoalTuple> store,
                             const LookupWeights& w = {});
const GoalTuple& NearestGoalLookup(const Pose& setpoint,
                                   std::span<const GoalTuple> store,
                                   const LookupWeights& w = {});

}  // namespace tshc
