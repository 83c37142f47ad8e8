#pragma once

// Run configuration file (YAML). Every key is documented in README.md;
// unknown keys are rejected. Physical quantities accept an optional unit
// suffix ("5 km/h", "40 deg", "0.2 s") and are converted to SI.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tshc/rollout.hpp"
#include "tshc/tasks.hpp"
#include "tshc/trainer.hpp"

namespace tshc::cli {

// Carries a "<source>:<line>:<column>: " prefix when the position is known.
class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Dimension {
  kNone,
  kLength,
  kSpeed,
  kAcceleration,
  kAngle,
  kAngularRate,
  kTime,
  kMass,
  kForce,
};

// Parses "<number>[ ]<unit>" into SI. A bare number is taken as SI already.
// Throws std::invalid_argument on an unknown or mismatched unit.
double ParseQuantity(const std::string& text, Dimension dim);

enum class TaskGenerator { kNavigation, kHeadingGrid, kPendulum, kFile };

struct TaskSpec {
  TaskGenerator generator = TaskGenerator::kNavigation;
  Pose goal{20.0, 0.0, kPi / 4.0, 0.0};  // navigation
  double step_deg = 10.0;                 // heading grid
  double max_deg = 90.0;
  PendulumTaskKind pendulum_kind = PendulumTaskKind::kSwingUp;
  std::filesystem::path file;  // task-list file
  Tolerances tolerances;
  std::optional<int> t_max;
};

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output_dir;
  MlpSpec policy{{4, 64, 64, 2}};
  TshcConfig trainer;
  TaskSpec tasks;
  EnvConfig env;
  LookupWeights lookup;
};

RunConfig ParseRunConfig(const std::string& yaml_text,
                         const std::string& source_name = "<config>");
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Materializes the task list selected by the config. Relative task-file
// paths resolve against `base_dir`.
std::vector<Task> BuildTasks(const TaskSpec& spec,
                             const std::filesystem::path& base_dir = {});

}  // namespace tshc::cli
