#pragma once

// On-disk formats: task lists and checkpoints are JSON documents, trajectories
// are CSV. Doubles are written with 17 significant digits so every value
// survives a write/read cycle bit-for-bit.

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "tshc/rollout.hpp"
#include "tshc/tasks.hpp"
#include "tshc/trainer.hpp"

namespace tshc::cli {

using nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTaskListFormat = "tshc-tasks";
inline constexpr const char* kCheckpointFormat = "tshc-checkpoint";
inline constexpr int kFormatVersion = 1;

std::string FormatDouble(double value);

json RewardToJson(const Reward& r);
Reward RewardFromJson(const json& j);

json TaskToJson(const Task& task);
Task TaskFromJson(const json& j);

json EnvToJson(const EnvConfig& env);
EnvConfig EnvFromJson(const json& j);

void WriteTaskList(const std::filesystem::path& path,
                   const std::vector<Task>& tasks);
std::vector<Task> ReadTaskList(const std::filesystem::path& path);

// FNV-1a over the canonical JSON of the task list, as 16 hex digits.
std::string TaskDigest(const std::vector<Task>& tasks);

struct Checkpoint {
  MlpSpec spec;
  EnvConfig env;
  ParamVector theta;
  BestScore score;
  std::vector<Task> tasks;
  std::vector<GoalTuple> goal_tuples;
  LookupWeights lookup;
  std::uint64_t seed = 0;
  int t_max = 100;
  int t_goal = 1;
};

json CheckpointToJson(const Checkpoint& ckpt);
Checkpoint CheckpointFromJson(const json& j);
void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

// Writes to "<path>.tmp" and renames, so readers never see a partial file.
void WriteTextAtomic(const std::filesystem::path& path,
                     const std::string& text);
void WriteJsonAtomic(const std::filesystem::path& path, const json& j);
json ReadJson(const std::filesystem::path& path);

struct TrajectoryFile {
  EnvKind env = EnvKind::kVehicle;
  std::vector<TrajectoryPoint> points;
};

// Vehicle columns: t,x,y,psi,v,delta. Pendulum: t,p,p_dot,theta,theta_dot,force.
std::string TrajectoryCsv(EnvKind env,
                          const std::vector<TrajectoryPoint>& points);
void WriteTrajectoryCsv(const std::filesystem::path& path, EnvKind env,
                        const std::vector<TrajectoryPoint>& points);
TrajectoryFile ParseTrajectoryCsv(const std::string& text,
                                  const std::string& source);
TrajectoryFile ReadTrajectoryCsv(const std::filesystem::path& path);

}  // namespace tshc::cli
