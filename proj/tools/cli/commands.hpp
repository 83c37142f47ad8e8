#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cli/serialization.hpp"

namespace tshc::cli {

inline constexpr const char* kOutputDirEnv = "TSHC_OUTPUT_DIR";

enum ExitCode { kExitOk = 0, kExitError = 1, kExitUnsolved = 2 };

// Precedence: explicit flag, then the config's output_dir, then the
// TSHC_OUTPUT_DIR environment variable, then ./runs.
std::filesystem::path ResolveOutputDir(
    const std::optional<std::filesystem::path>& flag,
    const std::optional<std::filesystem::path>& from_config);

struct TrainArtifacts {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  std::filesystem::path summary;
};

TrainArtifacts ArtifactPaths(const std::filesystem::path& dir,
                             const std::string& name, std::uint64_t seed);

struct TrainOptions {
  std::filesystem::path config;
  int workers = 1;
  std::optional<std::filesystem::path> output_dir;
  bool quiet = false;
};

// Exit status: 0 iff every task is solved, 2 when some task stays unsolved.
// Configuration problems surface as exceptions.
int CmdTrain(const TrainOptions& opts, std::ostream& log);

struct ReplayOptions {
  std::filesystem::path checkpoint;
  std::optional<std::string> task_id;
  std::optional<std::string> setpoint;  // "x,y,psi,v", unit suffixes allowed
  std::optional<std::filesystem::path> task_file;
  bool mirror = false;
  std::optional<std::filesystem::path> output_dir;
};

struct ReplayOutcome {
  Task task;  // as simulated (mirrored when requested)
  RolloutResult result;
  std::filesystem::path csv;
  std::filesystem::path summary;
};

ReplayOutcome RunReplay(const ReplayOptions& opts, std::ostream& log);
int CmdReplay(const ReplayOptions& opts, std::ostream& log);

struct PlotOptions {
  std::vector<std::filesystem::path> inputs;  // CSV files or checkpoints
  std::filesystem::path output;
};

struct PlotSeries {
  std::string label;
  EnvKind env = EnvKind::kVehicle;
  std::vector<TrajectoryPoint> points;
  std::optional<Pose> goal;
};

std::string RenderSvg(const std::vector<PlotSeries>& series);
int CmdPlot(const PlotOptions& opts, std::ostream& log);

// Writes the task list a config would train on.
int CmdTasks(const std::filesystem::path& config,
             const std::filesystem::path& output, std::ostream& log);

}  // namespace tshc::cli
