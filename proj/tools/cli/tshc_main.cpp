#include <CLI11.hpp>

#include <iostream>
#include <thread>

#include "cli/commands.hpp"
#include "cli/run_config.hpp"

namespace {

int DefaultWorkers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tshc::cli;

  CLI::App app{"Gradient-free training of small neural network controllers"};
  app.require_subcommand(1);

  TrainOptions train;
  train.workers = DefaultWorkers();
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "train a policy from a YAML config");
  train_cmd->add_option("config", train.config, "run configuration")->required();
  train_cmd->add_option("-w,--workers", train.workers, "worker threads")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("-o,--output-dir", train_out, "artifact directory");
  train_cmd->add_flag("-q,--quiet", train.quiet, "no per-iteration progress");

  ReplayOptions replay;
  std::string replay_task, replay_setpoint, replay_tasks, replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "roll out a checkpoint");
  replay_cmd->add_option("checkpoint", replay.checkpoint)->required();
  auto* task_opt = replay_cmd->add_option("--task", replay_task, "task id");
  auto* set_opt = replay_cmd->add_option(
      "--setpoint", replay_setpoint, "x,y,psi,v (e.g. 0,0,270deg,0)");
  task_opt->excludes(set_opt);
  replay_cmd->add_option("--tasks", replay_tasks, "task-list file to pick --task from");
  replay_cmd->add_flag("--mirror", replay.mirror, "reflect about the x-axis");
  replay_cmd->add_option("-o,--output-dir", replay_out, "artifact directory");

  PlotOptions plot;
  std::vector<std::string> plot_inputs;
  std::string plot_output;
  auto* plot_cmd = app.add_subcommand("plot", "render trajectories to SVG");
  plot_cmd->add_option("inputs", plot_inputs, "trajectory CSVs or checkpoints")
      ->required();
  plot_cmd->add_option("-o,--output", plot_output, "SVG file")->required();

  std::string tasks_config, tasks_output;
  auto* tasks_cmd = app.add_subcommand("tasks", "write the task list of a config");
  tasks_cmd->add_option("config", tasks_config)->required();
  tasks_cmd->add_option("-o,--output", tasks_output, "task-list JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      if (!train_out.empty()) train.output_dir = train_out;
      return CmdTrain(train, std::cerr);
    }
    if (*replay_cmd) {
      if (*task_opt) replay.task_id = replay_task;
      if (*set_opt) replay.setpoint = replay_setpoint;
      if (!replay_tasks.empty()) replay.task_file = replay_tasks;
      if (!replay_out.empty()) replay.output_dir = replay_out;
      return CmdReplay(replay, std::cerr);
    }
    if (*plot_cmd) {
      plot.inputs.assign(plot_inputs.begin(), plot_inputs.end());
      plot.output = plot_output;
      return CmdPlot(plot, std::cerr);
    }
    if (*tasks_cmd) return CmdTasks(tasks_config, tasks_output, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
