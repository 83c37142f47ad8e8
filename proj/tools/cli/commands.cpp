#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli/run_config.hpp"

namespace tshc::cli {
namespace {

json ScoreJson(const BestScore& s) {
  json j = {{"N_star", s.n_star}};
  j["P_star"] = s.p_star ? json(*s.p_star) : json();
  j["J_star"] = s.j_star ? RewardToJson(*s.j_star) : json();
  return j;
}

std::string ShapeText(const std::vector<int>& sizes) {
  std::string s = "[";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(sizes[i]);
  }
  return s + "]";
}

void CheckShape(const MlpSpec& spec, const Task& task) {
  const int need_in = FeatureDim(task.recipe);
  const int need_out = ControlDim(task.env);
  if (spec.InputDim() != need_in || spec.OutputDim() != need_out) {
    throw ShapeError("checkpoint network " + ShapeText(spec.layer_sizes) +
                     " maps " + std::to_string(spec.InputDim()) + " -> " +
                     std::to_string(spec.OutputDim()) + ", but " +
                     ToString(task.env) + " task '" + task.id + "' needs " +
                     std::to_string(need_in) + " -> " +
                     std::to_string(need_out));
  }
}

std::string StripSuffix(std::string s, const std::string& suffix) {
  if (s.size() >= suffix.size() &&
      s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
    s.resize(s.size() - suffix.size());
  }
  return s;
}

Pose ParseSetpoint(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) parts.push_back(item);
  if (parts.size() != 4) {
    throw std::invalid_argument("--setpoint expects x,y,psi,v, got '" + text +
                                "'");
  }
  return {ParseQuantity(parts[0], Dimension::kLength),
          ParseQuantity(parts[1], Dimension::kLength),
          ParseQuantity(parts[2], Dimension::kAngle),
          ParseQuantity(parts[3], Dimension::kSpeed)};
}

std::string SafeId(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      c = '_';
    }
  }
  return out;
}

}  // namespace

std::filesystem::path ResolveOutputDir(
    const std::optional<std::filesystem::path>& flag,
    const std::optional<std::filesystem::path>& from_config) {
  if (flag) return *flag;
  if (from_config) return *from_config;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "runs";
}

TrainArtifacts ArtifactPaths(const std::filesystem::path& dir,
                             const std::string& name, std::uint64_t seed) {
  const std::string stem = name + "-seed" + std::to_string(seed);
  return {dir / (stem + ".ckpt.json"), dir / (stem + ".log.jsonl"),
          dir / (stem + ".summary.json")};
}

int CmdTrain(const TrainOptions& opts, std::ostream& log) {
  RunConfig cfg = LoadRunConfig(opts.config);
  cfg.trainer.workers = std::max(1, opts.workers);
  cfg.trainer.Validate();
  const std::vector<Task> tasks =
      BuildTasks(cfg.tasks, opts.config.parent_path());

  const auto dir = ResolveOutputDir(opts.output_dir, cfg.output_dir);
  std::filesystem::create_directories(dir);
  const TrainArtifacts out = ArtifactPaths(dir, cfg.name, cfg.seed);
  std::ofstream log_file(out.log, std::ios::trunc);
  if (!log_file) throw FormatError(out.log.string() + ": cannot open log");

  Checkpoint ckpt;
  ckpt.spec = cfg.policy;
  ckpt.env = cfg.env;
  ckpt.tasks = tasks;
  ckpt.lookup = cfg.lookup;
  ckpt.seed = cfg.seed;
  ckpt.t_max = cfg.trainer.t_max;
  ckpt.t_goal = cfg.trainer.t_goal;

  TrainCallbacks callbacks;
  callbacks.on_iteration = [&](const IterationRecord& r) {
    json rec = {{"restart", r.restart},
                {"iter", r.iter},
                {"sigma", r.sigma},
                {"N_tasks_star", r.n_tasks_star},
                {"P", r.P},
                {"J", RewardToJson(r.J)},
                {"best", ScoreJson(r.best)},
                {"wall_time_s", r.wall_time_s}};
    log_file << rec.dump() << '\n';
    log_file.flush();
    if (!opts.quiet) {
      char line[160];
      std::snprintf(line, sizeof line,
                    "restart %d iter %d sigma %.4g N %d/%zu J %s best %d\n",
                    r.restart, r.iter, r.sigma, r.n_tasks_star, tasks.size(),
                    r.J.ToString().c_str(), r.best.n_star);
      log << line << std::flush;
    }
  };
  callbacks.on_improvement = [&](const BestSolution& best) {
    ckpt.theta = best.theta;
    ckpt.score = best.score;
    WriteCheckpoint(out.checkpoint, ckpt);
  };

  const TrainResult result =
      TshcRun(cfg.trainer, tasks, cfg.env, cfg.policy, callbacks);

  ckpt.theta = result.best.theta;
  ckpt.score = result.best.score;
  ckpt.goal_tuples =
      CollectGoalTuples(ckpt.theta, cfg.policy, tasks, cfg.env, cfg.trainer);
  WriteCheckpoint(out.checkpoint, ckpt);

  const int n_tasks = static_cast<int>(tasks.size());
  int solved_restarts = 0;
  json restarts = json::array();
  for (const RestartSummary& r : result.restarts) {
    solved_restarts += r.solved_all ? 1 : 0;
    restarts.push_back({{"restart", r.restart},
                        {"iterations", r.iterations},
                        {"N_tasks_star", r.n_tasks_star},
                        {"solved_all", r.solved_all}});
  }
  json summary = ScoreJson(result.best.score);
  summary["name"] = cfg.name;
  summary["seed"] = cfg.seed;
  summary["N_tasks"] = n_tasks;
  summary["wall_time_s"] = result.wall_time_s;
  summary["rollouts"] = result.rollouts;
  summary["restarts_with_solution"] = solved_restarts;
  summary["restarts"] = restarts;
  summary["checkpoint"] = out.checkpoint.filename().string();
  WriteJsonAtomic(out.summary, summary);

  if (!opts.quiet) {
    log << "solved " << result.best.score.n_star << "/" << n_tasks
        << " tasks in " << result.wall_time_s << " s; checkpoint "
        << out.checkpoint.string() << "\n";
  }
  return result.best.score.n_star == n_tasks ? kExitOk : kExitUnsolved;
}

ReplayOutcome RunReplay(const ReplayOptions& opts, std::ostream& log) {
  if (opts.task_id.has_value() == opts.setpoint.has_value()) {
    throw std::invalid_argument("replay needs exactly one of --task or --setpoint");
  }
  const Checkpoint ckpt = ReadCheckpoint(opts.checkpoint);
  if (ckpt.theta.empty()) {
    throw FormatError(opts.checkpoint.string() + ": checkpoint holds no parameters");
  }
  const std::vector<Task> pool =
      opts.task_file ? ReadTaskList(*opts.task_file) : ckpt.tasks;

  Task task;
  std::string label;
  if (opts.task_id) {
    const auto it = std::find_if(pool.begin(), pool.end(), [&](const Task& t) {
      return t.id == *opts.task_id;
    });
    if (it == pool.end()) {
      std::string ids;
      for (const Task& t : pool) ids += (ids.empty() ? "" : ", ") + t.id;
      throw std::invalid_argument("no task '" + *opts.task_id +
                                  "' (available: " + ids + ")");
    }
    task = *it;
    label = task.id;
  } else {
    const Pose setpoint = ParseSetpoint(*opts.setpoint);
    const auto base = std::find_if(pool.begin(), pool.end(), [](const Task& t) {
      return t.env == EnvKind::kVehicle;
    });
    if (base == pool.end()) {
      throw ShapeError("setpoints need a vehicle checkpoint, network " +
                       ShapeText(ckpt.spec.layer_sizes) +
                       " was trained on pendulum tasks");
    }
    const Pose query = opts.mirror ? MirrorPose(setpoint) : setpoint;
    Pose commanded = query;
    if (!ckpt.goal_tuples.empty()) {
      const GoalTuple& g = NearestGoalLookup(query, ckpt.goal_tuples, ckpt.lookup);
      commanded = g.commanded;
      log << "setpoint served by goal (" << g.commanded.x << ", "
          << g.commanded.y << ", " << RadToDeg(g.commanded.psi) << " deg, "
          << g.commanded.v << ")\n";
    }
    task = *base;
    task.id = "setpoint";
    task.z_goal = {commanded.x, commanded.y, commanded.psi, commanded.v};
    label = "setpoint";
  }
  if (opts.mirror) {
    task = MirrorTask(task);
    label += "-mirror";
  }
  CheckShape(ckpt.spec, task);

  RolloutOptions ro;
  ro.t_max = ckpt.t_max;
  ro.t_goal = ckpt.t_goal;
  ro.mirror = opts.mirror;
  ro.record_trajectory = true;
  MlpPolicy policy(ckpt.spec);

  ReplayOutcome outcome;
  outcome.task = task;
  outcome.result = Rollout(ckpt.theta, policy, task, ckpt.env, ro);

  const auto dir = ResolveOutputDir(opts.output_dir, std::nullopt);
  const std::string stem =
      StripSuffix(opts.checkpoint.filename().string(), ".ckpt.json") + "-" +
      SafeId(label);
  outcome.csv = dir / (stem + ".csv");
  outcome.summary = dir / (stem + ".json");
  WriteTrajectoryCsv(outcome.csv, task.env, outcome.result.trajectory);
  WriteJsonAtomic(outcome.summary,
                  {{"F", outcome.result.solved ? 1 : 0},
                   {"P", outcome.result.pathlength},
                   {"J", RewardToJson(outcome.result.reward)},
                   {"steps", outcome.result.steps}});
  return outcome;
}

int CmdReplay(const ReplayOptions& opts, std::ostream& log) {
  const ReplayOutcome out = RunReplay(opts, log);
  log << "F=" << (out.result.solved ? 1 : 0) << " steps=" << out.result.steps
      << " J=" << out.result.reward.ToString() << " -> " << out.csv.string()
      << "\n";
  return out.result.solved ? kExitOk : kExitUnsolved;
}

std::string RenderSvg(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw std::invalid_argument("nothing to plot");
  const EnvKind env = series.front().env;
  for (const PlotSeries& s : series) {
    if (s.env != env) {
      throw std::invalid_argument("cannot mix vehicle and pendulum trajectories");
    }
    if (s.points.empty()) {
      throw std::invalid_argument("trajectory '" + s.label + "' is empty");
    }
  }
  // Vehicle: ground plane. Pendulum: pole angle over time.
  auto xy = [&](const TrajectoryPoint& p) {
    return env == EnvKind::kVehicle
               ? std::pair{p.state[0], p.state[1]}
               : std::pair{static_cast<double>(p.t), p.state[2]};
  };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto grow = [&](double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  for (const PlotSeries& s : series) {
    for (const TrajectoryPoint& p : s.points) grow(xy(p).first, xy(p).second);
    if (s.goal && env == EnvKind::kVehicle) grow(s.goal->x, s.goal->y);
  }
  const double pad_x = std::max(0.05 * (x1 - x0), 0.5);
  const double pad_y = std::max(0.05 * (y1 - y0), 0.5);
  x0 -= pad_x;
  x1 += pad_x;
  y0 -= pad_y;
  y1 += pad_y;

  const double width = 640.0, height = 640.0, margin = 60.0;
  double sx = (width - 2 * margin) / (x1 - x0);
  double sy = (height - 2 * margin) / (y1 - y0);
  if (env == EnvKind::kVehicle) sx = sy = std::min(sx, sy);
  const double marker = 4.0 / sx;

  std::ostringstream o;
  const auto f = FormatDouble;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
    << height << "\">\n";
  o << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
    << width - 2 * margin << "\" height=\"" << height - 2 * margin
    << "\" fill=\"none\" stroke=\"#888\"/>\n";
  const char* xlabel = env == EnvKind::kVehicle ? "x [m]" : "t [step]";
  const char* ylabel = env == EnvKind::kVehicle ? "y [m]" : "theta [rad]";
  o << "<text x=\"" << width / 2 << "\" y=\"" << height - 15
    << "\" text-anchor=\"middle\" font-size=\"14\">" << xlabel << "</text>\n";
  o << "<text x=\"18\" y=\"" << height / 2
    << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
    << height / 2 << ")\">" << ylabel << "</text>\n";
  char tick[64];
  std::snprintf(tick, sizeof tick, "%.3g", x0);
  o << "<text x=\"" << margin << "\" y=\"" << height - margin + 16
    << "\" font-size=\"11\">" << tick << "</text>\n";
  std::snprintf(tick, sizeof tick, "%.3g", x1);
  o << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 16
    << "\" font-size=\"11\" text-anchor=\"end\">" << tick << "</text>\n";
  std::snprintf(tick, sizeof tick, "%.3g", y0);
  o << "<text x=\"" << margin - 4 << "\" y=\"" << height - margin
    << "\" font-size=\"11\" text-anchor=\"end\">" << tick << "</text>\n";
  std::snprintf(tick, sizeof tick, "%.3g", y1);
  o << "<text x=\"" << margin - 4 << "\" y=\"" << margin + 10
    << "\" font-size=\"11\" text-anchor=\"end\">" << tick << "</text>\n";

  // World coordinates from here on, y pointing up.
  o << "<g transform=\"translate(" << margin << ' ' << height - margin
    << ") scale(" << f(sx) << ' ' << f(-sy) << ") translate(" << f(-x0) << ' '
    << f(-y0) << ")\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double hue = 360.0 * static_cast<double>(i) /
                       static_cast<double>(series.size());
    char color[48];
    std::snprintf(color, sizeof color, "hsl(%.0f,70%%,42%%)", hue);
    const PlotSeries& s = series[i];
    o << "<polyline data-label=\"" << s.label << "\" fill=\"none\" stroke=\""
      << color << "\" stroke-width=\"1.5\" vector-effect=\"non-scaling-stroke\" points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      const auto [px, py] = xy(s.points[k]);
      o << (k ? " " : "") << f(px) << ',' << f(py);
    }
    o << "\"/>\n";
  }
  for (const PlotSeries& s : series) {
    const auto [ax, ay] = xy(s.points.front());
    const auto [bx, by] = xy(s.points.back());
    o << "<ellipse class=\"start\" cx=\"" << f(ax) << "\" cy=\"" << f(ay)
      << "\" rx=\"" << f(marker) << "\" ry=\"" << f(marker * sx / sy)
      << "\" fill=\"red\"/>\n";
    o << "<ellipse class=\"end\" cx=\"" << f(bx) << "\" cy=\"" << f(by)
      << "\" rx=\"" << f(marker * 0.8) << "\" ry=\"" << f(marker * 0.8 * sx / sy)
      << "\" fill=\"black\"/>\n";
    if (s.goal && env == EnvKind::kVehicle) {
      const double gx = s.goal->x, gy = s.goal->y, len = 3.0 * marker;
      o << "<line class=\"goal\" x1=\"" << f(gx) << "\" y1=\"" << f(gy)
        << "\" x2=\"" << f(gx + len * std::cos(s.goal->psi)) << "\" y2=\""
        << f(gy + len * std::sin(s.goal->psi))
        << "\" stroke=\"red\" stroke-dasharray=\"4 2\" "
           "vector-effect=\"non-scaling-stroke\"/>\n";
    }
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

int CmdPlot(const PlotOptions& opts, std::ostream& log) {
  if (opts.inputs.empty()) throw std::invalid_argument("plot needs at least one input");
  std::vector<PlotSeries> series;
  for (const auto& path : opts.inputs) {
    if (path.extension() == ".csv") {
      TrajectoryFile file = ReadTrajectoryCsv(path);
      series.push_back({path.stem().string(), file.env, std::move(file.points),
                        std::nullopt});
      continue;
    }
    const Checkpoint ckpt = ReadCheckpoint(path);
    if (ckpt.theta.empty()) {
      throw FormatError(path.string() + ": checkpoint holds no parameters");
    }
    MlpPolicy policy(ckpt.spec);
    RolloutOptions ro;
    ro.t_max = ckpt.t_max;
    ro.t_goal = ckpt.t_goal;
    ro.record_trajectory = true;
    for (const Task& task : ckpt.tasks) {
      CheckShape(ckpt.spec, task);
      RolloutResult r = Rollout(ckpt.theta, policy, task, ckpt.env, ro);
      series.push_back({task.id, task.env, std::move(r.trajectory),
                        task.env == EnvKind::kVehicle
                            ? std::optional<Pose>(task.GoalPose())
                            : std::nullopt});
    }
  }
  WriteTextAtomic(opts.output, RenderSvg(series));
  log << "wrote " << series.size() << " trajectories to "
      << opts.output.string() << "\n";
  return kExitOk;
}

int CmdTasks(const std::filesystem::path& config,
             const std::filesystem::path& output, std::ostream& log) {
  const RunConfig cfg = LoadRunConfig(config);
  const std::vector<Task> tasks = BuildTasks(cfg.tasks, config.parent_path());
  WriteTaskList(output, tasks);
  log << "wrote " << tasks.size() << " tasks to " << output.string() << "\n";
  return kExitOk;
}

}  // namespace tshc::cli
