#include "cli/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tshc::cli {
namespace {

json Vec(const StateVec& v) { return json::array({v[0], v[1], v[2], v[3]}); }

StateVec VecFrom(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 4) {
    throw FormatError(std::string(what) + " must be an array of 4 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

json PoseToJson(const Pose& p) { return json::array({p.x, p.y, p.psi, p.v}); }

Pose PoseFromJson(const json& j, const char* what) {
  const StateVec v = VecFrom(j, what);
  return {v[0], v[1], v[2], v[3]};
}

json RectToJson(const Rect& r) {
  return json::array({r.x_min, r.y_min, r.x_max, r.y_max});
}

Rect RectFromJson(const json& j) {
  const StateVec v = VecFrom(j, "rectangle");
  return {v[0], v[1], v[2], v[3]};
}

void CheckHeader(const json& j, const char* format) {
  if (!j.is_object() || j.value("format", "") != format) {
    throw FormatError(std::string("not a ") + format + " document");
  }
  if (j.value("version", 0) != kFormatVersion) {
    throw FormatError(std::string("unsupported ") + format + " version");
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

json RewardToJson(const Reward& r) {
  if (r.crashed()) return "crash";
  return r.value();
}

Reward RewardFromJson(const json& j) {
  if (j.is_string() && j.get<std::string>() == "crash") return Reward::Crash();
  if (!j.is_number()) throw FormatError("reward must be a number or \"crash\"");
  return Reward(j.get<double>());
}

json TaskToJson(const Task& task) {
  json j = {
      {"id", task.id},
      {"env", ToString(task.env)},
      {"z0", Vec(task.z0)},
      {"z_goal", Vec(task.z_goal)},
      {"tolerances",
       {{"eps_d", task.tolerances.eps_d},
        {"eps_psi", task.tolerances.eps_psi},
        {"eps_v", task.tolerances.eps_v}}},
      {"recipe", ToString(task.recipe)},
  };
  if (task.t_max) j["t_max"] = *task.t_max;
  return j;
}

Task TaskFromJson(const json& j) {
  try {
    Task task;
    task.id = j.at("id").get<std::string>();
    task.env = ParseEnvKind(j.at("env").get<std::string>());
    task.z0 = VecFrom(j.at("z0"), "z0");
    task.z_goal = VecFrom(j.at("z_goal"), "z_goal");
    const json& tol = j.at("tolerances");
    task.tolerances = {tol.at("eps_d").get<double>(),
                       tol.at("eps_psi").get<double>(),
                       tol.at("eps_v").get<double>()};
    task.recipe = ParseFeatureRecipe(j.at("recipe").get<std::string>());
    if (j.contains("t_max")) task.t_max = j.at("t_max").get<int>();
    if (!task.Valid()) throw FormatError("task '" + task.id + "' is invalid");
    return task;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed task: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed task: ") + e.what());
  }
}

json EnvToJson(const EnvConfig& env) {
  json obstacles = json::array();
  for (const Rect& r : env.vehicle.obstacles) obstacles.push_back(RectToJson(r));
  const ActuatorLimits& l = env.limits;
  const PendulumParams& p = env.pendulum;
  const Normalization& n = env.norm;
  return {
      {"vehicle",
       {{"wheelbase", env.vehicle.wheelbase},
        {"ts", env.vehicle.ts},
        {"workspace", RectToJson(env.vehicle.workspace)},
        {"obstacles", obstacles}}},
      {"limits",
       {{"v", {l.v_min, l.v_max}},
        {"vdot", {l.vdot_min, l.vdot_max}},
        {"delta", {l.delta_min, l.delta_max}},
        {"deltadot", {l.deltadot_min, l.deltadot_max}}}},
      {"vvc",
       {{"mode", ToString(env.vvc.mode)},
        {"r_thresh", env.vvc.r_thresh},
        {"margin", env.vvc.margin}}},
      {"pendulum",
       {{"cart_mass", p.cart_mass},
        {"pole_mass", p.pole_mass},
        {"half_length", p.half_length},
        {"gravity", p.gravity},
        {"force_max", p.force_max},
        {"ts", p.ts},
        {"track_limit", p.track_limit}}},
      {"normalization",
       {{"dx", n.dx},
        {"dy", n.dy},
        {"dpsi", n.dpsi},
        {"dv", n.dv},
        {"pendulum", n.pendulum}}},
      {"reward",
       {{"mode", ToString(env.reward)}, {"rich_weights", env.rich_weights}}},
  };
}

EnvConfig EnvFromJson(const json& j) {
  try {
    EnvConfig env;
    const json& v = j.at("vehicle");
    env.vehicle.wheelbase = v.at("wheelbase").get<double>();
    env.vehicle.ts = v.at("ts").get<double>();
    env.vehicle.workspace = RectFromJson(v.at("workspace"));
    for (const json& r : v.at("obstacles")) {
      env.vehicle.obstacles.push_back(RectFromJson(r));
    }
    const json& l = j.at("limits");
    auto pair = [&](const char* key, double& lo, double& hi) {
      lo = l.at(key).at(0).get<double>();
      hi = l.at(key).at(1).get<double>();
    };
    pair("v", env.limits.v_min, env.limits.v_max);
    pair("vdot", env.limits.vdot_min, env.limits.vdot_max);
    pair("delta", env.limits.delta_min, env.limits.delta_max);
    pair("deltadot", env.limits.deltadot_min, env.limits.deltadot_max);
    const json& vvc = j.at("vvc");
    env.vvc.mode = ParseVvcMode(vvc.at("mode").get<std::string>());
    env.vvc.r_thresh = vvc.at("r_thresh").get<double>();
    env.vvc.margin = vvc.at("margin").get<double>();
    const json& p = j.at("pendulum");
    env.pendulum.cart_mass = p.at("cart_mass").get<double>();
    env.pendulum.pole_mass = p.at("pole_mass").get<double>();
    env.pendulum.half_length = p.at("half_length").get<double>();
    env.pendulum.gravity = p.at("gravity").get<double>();
    env.pendulum.force_max = p.at("force_max").get<double>();
    env.pendulum.ts = p.at("ts").get<double>();
    env.pendulum.track_limit = p.at("track_limit").get<double>();
    const json& n = j.at("normalization");
    env.norm.dx = n.at("dx").get<double>();
    env.norm.dy = n.at("dy").get<double>();
    env.norm.dpsi = n.at("dpsi").get<double>();
    env.norm.dv = n.at("dv").get<double>();
    env.norm.pendulum = n.at("pendulum").get<std::array<double, 4>>();
    const json& r = j.at("reward");
    env.reward = ParseRewardMode(r.at("mode").get<std::string>());
    env.rich_weights = r.at("rich_weights").get<std::array<double, 4>>();
    return env;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed environment: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed environment: ") + e.what());
  }
}

void WriteTaskList(const std::filesystem::path& path,
                   const std::vector<Task>& tasks) {
  json list = json::array();
  for (const Task& t : tasks) list.push_back(TaskToJson(t));
  WriteJsonAtomic(path, {{"format", kTaskListFormat},
                         {"version", kFormatVersion},
                         {"tasks", list}});
}

std::vector<Task> ReadTaskList(const std::filesystem::path& path) {
  const json j = ReadJson(path);
  try {
    CheckHeader(j, kTaskListFormat);
    std::vector<Task> tasks;
    for (const json& t : j.at("tasks")) tasks.push_back(TaskFromJson(t));
    if (tasks.empty()) throw FormatError("task list is empty");
    return tasks;
  } catch (const std::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string TaskDigest(const std::vector<Task>& tasks) {
  json list = json::array();
  for (const Task& t : tasks) list.push_back(TaskToJson(t));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : list.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json CheckpointToJson(const Checkpoint& ckpt) {
  json tasks = json::array();
  for (const Task& t : ckpt.tasks) tasks.push_back(TaskToJson(t));
  json tuples = json::array();
  for (const GoalTuple& g : ckpt.goal_tuples) {
    tuples.push_back({{"achieved", PoseToJson(g.achieved)},
                      {"commanded", PoseToJson(g.commanded)}});
  }
  json score = {{"n_star", ckpt.score.n_star}, {"p_at_j", ckpt.score.p_at_j}};
  score["p_star"] = ckpt.score.p_star ? json(*ckpt.score.p_star) : json();
  score["j_star"] =
      ckpt.score.j_star ? RewardToJson(*ckpt.score.j_star) : json();
  return {
      {"format", kCheckpointFormat},
      {"version", kFormatVersion},
      {"layer_sizes", ckpt.spec.layer_sizes},
      {"env", EnvToJson(ckpt.env)},
      {"seed", ckpt.seed},
      {"t_max", ckpt.t_max},
      {"t_goal", ckpt.t_goal},
      {"score", score},
      {"task_digest", TaskDigest(ckpt.tasks)},
      {"tasks", tasks},
      {"goal_tuples", tuples},
      {"lookup",
       {{"w_d", ckpt.lookup.w_d},
        {"w_psi_per_deg", ckpt.lookup.w_psi_per_deg},
        {"w_v", ckpt.lookup.w_v}}},
      {"theta", ckpt.theta},
  };
}

Checkpoint CheckpointFromJson(const json& j) {
  CheckHeader(j, kCheckpointFormat);
  try {
    Checkpoint ckpt;
    ckpt.spec.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    if (!ckpt.spec.Valid()) throw FormatError("invalid layer_sizes");
    ckpt.env = EnvFromJson(j.at("env"));
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    ckpt.t_max = j.at("t_max").get<int>();
    ckpt.t_goal = j.at("t_goal").get<int>();
    const json& s = j.at("score");
    ckpt.score.n_star = s.at("n_star").get<int>();
    ckpt.score.p_at_j = s.at("p_at_j").get<double>();
    if (!s.at("p_star").is_null()) ckpt.score.p_star = s.at("p_star").get<double>();
    if (!s.at("j_star").is_null()) ckpt.score.j_star = RewardFromJson(s.at("j_star"));
    for (const json& t : j.at("tasks")) ckpt.tasks.push_back(TaskFromJson(t));
    if (j.at("task_digest").get<std::string>() != TaskDigest(ckpt.tasks)) {
      throw FormatError("task_digest does not match the stored task list");
    }
    for (const json& g : j.at("goal_tuples")) {
      ckpt.goal_tuples.push_back({PoseFromJson(g.at("achieved"), "achieved"),
                                  PoseFromJson(g.at("commanded"), "commanded")});
    }
    const json& w = j.at("lookup");
    ckpt.lookup = {w.at("w_d").get<double>(), w.at("w_psi_per_deg").get<double>(),
                   w.at("w_v").get<double>()};
    ckpt.theta = j.at("theta").get<ParamVector>();
    if (!ckpt.theta.empty() && ckpt.theta.size() != ParamCount(ckpt.spec)) {
      throw FormatError("theta has " + std::to_string(ckpt.theta.size()) +
                        " entries, layer_sizes imply " +
                        std::to_string(ParamCount(ckpt.spec)));
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void WriteCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  WriteJsonAtomic(path, CheckpointToJson(ckpt));
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  try {
    return CheckpointFromJson(ReadJson(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void WriteTextAtomic(const std::filesystem::path& path,
                     const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(tmp.string() + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out) throw FormatError(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

void WriteJsonAtomic(const std::filesystem::path& path, const json& j) {
  WriteTextAtomic(path, j.dump(2) + "\n");
}

json ReadJson(const std::filesystem::path& path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string TrajectoryCsv(EnvKind env,
                          const std::vector<TrajectoryPoint>& points) {
  std::string out = env == EnvKind::kVehicle
                        ? "t,x,y,psi,v,delta\n"
                        : "t,p,p_dot,theta,theta_dot,force\n";
  for (const TrajectoryPoint& pt : points) {
    out += std::to_string(pt.t);
    for (double z : pt.state) out += "," + FormatDouble(z);
    const double last = env == EnvKind::kVehicle ? pt.control[1] : pt.control[0];
    out += "," + FormatDouble(last) + "\n";
  }
  return out;
}

void WriteTrajectoryCsv(const std::filesystem::path& path, EnvKind env,
                        const std::vector<TrajectoryPoint>& points) {
  WriteTextAtomic(path, TrajectoryCsv(env, points));
}

TrajectoryFile ParseTrajectoryCsv(const std::string& text,
                                  const std::string& source) {
  std::istringstream in(text);
  std::string line;
  TrajectoryFile file;
  if (!std::getline(in, line)) throw FormatError(source + ": empty CSV");
  if (line == "t,x,y,psi,v,delta") {
    file.env = EnvKind::kVehicle;
  } else if (line == "t,p,p_dot,theta,theta_dot,force") {
    file.env = EnvKind::kPendulum;
  } else {
    throw FormatError(source + ":1: unrecognized trajectory header");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> cols;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') {
        throw FormatError(source + ":" + std::to_string(line_no) +
                          ": invalid number '" + cell + "'");
      }
      cols.push_back(v);
    }
    if (cols.size() != 6) {
      throw FormatError(source + ":" + std::to_string(line_no) +
                        ": expected 6 columns");
    }
    TrajectoryPoint pt;
    pt.t = static_cast<int>(cols[0]);
    pt.state = {cols[1], cols[2], cols[3], cols[4]};
    pt.control = file.env == EnvKind::kVehicle
                     ? std::array<double, 2>{cols[4], cols[5]}
                     : std::array<double, 2>{cols[5], 0.0};
    file.points.push_back(pt);
  }
  return file;
}

TrajectoryFile ReadTrajectoryCsv(const std::filesystem::path& path) {
  return ParseTrajectoryCsv(ReadFile(path), path.string());
}

}  // namespace tshc::cli
