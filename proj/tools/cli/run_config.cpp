#include "cli/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cli/serialization.hpp"

namespace tshc::cli {
namespace {

struct UnitFactor {
  Dimension dim;
  double factor;
};

const std::map<std::string, UnitFactor>& UnitTable() {
  static const std::map<std::string, UnitFactor> table = {
      {"m", {Dimension::kLength, 1.0}},
      {"km", {Dimension::kLength, 1000.0}},
      {"cm", {Dimension::kLength, 0.01}},
      {"m/s", {Dimension::kSpeed, 1.0}},
      {"km/h", {Dimension::kSpeed, 1.0 / 3.6}},
      {"m/s^2", {Dimension::kAcceleration, 1.0}},
      {"m/s2", {Dimension::kAcceleration, 1.0}},
      {"rad", {Dimension::kAngle, 1.0}},
      {"deg", {Dimension::kAngle, kPi / 180.0}},
      {"rad/s", {Dimension::kAngularRate, 1.0}},
      {"deg/s", {Dimension::kAngularRate, kPi / 180.0}},
      {"s", {Dimension::kTime, 1.0}},
      {"ms", {Dimension::kTime, 1e-3}},
      {"kg", {Dimension::kMass, 1.0}},
      {"g", {Dimension::kMass, 1e-3}},
      {"N", {Dimension::kForce, 1.0}},
  };
  return table;
}

std::string Trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Positioned access to one YAML mapping.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) Fail(node_, "'" + path_ + "' must be a mapping");
  }

  [[noreturn]] void Fail(const YAML::Node& at, const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    const YAML::Mark mark = at.Mark();
    if (mark.line >= 0) os << ':' << mark.line + 1 << ':' << mark.column + 1;
    os << ": " << msg;
    throw ConfigParseError(os.str());
  }

  void AllowOnly(const std::set<std::string>& keys) const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!keys.contains(key)) {
        Fail(kv.first, "unknown key '" + key + "' in '" + path_ + "'");
      }
    }
  }

  bool Has(const std::string& key) const { return node_[key].IsDefined(); }
  YAML::Node Raw(const std::string& key) const { return node_[key]; }
  std::string Where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  Section Sub(const std::string& key) const {
    return Section(node_[key], Where(key), source_);
  }

  template <typename T>
  T Scalar(const std::string& key) const {
    const YAML::Node v = node_[key];
    if (!v.IsScalar()) Fail(v, "'" + Where(key) + "' must be a scalar");
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      Fail(v, "'" + Where(key) + "' has an invalid value '" +
                  v.as<std::string>() + "'");
    }
  }

  template <typename T>
  void Read(const std::string& key, T& out) const {
    if (Has(key)) out = Scalar<T>(key);
  }

  double QuantityOf(const YAML::Node& v, const std::string& what,
                    Dimension dim) const {
    if (!v.IsScalar()) Fail(v, "'" + what + "' must be a scalar quantity");
    try {
      return ParseQuantity(v.as<std::string>(), dim);
    } catch (const std::invalid_argument& e) {
      Fail(v, "'" + what + "': " + e.what());
    }
  }

  void ReadQuantity(const std::string& key, Dimension dim, double& out) const {
    if (Has(key)) out = QuantityOf(node_[key], Where(key), dim);
  }

  std::vector<double> QuantityList(const std::string& key, Dimension dim,
                                   std::size_t expected) const {
    const YAML::Node v = node_[key];
    if (!v.IsSequence() || (expected != 0 && v.size() != expected)) {
      Fail(v, "'" + Where(key) + "' must be a list of " +
                  std::to_string(expected) + " values");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(QuantityOf(v[i], Where(key), dim));
    }
    return out;
  }

  void ReadRange(const std::string& key, Dimension dim, double& lo,
                 double& hi) const {
    if (!Has(key)) return;
    const auto r = QuantityList(key, dim, 2);
    if (!(r[0] < r[1])) Fail(node_[key], "'" + Where(key) + "' needs min < max");
    lo = r[0];
    hi = r[1];
  }

  template <typename Parse>
  auto Enum(const std::string& key, Parse parse) const {
    const YAML::Node v = node_[key];
    try {
      return parse(Scalar<std::string>(key));
    } catch (const std::invalid_argument& e) {
      Fail(v, "'" + Where(key) + "': " + e.what());
    }
  }

  const YAML::Node& node() const { return node_; }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& source_;
};

Rect ParseRect(const Section& s, const YAML::Node& node,
               const std::string& what) {
  if (!node.IsSequence() || node.size() != 4) {
    s.Fail(node, "'" + what + "' must be [x_min, y_min, x_max, y_max]");
  }
  Rect r{s.QuantityOf(node[0], what, Dimension::kLength),
         s.QuantityOf(node[1], what, Dimension::kLength),
         s.QuantityOf(node[2], what, Dimension::kLength),
         s.QuantityOf(node[3], what, Dimension::kLength)};
  if (!(r.x_min < r.x_max && r.y_min < r.y_max)) {
    s.Fail(node, "'" + what + "' is degenerate");
  }
  return r;
}

void ParseTrainer(const Section& s, TshcConfig& t) {
  s.AllowOnly({"n_restarts", "n_iter_max", "n", "t_max", "t_goal", "beta",
               "sigma_mode", "sigma_min", "sigma_max", "refine",
               "init_stddev"});
  s.Read("n_restarts", t.n_restarts);
  s.Read("n_iter_max", t.n_iter_max);
  s.Read("n", t.n);
  s.Read("t_max", t.t_max);
  s.Read("t_goal", t.t_goal);
  s.Read("beta", t.beta);
  if (s.Has("sigma_mode")) t.sigma_mode = s.Enum("sigma_mode", ParseSigmaMode);
  s.Read("sigma_min", t.sigma_min);
  s.Read("sigma_max", t.sigma_max);
  s.Read("refine", t.refine);
  s.Read("init_stddev", t.init_stddev);

  auto check = [&](bool ok, const char* key, const char* msg) {
    if (!ok) s.Fail(s.Has(key) ? s.Raw(key) : s.node(), s.Where(key) + " " + msg);
  };
  check(t.n_restarts >= 1, "n_restarts", "must be >= 1");
  check(t.n_iter_max >= 1, "n_iter_max", "must be >= 1");
  check(t.n >= 1, "n", "must be >= 1");
  check(t.t_max >= 1, "t_max", "must be >= 1");
  check(t.t_goal >= 1, "t_goal", "must be >= 1");
  check(t.beta > 1.0, "beta", "must be > 1");
  check(t.sigma_min >= 0.0, "sigma_min", "must be >= 0");
  check(t.sigma_max >= 0.0, "sigma_max", "must be >= 0");
  check(t.sigma_min <= t.sigma_max, "sigma_min", "must not exceed sigma_max");
  check(t.init_stddev >= 0.0, "init_stddev", "must be >= 0");
}

void ParseTolerances(const Section& s, Tolerances& tol) {
  s.AllowOnly({"eps_d", "eps_psi", "eps_v"});
  s.ReadQuantity("eps_d", Dimension::kLength, tol.eps_d);
  s.ReadQuantity("eps_psi", Dimension::kAngle, tol.eps_psi);
  s.ReadQuantity("eps_v", Dimension::kSpeed, tol.eps_v);
  if (!tol.Valid()) s.Fail(s.node(), "tolerances must be strictly positive");
}

void ParseTasks(const Section& s, TaskSpec& t) {
  s.AllowOnly({"generator", "goal", "step", "max", "kind", "file",
               "tolerances", "t_max"});
  if (!s.Has("generator")) s.Fail(s.node(), "'tasks.generator' is required");
  const auto gen = s.Scalar<std::string>("generator");
  if (gen == "navigation") {
    t.generator = TaskGenerator::kNavigation;
  } else if (gen == "heading-grid") {
    t.generator = TaskGenerator::kHeadingGrid;
  } else if (gen == "pendulum") {
    t.generator = TaskGenerator::kPendulum;
  } else if (gen == "file") {
    t.generator = TaskGenerator::kFile;
  } else {
    s.Fail(s.Raw("generator"),
           "unknown task generator '" + gen +
               "' (expected navigation, heading-grid, pendulum, file)");
  }

  if (s.Has("goal")) {
    const YAML::Node g = s.Raw("goal");
    if (!g.IsSequence() || g.size() != 4) {
      s.Fail(g, "'tasks.goal' must be [x, y, psi, v]");
    }
    t.goal = {s.QuantityOf(g[0], "tasks.goal", Dimension::kLength),
              s.QuantityOf(g[1], "tasks.goal", Dimension::kLength),
              s.QuantityOf(g[2], "tasks.goal", Dimension::kAngle),
              s.QuantityOf(g[3], "tasks.goal", Dimension::kSpeed)};
  }
  double step = DegToRad(t.step_deg);
  double max = DegToRad(t.max_deg);
  s.ReadQuantity("step", Dimension::kAngle, step);
  s.ReadQuantity("max", Dimension::kAngle, max);
  t.step_deg = RadToDeg(step);
  t.max_deg = RadToDeg(max);
  if (t.generator == TaskGenerator::kHeadingGrid &&
      !(t.step_deg > 0.0 && t.step_deg <= t.max_deg + 1e-9 &&
        t.max_deg <= 180.0 + 1e-9)) {
    s.Fail(s.node(), "heading grid needs 0 < step <= max <= 180 deg");
  }
  if (s.Has("kind")) t.pendulum_kind = s.Enum("kind", ParsePendulumTaskKind);
  if (s.Has("file")) t.file = s.Scalar<std::string>("file");
  if (t.generator == TaskGenerator::kFile && t.file.empty()) {
    s.Fail(s.node(), "'tasks.file' is required for the file generator");
  }
  if (t.generator == TaskGenerator::kPendulum) {
    t.tolerances.eps_psi = kPendulumUprightTolerance;
  }
  if (s.Has("tolerances")) ParseTolerances(s.Sub("tolerances"), t.tolerances);
  if (s.Has("t_max")) {
    t.t_max = s.Scalar<int>("t_max");
    if (*t.t_max < 1) s.Fail(s.Raw("t_max"), "'tasks.t_max' must be >= 1");
  }
}

void ParseVehicle(const Section& s, VehicleParams& v) {
  s.AllowOnly({"wheelbase", "ts", "workspace", "obstacles"});
  s.ReadQuantity("wheelbase", Dimension::kLength, v.wheelbase);
  s.ReadQuantity("ts", Dimension::kTime, v.ts);
  if (s.Has("workspace")) {
    v.workspace = ParseRect(s, s.Raw("workspace"), s.Where("workspace"));
  }
  if (s.Has("obstacles")) {
    const YAML::Node obs = s.Raw("obstacles");
    if (!obs.IsSequence()) s.Fail(obs, "'vehicle.obstacles' must be a list");
    v.obstacles.clear();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      v.obstacles.push_back(ParseRect(s, obs[i], "vehicle.obstacles"));
    }
  }
  if (!(v.wheelbase > 0.0)) s.Fail(s.node(), "vehicle.wheelbase must be > 0");
  if (!(v.ts > 0.0)) s.Fail(s.node(), "vehicle.ts must be > 0");
}

void ParseLimits(const Section& s, ActuatorLimits& l) {
  s.AllowOnly({"v", "vdot", "delta", "deltadot"});
  s.ReadRange("v", Dimension::kSpeed, l.v_min, l.v_max);
  s.ReadRange("vdot", Dimension::kAcceleration, l.vdot_min, l.vdot_max);
  s.ReadRange("delta", Dimension::kAngle, l.delta_min, l.delta_max);
  s.ReadRange("deltadot", Dimension::kAngularRate, l.deltadot_min,
              l.deltadot_max);
  if (std::max(std::abs(l.delta_min), std::abs(l.delta_max)) >= kPi / 2.0) {
    s.Fail(s.node(), "limits.delta must stay inside (-90 deg, 90 deg)");
  }
}

void ParseVvc(const Section& s, VvcConfig& v) {
  s.AllowOnly({"mode", "r_thresh", "margin"});
  if (s.Has("mode")) v.mode = s.Enum("mode", ParseVvcMode);
  s.ReadQuantity("r_thresh", Dimension::kLength, v.r_thresh);
  s.ReadQuantity("margin", Dimension::kSpeed, v.margin);
  if (!v.Valid()) s.Fail(s.node(), "vvc needs r_thresh > 0 and margin >= 0");
}

void ParsePendulum(const Section& s, PendulumParams& p) {
  s.AllowOnly({"cart_mass", "pole_mass", "half_length", "gravity",
               "force_max", "ts", "track_limit"});
  s.ReadQuantity("cart_mass", Dimension::kMass, p.cart_mass);
  s.ReadQuantity("pole_mass", Dimension::kMass, p.pole_mass);
  s.ReadQuantity("half_length", Dimension::kLength, p.half_length);
  s.ReadQuantity("gravity", Dimension::kAcceleration, p.gravity);
  s.ReadQuantity("force_max", Dimension::kForce, p.force_max);
  s.ReadQuantity("ts", Dimension::kTime, p.ts);
  s.ReadQuantity("track_limit", Dimension::kLength, p.track_limit);
  if (!p.Valid()) s.Fail(s.node(), "pendulum parameters must be positive");
}

void ParseNormalization(const Section& s, Normalization& n) {
  s.AllowOnly({"dx", "dy", "dpsi", "dv", "pendulum"});
  s.ReadQuantity("dx", Dimension::kLength, n.dx);
  s.ReadQuantity("dy", Dimension::kLength, n.dy);
  s.ReadQuantity("dpsi", Dimension::kAngle, n.dpsi);
  s.ReadQuantity("dv", Dimension::kSpeed, n.dv);
  if (s.Has("pendulum")) {
    const YAML::Node v = s.Raw("pendulum");
    if (!v.IsSequence() || v.size() != 4) {
      s.Fail(v, "'normalization.pendulum' must list 4 constants");
    }
    const Dimension dims[4] = {Dimension::kLength, Dimension::kSpeed,
                               Dimension::kAngle, Dimension::kAngularRate};
    for (std::size_t i = 0; i < 4; ++i) {
      n.pendulum[i] = s.QuantityOf(v[i], "normalization.pendulum", dims[i]);
    }
  }
  const bool ok = n.dx > 0 && n.dy > 0 && n.dpsi > 0 && n.dv > 0 &&
                  n.pendulum[0] > 0 && n.pendulum[1] > 0 && n.pendulum[2] > 0 &&
                  n.pendulum[3] > 0;
  if (!ok) s.Fail(s.node(), "normalization constants must be > 0");
}

void ParseReward(const Section& s, EnvConfig& env) {
  s.AllowOnly({"mode", "rich_weights"});
  if (s.Has("mode")) env.reward = s.Enum("mode", ParseRewardMode);
  if (s.Has("rich_weights")) {
    const auto w = s.QuantityList("rich_weights", Dimension::kNone, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      if (w[i] < 0.0) s.Fail(s.Raw("rich_weights"), "rich weights must be >= 0");
      env.rich_weights[i] = w[i];
    }
  }
}

void ParseLookup(const Section& s, LookupWeights& w) {
  s.AllowOnly({"w_d", "w_psi_per_deg", "w_v"});
  s.Read("w_d", w.w_d);
  s.Read("w_psi_per_deg", w.w_psi_per_deg);
  s.Read("w_v", w.w_v);
}

}  // namespace

double ParseQuantity(const std::string& text, Dimension dim) {
  const std::string s = Trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + text + "'");
  }
  const std::string unit = Trim(s.substr(used));
  if (unit.empty()) return value;
  const auto& table = UnitTable();
  const auto it = table.find(unit);
  if (it == table.end()) {
    throw std::invalid_argument("unknown unit '" + unit + "'");
  }
  if (it->second.dim != dim) {
    throw std::invalid_argument("unit '" + unit +
                                "' does not fit this quantity");
  }
  return value * it->second.factor;
}

RunConfig ParseRunConfig(const std::string& yaml_text,
                         const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << source_name << ':' << e.mark.line + 1 << ':' << e.mark.column + 1
       << ": " << e.msg;
    throw ConfigParseError(os.str());
  }
  if (!root.IsMap()) {
    throw ConfigParseError(source_name + ": top level must be a mapping");
  }
  const Section top(root, "", source_name);
  top.AllowOnly({"name", "seed", "output_dir", "policy", "trainer", "tasks",
                 "vehicle", "limits", "vvc", "pendulum", "normalization",
                 "reward", "lookup"});

  RunConfig cfg;
  top.Read("name", cfg.name);
  if (!top.Has("seed")) {
    top.Fail(root, "'seed' is required (runs are never seeded from the clock)");
  }
  cfg.seed = top.Scalar<std::uint64_t>("seed");
  if (top.Has("output_dir")) {
    cfg.output_dir = top.Scalar<std::string>("output_dir");
  }

  if (top.Has("policy")) {
    const Section p = top.Sub("policy");
    p.AllowOnly({"layers"});
    if (p.Has("layers")) {
      const YAML::Node layers = p.Raw("layers");
      if (!layers.IsSequence()) p.Fail(layers, "'policy.layers' must be a list");
      cfg.policy.layer_sizes.clear();
      for (std::size_t i = 0; i < layers.size(); ++i) {
        cfg.policy.layer_sizes.push_back(layers[i].as<int>());
      }
      if (!cfg.policy.Valid()) {
        p.Fail(layers, "'policy.layers' needs >= 2 positive sizes");
      }
    }
  }
  if (top.Has("trainer")) ParseTrainer(top.Sub("trainer"), cfg.trainer);
  if (!top.Has("tasks")) top.Fail(root, "'tasks' section is required");
  ParseTasks(top.Sub("tasks"), cfg.tasks);
  if (top.Has("vehicle")) ParseVehicle(top.Sub("vehicle"), cfg.env.vehicle);
  if (top.Has("limits")) ParseLimits(top.Sub("limits"), cfg.env.limits);
  if (top.Has("vvc")) ParseVvc(top.Sub("vvc"), cfg.env.vvc);
  if (top.Has("pendulum")) ParsePendulum(top.Sub("pendulum"), cfg.env.pendulum);
  if (top.Has("normalization")) {
    ParseNormalization(top.Sub("normalization"), cfg.env.norm);
  }
  if (top.Has("reward")) ParseReward(top.Sub("reward"), cfg.env);
  if (top.Has("lookup")) ParseLookup(top.Sub("lookup"), cfg.lookup);
  cfg.trainer.seed = cfg.seed;
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError(path.string() + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseRunConfig(buffer.str(), path.string());
}

std::vector<Task> BuildTasks(const TaskSpec& spec,
                             const std::filesystem::path& base_dir) {
  std::vector<Task> tasks;
  switch (spec.generator) {
    case TaskGenerator::kNavigation:
      tasks.push_back(NavigationTask(spec.goal, spec.tolerances));
      break;
    case TaskGenerator::kHeadingGrid:
      tasks = HeadingGrid(spec.step_deg, std::min(spec.max_deg, 180.0),
                          spec.tolerances);
      break;
    case TaskGenerator::kPendulum:
      tasks = PendulumTasks(spec.pendulum_kind);
      for (Task& t : tasks) t.tolerances = spec.tolerances;
      break;
    case TaskGenerator::kFile: {
      const auto path =
          spec.file.is_absolute() ? spec.file : base_dir / spec.file;
      return ReadTaskList(path);
    }
  }
  if (spec.t_max) {
    for (Task& t : tasks) t.t_max = spec.t_max;
  }
  return tasks;
}

}  // namespace tshc::cli
