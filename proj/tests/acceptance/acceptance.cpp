// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any selected criterion fails.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli/commands.hpp"
#include "cli/run_config.hpp"
#include "support/oracles.hpp"
#include "tshc/trainer.hpp"

#ifndef TSHC_CONFIG_DIR
#define TSHC_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace tshc;
using namespace tshc::cli;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path work;
  int workers = 1;
  std::ostringstream sink;  // training chatter
  // Filled by criterion 3 for criterion 4.
  std::optional<fs::path> grid_checkpoint;
  // Filled by criterion 2 for criterion 7.
  std::optional<fs::path> exp1_checkpoint;
  int exp1_workers = 0;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct RunOutcome {
  TrainArtifacts paths;
  int n_star = 0;
  int n_tasks = 0;
  int restarts_with_solution = 0;
  double wall_time_s = 0.0;
};

// Trains one of the shipped configs with its seed replaced.
RunOutcome TrainConfig(Context& ctx, const std::string& config, int seed,
                       int workers, const std::string& tag) {
  std::string yaml = Slurp(fs::path(TSHC_CONFIG_DIR) / config);
  yaml = std::regex_replace(yaml, std::regex("(^|\n)seed: *[0-9]+"),
                            "$1seed: " + std::to_string(seed));
  const fs::path dir = ctx.work / tag;
  fs::create_directories(dir);
  const fs::path cfg_path = dir / config;
  std::ofstream(cfg_path) << yaml;
  const RunConfig cfg = LoadRunConfig(cfg_path);

  TrainOptions opts;
  opts.config = cfg_path;
  opts.workers = workers;
  opts.output_dir = dir;
  opts.quiet = true;
  CmdTrain(opts, ctx.sink);

  RunOutcome out;
  out.paths = ArtifactPaths(dir, cfg.name, cfg.seed);
  const json summary = ReadJson(out.paths.summary);
  out.n_star = summary["N_star"];
  out.n_tasks = summary["N_tasks"];
  out.restarts_with_solution = summary["restarts_with_solution"];
  out.wall_time_s = summary["wall_time_s"];
  return out;
}

Verdict ParamCounts(Context&) {
  const auto a = ParamCount({{5, 8, 2}});
  const auto b = ParamCount({{4, 64, 64, 2}});
  return {a == 66 && b == 4610,
          "[5,8,2] -> " + std::to_string(a) + ", [4,64,64,2] -> " + std::to_string(b)};
}

Verdict Navigation(Context& ctx) {
  int solved = 0;
  std::string detail;
  for (int seed = 1; seed <= 3; ++seed) {
    // Seed 1 doubles as one half of the determinism check.
    const int workers = seed == 1 ? 8 : ctx.workers;
    const RunOutcome r =
        TrainConfig(ctx, "exp1-navigation.yaml", seed, workers, "exp1-s" + std::to_string(seed));
    const bool ok = r.n_star == 1 && r.wall_time_s <= 300.0;
    solved += ok ? 1 : 0;
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") +
              std::to_string(seed) + (r.n_star == 1 ? " solved" : " unsolved") +
              " in " + Fmt("%.1f s", r.wall_time_s);
    if (seed == 1) {
      ctx.exp1_checkpoint = r.paths.checkpoint;
      ctx.exp1_workers = workers;
    }
  }
  return {solved >= 2, std::to_string(solved) + "/3 seeds (" + detail + ")"};
}

Verdict HeadingGridRun(Context& ctx) {
  const RunOutcome r = TrainConfig(ctx, "heading-grid.yaml", 1, ctx.workers, "grid");
  ctx.grid_checkpoint = r.paths.checkpoint;
  const bool ok = r.restarts_with_solution >= 1 && r.wall_time_s <= 1800.0;
  return {ok, std::to_string(r.restarts_with_solution) +
                  " restart(s) solved all tasks, best N* = " +
                  std::to_string(r.n_star) + "/" + std::to_string(r.n_tasks) +
                  Fmt(", %.1f s", r.wall_time_s)};
}

Verdict Mirroring(Context& ctx) {
  if (!ctx.grid_checkpoint) return {false, "criterion 3 produced no checkpoint"};
  const Checkpoint ckpt = ReadCheckpoint(*ctx.grid_checkpoint);
  if (ckpt.theta.empty()) return {false, "checkpoint holds no parameters"};
  int checked = 0;
  double worst = 0.0;
  std::vector<std::string> failures;
  for (const Task& task : ckpt.tasks) {
    ReplayOptions plain;
    plain.checkpoint = *ctx.grid_checkpoint;
    plain.task_id = task.id;
    plain.output_dir = ctx.work / "mirror";
    fs::create_directories(*plain.output_dir);
    const ReplayOutcome a = RunReplay(plain, ctx.sink);
    if (!a.result.solved) continue;
    ++checked;

    ReplayOptions mirrored = plain;
    mirrored.task_id.reset();
    const Pose g = task.GoalPose();
    mirrored.setpoint = FormatDouble(g.x) + "," + FormatDouble(-g.y) + "," +
                        FormatDouble(-g.psi) + "," + FormatDouble(g.v);
    mirrored.mirror = true;
    const ReplayOutcome b = RunReplay(mirrored, ctx.sink);

    const auto pa = ReadTrajectoryCsv(a.csv).points;
    const auto pb = ReadTrajectoryCsv(b.csv).points;
    bool ok = b.result.solved && pa.size() == pb.size();
    for (std::size_t k = 0; ok && k < pa.size(); ++k) {
      const double d = std::max({std::abs(pa[k].state[0] - pb[k].state[0]),
                                 std::abs(pa[k].state[1] + pb[k].state[1]),
                                 std::abs(WrapAngle(pa[k].state[2] + pb[k].state[2])),
                                 std::abs(pa[k].state[3] - pb[k].state[3])});
      worst = std::max(worst, d);
      ok = d <= 1e-9;
    }
    if (!ok) failures.push_back(task.id);
  }
  if (checked == 0) return {false, "no solved task to mirror"};
  std::string detail = std::to_string(checked) + " solved task(s) mirrored, max deviation " +
                       Fmt("%.3g", worst);
  for (const auto& f : failures) detail += ", mismatch on " + f;
  return {failures.empty(), detail};
}

Verdict Pendulum(Context& ctx) {
  std::string detail;
  for (int seed = 1; seed <= 5; ++seed) {
    const RunOutcome r = TrainConfig(ctx, "pendulum-swingup.yaml", seed, ctx.workers,
                                     "pendulum-s" + std::to_string(seed));
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) +
              ": " + std::to_string(r.restarts_with_solution) + "/3 restarts" +
              Fmt(" in %.1f s", r.wall_time_s);
    if (r.restarts_with_solution >= 1 && r.wall_time_s <= 2700.0) {
      return {true, detail};
    }
  }
  return {false, detail};
}

Verdict Properties(Context&) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::string> broken;

  const ActuatorLimits lim;
  for (int i = 0; i < 100000; ++i) {
    const Control prev{lim.v_max * u(rng), lim.delta_max * u(rng)};
    const Control raw{30.0 * u(rng), 30.0 * u(rng)};
    const double ts = 0.001 + 0.3 * std::abs(u(rng));
    const Control a = ClampControls(raw, prev, lim, ts);
    const Control b = ClampControls(a, prev, lim, ts);
    if (a.v != b.v || a.delta != b.delta) {
      broken.push_back("clamp idempotence");
      break;
    }
  }

  VvcConfig vvc;
  vvc.mode = VvcMode::kSpatial;
  vvc.r_thresh = 5.0;
  bool vvc_ok = true;
  for (int i = 0; i < 10000 && vvc_ok; ++i) {
    const double v_goal = 9.0 * u(rng);
    const Interval at_zero = VvcBounds(0.0, v_goal, -10.0, 10.0, vvc);
    const Interval outside = VvcBounds(5.0 + std::abs(u(rng)), v_goal, -10.0, 10.0, vvc);
    const Interval below = VvcBounds(std::nextafter(5.0, 0.0), v_goal, -10.0, 10.0, vvc);
    vvc_ok = at_zero.lo == v_goal && at_zero.hi == v_goal && outside.lo == -10.0 &&
             outside.hi == 10.0 && std::abs(below.lo + 10.0) <= 1e-12 &&
             std::abs(below.hi - 10.0) <= 1e-12;
  }
  if (!vvc_ok) broken.push_back("VVC branches");

  const MlpSpec spec{{5, 8, 2}};
  MlpPolicy policy(spec);
  EnvConfig env;
  RolloutOptions opt;
  opt.t_max = 300;
  bool sparse_ok = true;
  Rng prng(4);
  for (int i = 0; i < 200 && sparse_ok; ++i) {
    const ParamVector theta = Perturb(ParamVector(66, 0.0), 5.0, prng);
    const RolloutResult r =
        Rollout(theta, policy, tshc::HeadingGrid(10.0, 90.0)[static_cast<std::size_t>(i % 10)],
                env, opt);
    if (!r.crashed) sparse_ok = r.reward == Reward(-static_cast<double>(r.steps));
  }
  if (!sparse_ok) broken.push_back("sparse J = -T");

  for (int trial = 0; trial < 1000; ++trial) {
    const auto [s, cur, n_tasks] = oracle::RandomScores(rng, trial);
    const Selection a = SelectBest(s, cur, n_tasks);
    const Selection b = oracle::BruteSelect(s, cur, n_tasks);
    if (a.i_star != b.i_star || a.replaced != b.replaced ||
        !oracle::SameBest(a.best, b.best)) {
      broken.push_back("select_best equivalence");
      break;
    }
  }

  bool adapt_ok = AdaptSigma(10.0, 5, 3, 2.0, 0.01, 100.0) == 5.0 &&
                  AdaptSigma(10.0, 3, 5, 2.0, 0.01, 16.0) == 16.0;
  for (int i = 0; i < 10000 && adapt_ok; ++i) {
    const double sigma = 0.01 + 19.99 * std::abs(u(rng));
    const int a = static_cast<int>(rng() % 6), b = static_cast<int>(rng() % 6);
    const double out = AdaptSigma(sigma, a, b, 2.0, 0.01, 20.0);
    adapt_ok = out >= 0.01 && out <= 20.0 && (a <= b || out <= sigma) &&
               (a >= b || out >= sigma);
  }
  if (!adapt_ok) broken.push_back("adapt_sigma");

  TshcConfig cfg;
  cfg.n_restarts = 2;
  cfg.n_iter_max = 10;
  cfg.n = 20;
  cfg.t_max = 100;
  cfg.sigma_min = 0.05;
  cfg.sigma_max = 4.0;
  cfg.seed = 5;
  bool sigma_ok = true;
  TrainCallbacks cb;
  cb.on_sigma = [&](double s) { sigma_ok = sigma_ok && s >= cfg.sigma_min && s <= cfg.sigma_max; };
  for (SigmaMode mode : {SigmaMode::kAdaptive, SigmaMode::kRandomPerIter,
                         SigmaMode::kRandomPerRestart, SigmaMode::kConstant}) {
    cfg.sigma_mode = mode;
    TshcRun(cfg, tshc::HeadingGrid(30.0, 90.0), env, spec, cb);
  }
  if (!sigma_ok) broken.push_back("sigma range during training");

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 60.0) broken.push_back("time budget");
  std::string detail = Fmt("6 suites in %.2f s", secs);
  for (const auto& b : broken) detail += ", failed: " + b;
  return {broken.empty(), detail};
}

Verdict Determinism(Context& ctx) {
  if (!ctx.exp1_checkpoint) {
    ctx.exp1_workers = 8;
    ctx.exp1_checkpoint = TrainConfig(ctx, "exp1-navigation.yaml", 1, 8, "exp1-s1").paths.checkpoint;
  }
  const int other = ctx.exp1_workers == 1 ? 8 : 1;
  const RunOutcome r = TrainConfig(ctx, "exp1-navigation.yaml", 1, other, "exp1-s1-w" + std::to_string(other));
  const std::string a = Slurp(*ctx.exp1_checkpoint);
  const std::string b = Slurp(r.paths.checkpoint);
  return {!a.empty() && a == b,
          "workers " + std::to_string(ctx.exp1_workers) + " vs " + std::to_string(other) +
              (a == b ? ": identical checkpoints" : ": checkpoints differ")};
}

Verdict DynamicsOracles(Context&) {
  double worst = 0.0;
  auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };

  VehicleParams p;
  p.ts = 0.01;
  VehicleState n = StepBicycle({}, {1.0, 0.0}, p);
  track(n.x, 0.01);
  track(n.y, 0.0);
  track(n.psi, 0.0);
  n = StepBicycle({}, {3.5, kPi / 4.0}, p);
  track(n.psi, 0.01);
  const VehicleState rest{1.5, -2.0, 0.7, 0.0, 0.0, 0};
  n = StepBicycle(rest, {0.0, 0.3}, p);
  track(n.x, rest.x);
  track(n.y, rest.y);
  track(n.psi, rest.psi);

  const PendulumParams c;
  const PendulumState up{};
  PendulumState s = StepPendulum(up, 0.0, c);
  track(s.p_dot, 0.0);
  track(s.theta_dot, 0.0);
  PendulumState down;
  down.theta = kPi;
  s = StepPendulum(down, 0.0, c);
  track(s.theta, kPi);
  track(s.theta_dot, 0.0);
  const oracle::Accel a = oracle::LagrangeAccel(up, 10.0, c);
  s = StepPendulum(up, 10.0, c);
  track(s.p_dot, c.ts * a.p_dd);
  track(s.theta_dot, c.ts * a.theta_dd);
  return {worst <= 1e-12, Fmt("max deviation %.3g", worst)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string work = (fs::temp_directory_path() / "tshc-acceptance").string();
  const unsigned hw = std::thread::hardware_concurrency();
  int workers = hw == 0 ? 1 : static_cast<int>(hw);
  app.add_option("--only", only, "criteria to run, e.g. 1,6,8 (default: all)")
      ->delimiter(',')
      ->check(CLI::Range(1, 8));
  app.add_option("--work-dir", work, "scratch directory for run artifacts");
  app.add_option("-w,--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.work = work;
  ctx.workers = workers;
  fs::remove_all(ctx.work);
  fs::create_directories(ctx.work);

  const std::vector<std::pair<std::string, std::function<Verdict(Context&)>>> criteria{
      {"parameter counts", ParamCounts},
      {"navigation task", Navigation},
      {"heading grid", HeadingGridRun},
      {"mirroring", Mirroring},
      {"pendulum swing-up", Pendulum},
      {"property suites", Properties},
      {"determinism", Determinism},
      {"dynamics oracles", DynamicsOracles},
  };
  const std::set<int> selected(only.begin(), only.end());
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    all = all && v.pass;
    std::cout << "criterion " << id << " (" << criteria[i].first
              << "): " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
  }
  return all ? 0 : 1;
}
