#include "tshc/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

namespace tshc {

const char* ToString(SigmaMode mode) {
  switch (mode) {
    case SigmaMode::kConstant:
      return "constant";
    case SigmaMode::kRandomPerRestart:
      return "random-per-restart";
    case SigmaMode::kRandomPerIter:
      return "random-per-iter";
    case SigmaMode::kAdaptive:
      return "adaptive";
  }
  return "?";
}

SigmaMode ParseSigmaMode(const std::string& name) {
  if (name == "constant") return SigmaMode::kConstant;
  if (name == "random-per-restart") return SigmaMode::kRandomPerRestart;
  if (name == "random-per-iter") return SigmaMode::kRandomPerIter;
  if (name == "adaptive") return SigmaMode::kAdaptive;
  throw std::invalid_argument(
      "unknown sigma mode '" + name +
      "' (expected constant, random-per-restart, random-per-iter, adaptive)");
}

void TshcConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(n_restarts >= 1, "n_restarts must be >= 1");
  require(n_iter_max >= 1, "n_iter_max must be >= 1");
  require(n >= 1, "n must be >= 1");
  require(t_max >= 1, "t_max must be >= 1");
  require(t_goal >= 1, "t_goal must be >= 1");
  require(beta > 1.0, "beta must be > 1");
  require(sigma_min >= 0.0, "sigma_min must be >= 0");
  require(sigma_max >= 0.0, "sigma_max must be >= 0");
  require(sigma_min <= sigma_max, "sigma_min must not exceed sigma_max");
  require(workers >= 1, "workers must be >= 1");
  require(init_stddev >= 0.0, "init_stddev must be >= 0");
}

bool RewardLess(const CandidateScore& a, const CandidateScore& b) {
  if (a.J.crashed() && b.J.crashed()) {
    if (a.n_solved != b.n_solved) return a.n_solved < b.n_solved;
    return a.P < b.P;
  }
  return a.J < b.J;
}

Selection SelectBest(std::span<const CandidateScore> scores,
                     const BestScore& current, int n_tasks) {
  if (scores.empty()) throw std::invalid_argument("no candidate scores");
  Selection sel;
  sel.best = current;

  std::optional<std::size_t> full;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].n_solved != n_tasks) continue;
    if (!full || scores[i].P > scores[*full].P) full = i;
  }

  if (full) {
    sel.i_star = *full;
    const CandidateScore& s = scores[sel.i_star];
    if (!current.p_star || s.P > *current.p_star) {
      sel.best = {n_tasks, s.P, s.J, s.P};
      sel.replaced = true;
    }
  } else {
    std::size_t i_star = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      if (RewardLess(scores[i_star], scores[i])) i_star = i;
    }
    sel.i_star = i_star;
    const CandidateScore& s = scores[i_star];
    const bool beats_recorded =
        !current.j_star ||
        RewardLess({current.n_star, current.p_at_j, *current.j_star}, s);
    if (beats_recorded && !current.p_star) {
      sel.best = {s.n_solved, std::nullopt, s.J, s.P};
      sel.replaced = true;
    }
  }
  sel.n_tasks_star = scores[sel.i_star].n_solved;
  return sel;
}

double AdaptSigma(double sigma, int n_new, int n_old, double beta,
                  double sigma_min, double sigma_max) {
  if (n_new > n_old) sigma = std::max(sigma / beta, sigma_min);
  if (n_new < n_old) sigma = std::min(beta * sigma, sigma_max);
  return std::clamp(sigma, sigma_min, sigma_max);
}

double DrawSigma(SigmaMode mode, Rng& rng, double sigma_min, double sigma_max) {
  if (mode == SigmaMode::kConstant || mode == SigmaMode::kAdaptive) {
    return sigma_max;
  }
  std::uniform_real_distribution<double> uniform(sigma_min, sigma_max);
  return std::clamp(uniform(rng), sigma_min, sigma_max);
}

namespace {

std::uint64_t Mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SecondsSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

std::uint64_t SubSeed(std::uint64_t seed, Stream stream, std::uint64_t restart,
                      std::uint64_t iter, std::uint64_t candidate) {
  std::uint64_t h = Mix(seed);
  h = Mix(h ^ static_cast<std::uint64_t>(stream));
  h = Mix(h ^ restart);
  h = Mix(h ^ iter);
  return Mix(h ^ candidate);
}

CandidateScore EvaluateCandidate(std::span<const double> theta,
                                 MlpPolicy& policy,
                                 std::span<const Task> tasks,
                                 const EnvConfig& env, const TshcConfig& cfg) {
  RolloutOptions options;
  options.t_max = cfg.t_max;
  options.t_goal = cfg.t_goal;
  CandidateScore score;
  for (const Task& task : tasks) {
    const RolloutResult r = Rollout(theta, policy, task, env, options);
    score.n_solved += r.solved ? 1 : 0;
    score.P += r.pathlength;
    score.J += r.reward;
  }
  return score;
}

void ParallelFor(int count, int workers,
                 const std::function<void(int index, int worker)>& fn) {
  const int n_threads = std::max(1, std::min(workers, count));
  if (n_threads == 1) {
    for (int i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&](int worker) {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i, worker);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(n_threads));
  for (int w = 0; w < n_threads; ++w) threads.emplace_back(work, w);
  for (auto& thread : threads) thread.join();
  if (error) std::rethrow_exception(error);
}

TrainResult TshcRun(const TshcConfig& cfg, std::span<const Task> tasks,
                    const EnvConfig& env, const MlpSpec& spec,
                    const TrainCallbacks& callbacks) {
  cfg.Validate();
  if (tasks.empty()) throw ConfigError("at least one training task is required");
  if (!spec.Valid()) throw ConfigError("invalid network layer sizes");
  for (const Task& task : tasks) {
    if (!task.Valid()) throw ConfigError("task '" + task.id + "' is invalid");
    if (spec.InputDim() != FeatureDim(task.recipe) ||
        spec.OutputDim() != ControlDim(task.env)) {
      throw ShapeError("network shape does not fit task '" + task.id + "'");
    }
  }

  const auto start = std::chrono::steady_clock::now();
  const int n_tasks = static_cast<int>(tasks.size());
  std::vector<MlpPolicy> policies(static_cast<std::size_t>(cfg.workers),
                                  MlpPolicy(spec));
  std::vector<CandidateScore> scores(static_cast<std::size_t>(cfg.n));

  TrainResult result;
  auto notify_sigma = [&](double sigma) {
    if (callbacks.on_sigma) callbacks.on_sigma(sigma);
  };

  for (int restart = 1; restart <= cfg.n_restarts; ++restart) {
    const auto r = static_cast<std::uint64_t>(restart);
    Rng init_rng(SubSeed(cfg.seed, Stream::kInit, r));
    ParamVector theta = InitParams(spec, init_rng, cfg.init_stddev);
    Rng sigma_rng(SubSeed(cfg.seed, Stream::kSigma, r));
    double sigma =
        DrawSigma(cfg.sigma_mode, sigma_rng, cfg.sigma_min, cfg.sigma_max);
    int n_old = 0;

    RestartSummary summary;
    summary.restart = restart;
    for (int iter = 1; iter <= cfg.n_iter_max; ++iter) {
      const auto it = static_cast<std::uint64_t>(iter);
      if (cfg.sigma_mode == SigmaMode::kRandomPerIter) {
        Rng iter_rng(SubSeed(cfg.seed, Stream::kSigma, r, it));
        sigma = DrawSigma(cfg.sigma_mode, iter_rng, cfg.sigma_min,
                          cfg.sigma_max);
      }
      notify_sigma(sigma);

      ParallelFor(cfg.n, cfg.workers, [&](int i, int worker) {
        Rng rng(SubSeed(cfg.seed, Stream::kPerturb, r, it,
                        static_cast<std::uint64_t>(i)));
        const ParamVector candidate = Perturb(theta, sigma, rng);
        scores[static_cast<std::size_t>(i)] = EvaluateCandidate(
            candidate, policies[static_cast<std::size_t>(worker)], tasks, env,
            cfg);
      });
      result.rollouts += static_cast<long long>(cfg.n) * n_tasks;

      const Selection sel = SelectBest(scores, result.best.score, n_tasks);
      Rng winner_rng(SubSeed(cfg.seed, Stream::kPerturb, r, it, sel.i_star));
      ParamVector winner = Perturb(theta, sigma, winner_rng);
      result.best.score = sel.best;
      if (sel.replaced) {
        result.best.theta = winner;
        if (callbacks.on_improvement) callbacks.on_improvement(result.best);
      }

      if (cfg.sigma_mode == SigmaMode::kAdaptive) {
        sigma = AdaptSigma(sigma, sel.n_tasks_star, n_old, cfg.beta,
                           cfg.sigma_min, cfg.sigma_max);
        notify_sigma(sigma);
      }
      theta = std::move(winner);
      n_old = sel.n_tasks_star;

      const CandidateScore& chosen = scores[sel.i_star];
      summary.iterations = iter;
      summary.n_tasks_star = sel.n_tasks_star;
      if (callbacks.on_iteration) {
        IterationRecord rec;
        rec.restart = restart;
        rec.iter = iter;
        rec.sigma = sigma;
        rec.n_tasks_star = sel.n_tasks_star;
        rec.P = chosen.P;
        rec.J = chosen.J;
        rec.best = result.best.score;
        rec.wall_time_s = SecondsSince(start);
        callbacks.on_iteration(rec);
      }
      if (!cfg.refine && sel.n_tasks_star == n_tasks) break;
    }
    summary.solved_all = summary.n_tasks_star == n_tasks;
    result.restarts.push_back(summary);
  }
  result.wall_time_s = SecondsSince(start);
  return result;
}

std::vector<GoalTuple> CollectGoalTuples(std::span<const double> theta,
                                         const MlpSpec& spec,
                                         std::span<const Task> tasks,
                                         const EnvConfig& env,
                                         const TshcConfig& cfg) {
  std::vector<GoalTuple> tuples;
  if (theta.empty()) return tuples;
  MlpPolicy policy(spec);
  RolloutOptions options;
  options.t_max = cfg.t_max;
  options.t_goal = cfg.t_goal;
  for (const Task& task : tasks) {
    if (task.env != EnvKind::kVehicle) continue;
    const RolloutResult r = Rollout(theta, policy, task, env, options);
    if (!r.solved) continue;
    const StateVec& z = r.final_state;
    tuples.push_back({{z[0], z[1], z[2], z[3]}, task.GoalPose()});
  }
  return tuples;
}

}  // namespace tshc
