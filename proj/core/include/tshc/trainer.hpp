#pragma once

// Task separation with hill climbing: restart loop, Gaussian fan-out of n
// perturbed parameter vectors, evaluation of every candidate on every task,
// greedy selection, perturbation-scale adaptation.
//
// Determinism: candidate i of iteration (restart, iter) draws its noise from
// a generator seeded by a hash of (seed, restart, iter, i), so the result is
// independent of the number of workers and of scheduling order.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tshc/policy.hpp"
#include "tshc/reward.hpp"
#include "tshc/rollout.hpp"
#include "tshc/tasks.hpp"

namespace tshc {

enum class SigmaMode { kConstant, kRandomPerRestart, kRandomPerIter, kAdaptive };

const char* ToString(SigmaMode mode);
SigmaMode ParseSigmaMode(const std::string& name);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TshcConfig {
  int n_restarts = 1;
  int n_iter_max = 1;
  int n = 100;  // perturbed candidates per iteration
  int t_max = 100;
  int t_goal = 1;
  double beta = 2.0;
  double sigma_min = 0.01;
  double sigma_max = 10.0;
  SigmaMode sigma_mode = SigmaMode::kAdaptive;
  bool refine = false;
  std::uint64_t seed = 0;
  int workers = 1;
  double init_stddev = kInitStddev;

  // Throws ConfigError naming the offending field.
  void Validate() const;
};

struct CandidateScore {
  int n_solved = 0;   // N_i^{tasks,*}
  double P = 0.0;     // summed pathlength
  Reward J;           // summed reward
};

// Orders candidates by J; two crashed sums are ordered by n_solved, then P.
bool RewardLess(const CandidateScore& a, const CandidateScore& b);

struct BestScore {
  int n_star = 0;
  std::optional<double> p_star;  // set only once every task was solved
  std::optional<Reward> j_star;  // unset ranks below every reward
  double p_at_j = 0.0;           // P of the recorded anytime solution
};

struct Selection {
  std::size_t i_star = 0;
  BestScore best;
  bool replaced = false;  // caller must copy theta_{i*} into the best slot
  int n_tasks_star = 0;
};

// Picks the hill-climbing move among the candidates and decides whether the
// global best is replaced. Ties go to the lowest index.
Selection SelectBest(std::span<const CandidateScore> scores,
                     const BestScore& current, int n_tasks);

// Shrinks sigma by beta on progress, grows it by beta on regression,
// clamped to [sigma_min, sigma_max].
double AdaptSigma(double sigma, int n_new, int n_old, double beta,
                  double sigma_min, double sigma_max);

// Constant and adaptive modes start at sigma_max; random modes draw
// uniformly from [sigma_min, sigma_max].
double DrawSigma(SigmaMode mode, Rng& rng, double sigma_min, double sigma_max);

// Stream identifiers for the counter-based seeding.
enum class Stream : std::uint64_t { kInit = 1, kSigma = 2, kPerturb = 3 };
std::uint64_t SubSeed(std::uint64_t seed, Stream stream, std::uint64_t restart,
                      std::uint64_t iter = 0, std::uint64_t candidate = 0);

CandidateScore EvaluateCandidate(std::span<const double> theta,
                                 MlpPolicy& policy,
                                 std::span<const Task> tasks,
                                 const EnvConfig& env, const TshcConfig& cfg);

struct BestSolution {
  ParamVector theta;  // empty until the first recorded solution
  BestScore score;
};

struct IterationRecord {
  int restart = 0;  // 1-based
  int iter = 0;     // 1-based
  double sigma = 0.0;
  int n_tasks_star = 0;  // of the selected candidate
  double P = 0.0;
  Reward J;
  BestScore best;
  double wall_time_s = 0.0;
};

struct RestartSummary {
  int restart = 0;
  int iterations = 0;
  int n_tasks_star = 0;  // of the final hill-climbing point
  bool solved_all = false;
};

struct TrainResult {
  BestSolution best;
  std::vector<RestartSummary> restarts;
  long long rollouts = 0;
  double wall_time_s = 0.0;
};

struct TrainCallbacks {
  std::function<void(const IterationRecord&)> on_iteration;
  std::function<void(const BestSolution&)> on_improvement;
  // Observes sigma right after every adaptation/draw (testing hook).
  std::function<void(double)> on_sigma;
};

TrainResult TshcRun(const TshcConfig& cfg, std::span<const Task> tasks,
                    const EnvConfig& env, const MlpSpec& spec,
                    const TrainCallbacks& callbacks = {});

// Re-runs every task with the final parameters and records the (achieved,
// commanded) goal pair of each solved vehicle task.
std::vector<GoalTuple> CollectGoalTuples(std::span<const double> theta,
                                         const MlpSpec& spec,
                                         std::span<const Task> tasks,
                                         const EnvConfig& env,
                                         const TshcConfig& cfg);

// Runs fn(index, worker) for index in [0, count) on `workers` threads.
void ParallelFor(int count, int workers,
                 const std::function<void(int index, int worker)>& fn);

}  // namespace tshc
