#include <benchmark/benchmark.h>

#include <vector>

#include "tshc/trainer.hpp"

using namespace tshc;

namespace {

void BM_Forward(benchmark::State& state) {
  const MlpSpec spec = state.range(0) == 0 ? MlpSpec{{5, 8, 2}} : MlpSpec{{4, 64, 64, 2}};
  MlpPolicy policy(spec);
  Rng rng(1);
  const ParamVector theta = Perturb(InitParams(spec, rng), 1.0, rng);
  std::vector<double> in(static_cast<std::size_t>(spec.InputDim()), 0.3);
  std::vector<double> out(static_cast<std::size_t>(spec.OutputDim()));
  for (auto _ : state) {
    policy.Forward(theta, in, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1);

void BM_VehicleRollout(benchmark::State& state) {
  const MlpSpec spec{{5, 8, 2}};
  MlpPolicy policy(spec);
  Rng rng(2);
  const ParamVector theta = Perturb(ParamVector(ParamCount(spec), 0.0), 100.0, rng);
  EnvConfig env;
  env.vvc.mode = VvcMode::kConstantMargin;
  Task task = HeadingGrid(10.0, 90.0)[5];
  task.t_max = static_cast<int>(state.range(0));
  RolloutOptions opt;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Rollout(theta, policy, task, env, opt).steps);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VehicleRollout)->Arg(100)->Arg(2000);

void BM_PendulumRollout(benchmark::State& state) {
  const MlpSpec spec{{4, 64, 64, 1}};
  MlpPolicy policy(spec);
  Rng rng(3);
  const ParamVector theta = InitParams(spec, rng);
  const EnvConfig env;
  const Task task = PendulumTasks(PendulumTaskKind::kSwingUp)[0];
  RolloutOptions opt;
  opt.t_max = 500;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Rollout(theta, policy, task, env, opt).steps);
  }
}
BENCHMARK(BM_PendulumRollout);

void BM_EvaluateCandidate(benchmark::State& state) {
  const MlpSpec spec{{5, 8, 2}};
  MlpPolicy policy(spec);
  Rng rng(4);
  const ParamVector theta = Perturb(ParamVector(ParamCount(spec), 0.0), 100.0, rng);
  EnvConfig env;
  env.vvc.mode = VvcMode::kConstantMargin;
  const auto tasks = HeadingGrid(10.0, 90.0);
  TshcConfig cfg;
  cfg.t_max = 2000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(EvaluateCandidate(theta, policy, tasks, env, cfg).n_solved);
  }
}
BENCHMARK(BM_EvaluateCandidate);

void BM_Perturb(benchmark::State& state) {
  const ParamVector theta(4610, 0.0);
  Rng rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Perturb(theta, 10.0, rng).data());
  }
}
BENCHMARK(BM_Perturb);

}  // namespace

BENCHMARK_MAIN();
