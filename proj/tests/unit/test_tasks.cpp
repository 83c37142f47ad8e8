#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "tshc/tasks.hpp"

using namespace tshc;

TEST_CASE("heading grid sizes") {
  CHECK(HeadingGrid(1.0, 180.0).size() == 181);
  CHECK(HeadingGrid(10.0, 90.0).size() == 10);
  const auto ends = HeadingGrid(180.0, 180.0);
  REQUIRE(ends.size() == 2);
  CHECK(ends[0].z_goal[2] == 0.0);
  CHECK(ends[1].z_goal[2] == doctest::Approx(kPi));

  const auto grid = HeadingGrid(10.0, 90.0);
  std::set<std::string> ids;
  for (const Task& t : grid) {
    ids.insert(t.id);
    CHECK(t.z0 == StateVec{0, 0, 0, 0});
    CHECK(t.z_goal[0] == 0.0);
    CHECK(t.recipe == FeatureRecipe::kGoalDiff5);
    CHECK(t.Valid());
  }
  CHECK(ids.size() == 10);
  CHECK(grid[3].id == "heading_30");
  CHECK_THROWS(HeadingGrid(0.0, 90.0));
  CHECK_THROWS(HeadingGrid(10.0, 200.0));
}

TEST_CASE("feature vectors") {
  const Normalization norm;
  Task task = NavigationTask({20.0, 0.0, kPi / 4.0, 0.0});
  auto f = FeatureVector({0, 0, 0, 0}, task, 0.7, norm);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == 1.0);
  CHECK(f[1] == 0.0);
  CHECK(f[2] == doctest::Approx(0.25));
  CHECK(f[3] == 0.0);

  task.recipe = FeatureRecipe::kGoalDiff5;
  f = FeatureVector({10.0, 5.0, 0.0, 2.0}, task, -0.3, norm);
  REQUIRE(f.size() == 5);
  CHECK(f[0] == 0.5);
  CHECK(f[1] == -0.25);
  CHECK(f[3] == -0.2);
  CHECK(f[4] == -0.3);

  // Heading difference goes the short way round.
  task.z_goal[2] = DegToRad(170.0);
  f = FeatureVector({0, 0, DegToRad(-170.0), 0}, task, 0.0, norm);
  CHECK(f[2] == doctest::Approx(DegToRad(-20.0) / kPi));

  std::vector<double> pf(4);
  PendulumFeatures({1.2, 1.5, kPi / 2.0, kPi}, norm, pf);
  CHECK(pf == std::vector<double>{0.5, 0.5, 0.5, 0.25});

  CHECK(FeatureDim(FeatureRecipe::kGoalDiff4) == 4);
  CHECK(FeatureDim(FeatureRecipe::kPendulum) == 4);
  CHECK(ControlDim(EnvKind::kVehicle) == 2);
  CHECK(ControlDim(EnvKind::kPendulum) == 1);
  CHECK(ParseFeatureRecipe("goal-diff-5") == FeatureRecipe::kGoalDiff5);
  CHECK(ParseEnvKind("pendulum") == EnvKind::kPendulum);
  CHECK_THROWS(ParseEnvKind("boat"));
}

TEST_CASE("mirroring is an involution and reflects features") {
  const Normalization norm;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Pose s{20 * u(rng), 20 * u(rng), 3.0 * u(rng), 5 * u(rng)};
    Task task = HeadingGrid(10.0, 90.0)[static_cast<std::size_t>(i % 10)];
    task.z_goal[1] = 5 * u(rng);
    const double a0 = u(rng);

    const Task m = MirrorTask(task);
    const Task mm = MirrorTask(m);
    REQUIRE(mm.z0 == task.z0);
    REQUIRE(mm.z_goal == task.z_goal);
    const Pose ps = MirrorPose(MirrorPose(s));
    REQUIRE(ps.y == s.y);
    REQUIRE(ps.psi == s.psi);

    auto f = FeatureVector(s, task, a0, norm);
    const auto g = FeatureVector(MirrorPose(s), m, -a0, norm);
    MirrorFeatures(f, task.recipe);
    for (std::size_t k = 0; k < f.size(); ++k) {
      REQUIRE(f[k] == doctest::Approx(g[k]).epsilon(1e-12));
    }
  }
  std::vector<double> raw{0.4, -0.6};
  MirrorControl(raw);
  CHECK(raw == std::vector<double>{-0.4, -0.6});

  CHECK(NeedsMirroring({0, 0, DegToRad(-30.0), 0}));
  CHECK(NeedsMirroring({0, 0, DegToRad(270.0), 0}));
  CHECK_FALSE(NeedsMirroring({0, 0, DegToRad(30.0), 0}));
  CHECK_FALSE(NeedsMirroring({0, 0, 0.0, 0}));
}

TEST_CASE("nearest goal lookup") {
  std::vector<GoalTuple> store;
  for (double deg : {10.0, 20.0}) {
    const Pose g{0, 0, DegToRad(deg), 0};
    store.push_back({g, g});
  }
  const Pose query{0, 0, DegToRad(13.0), 0};
  CHECK(NearestGoalIndex(query, store) == 0);
  CHECK(NearestGoalLookup(query, store).commanded.psi == DegToRad(10.0));
  CHECK(NearestGoalIndex({0, 0, DegToRad(17.0), 0}, store) == 1);
  // Equidistant: lowest index.
  std::vector<GoalTuple> twins{store[1], store[1]};
  CHECK(NearestGoalIndex(query, twins) == 0);
  CHECK_THROWS_AS(NearestGoalIndex(query, std::vector<GoalTuple>{}), LookupError);

  const LookupWeights w;
  CHECK(LookupDistance({3, 4, 0, 0}, {0, 0, 0, 0}, w) == doctest::Approx(20.0));
  CHECK(LookupDistance({0, 0, DegToRad(10.0), 0}, {0, 0, 0, 0}, w) ==
        doctest::Approx(10.0));
  CHECK(LookupDistance({0, 0, 0, 2.0}, {0, 0, 0, 0}, w) == doctest::Approx(1.44));
  // One default tolerance band in each coordinate costs the same.
  const Tolerances tol;
  CHECK(LookupDistance({tol.eps_d, 0, 0, 0}, {0, 0, 0, 0}, w) ==
        doctest::Approx(LookupDistance({0, 0, 0, tol.eps_v}, {0, 0, 0, 0}, w)));
  CHECK(LookupDistance({0, 0, tol.eps_psi, 0}, {0, 0, 0, 0}, w) ==
        doctest::Approx(LookupDistance({0, 0, 0, tol.eps_v}, {0, 0, 0, 0}, w)));

  // Achieved states sit anywhere inside the tolerance band; a terminal speed
  // near eps_v must not pull a setpoint onto the wrong heading.
  std::vector<GoalTuple> fast{
      {{0.0, 0.0, 0.0, 0.08}, {0, 0, 0, 0}},
      {{-0.06, -0.05, DegToRad(9.1), -1.36}, {0, 0, DegToRad(10.0), 0}}};
  CHECK(NearestGoalIndex({0, 0, DegToRad(10.0), 0}, fast) == 1);

  // The lookup is against achieved states, not commanded ones.
  std::vector<GoalTuple> skew{{{0, 0, DegToRad(12.0), 0}, {0, 0, DegToRad(40.0), 0}},
                              {{0, 0, DegToRad(30.0), 0}, {0, 0, DegToRad(12.0), 0}}};
  CHECK(NearestGoalLookup(query, skew).commanded.psi == DegToRad(40.0));
}

TEST_CASE("pendulum tasks") {
  const auto swing = PendulumTasks(PendulumTaskKind::kSwingUp);
  REQUIRE(swing.size() == 1);
  CHECK(swing[0].env == EnvKind::kPendulum);
  CHECK(swing[0].z0[2] == doctest::Approx(kPi));
  CHECK(swing[0].recipe == FeatureRecipe::kPendulum);
  CHECK(PendulumTasks(PendulumTaskKind::kBoth).size() == 2);
  const Task up = PendulumTasks(PendulumTaskKind::kStabilize)[0];
  CHECK(std::abs(up.z0[2]) < kPendulumUprightTolerance);

  PendulumState s;
  s.theta = DegToRad(11.0);
  CHECK(PendulumGoalFlag(s, up));
  s.theta = DegToRad(-13.0);
  CHECK_FALSE(PendulumGoalFlag(s, up));
  CHECK(ParsePendulumTaskKind("both") == PendulumTaskKind::kBoth);
}
