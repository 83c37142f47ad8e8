#include "tshc/reward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tshc {

std::string Reward::ToString() const {
  if (crashed_) return "crash";
  std::ostringstream os;
  os << value_;
  return os.str();
}

GoalErrors ComputeGoalErrors(const Pose& state, const Pose& goal) {
  return {std::hypot(state.x - goal.x, state.y - goal.y),
          std::abs(WrapAngle(state.psi - goal.psi)),
          std::abs(state.v - goal.v)};
}

bool GoalFlag(const Pose& state, const Pose& goal, const Tolerances& tol) {
  const GoalErrors e = ComputeGoalErrors(state, goal);
  return e.e_d < tol.eps_d && e.e_psi < tol.eps_psi && e.e_v < tol.eps_v;
}

Reward SparseReward(bool crash) {
  return crash ? Reward::Crash() : Reward(-1.0);
}

bool SuccessIntegral(std::span<const int> goal_flag_history, int t_goal) {
  if (t_goal < 1) throw std::invalid_argument("T_goal must be >= 1");
  const auto window = static_cast<std::size_t>(t_goal);
  if (goal_flag_history.size() < window) return false;
  return std::all_of(goal_flag_history.end() - static_cast<long>(window),
                     goal_flag_history.end(), [](int f) { return f == 1; });
}

double PathlengthDelta(double x0, double y0, double x1, double y1) {
  return -std::hypot(x1 - x0, y1 - y0);
}

const char* ToString(VvcMode mode) {
  switch (mode) {
    case VvcMode::kOff:
      return "off";
    case VvcMode::kSpatial:
      return "spatial";
    case VvcMode::kConstantMargin:
      return "constant-margin";
  }
  return "?";
}

VvcMode ParseVvcMode(const std::string& name) {
  if (name == "off") return VvcMode::kOff;
  if (name == "spatial") return VvcMode::kSpatial;
  if (name == "constant-margin") return VvcMode::kConstantMargin;
  throw std::invalid_argument("unknown VVC mode '" + name +
                              "' (expected off, spatial, constant-margin)");
}

Interval VvcBounds(double e_d, double v_goal, double v_min, double v_max,
                   const VvcConfig& cfg) {
  if (cfg.mode == VvcMode::kOff || e_d >= cfg.r_thresh) return {v_min, v_max};
  if (cfg.mode == VvcMode::kSpatial) {
    return {v_goal + (v_min - v_goal) / cfg.r_thresh * e_d,
            v_goal + (v_max - v_goal) / cfg.r_thresh * e_d};
  }
  return {std::max(v_goal - cfg.margin, v_min),
          std::min(v_goal + cfg.margin, v_max)};
}

Reward RichReward(std::span<const double> state, std::span<const double> ref,
                  std::span<const double> weights, bool crash) {
  if (crash) return Reward::Crash();
  if (state.size() != ref.size() || state.size() != weights.size()) {
    throw std::invalid_argument("rich reward: state, reference and weights "
                                "must have equal length");
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < state.size(); ++l) {
    const double e = state[l] - ref[l];
    sum += weights[l] * e * e;
  }
  return Reward(-sum);
}

}  // namespace tshc
