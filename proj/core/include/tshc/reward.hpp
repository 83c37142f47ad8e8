#pragma once

// Sparse-reward machinery: goal flag, per-step reward with a crash sentinel,
// the consecutive-success window, pathlength increments, virtual velocity
// constraints and the optional weighted squared-error reward.

#include <compare>
#include <span>
#include <string>

#include "tshc/dynamics.hpp"

namespace tshc {

struct Tolerances {
  double eps_d = 0.25;                 // [m]
  double eps_psi = DegToRad(1.0);      // [rad]
  double eps_v = KmhToMps(5.0);        // [m/s]

  bool Valid() const { return eps_d > 0.0 && eps_psi > 0.0 && eps_v > 0.0; }
};

// Position/heading/velocity tuple used for goals and setpoints.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double v = 0.0;
};

// Accumulated reward that may have hit the crash sentinel. A crashed value
// orders below every finite value; two crashed values compare equal.
class Reward {
 public:
  constexpr Reward() = default;
  constexpr explicit Reward(double value) : value_(value) {}
  static constexpr Reward Crash() {
    Reward r;
    r.crashed_ = true;
    return r;
  }

  constexpr bool crashed() const { return crashed_; }
  // Finite part; meaningless once crashed.
  constexpr double value() const { return value_; }

  Reward& operator+=(const Reward& other) {
    if (crashed_ || other.crashed_) {
      *this = Crash();
    } else {
      value_ += other.value_;
    }
    return *this;
  }
  friend Reward operator+(Reward a, const Reward& b) { return a += b; }

  friend std::partial_ordering operator<=>(const Reward& a, const Reward& b) {
    if (a.crashed_ || b.crashed_) {
      return static_cast<int>(!a.crashed_) <=> static_cast<int>(!b.crashed_);
    }
    return a.value_ <=> b.value_;
  }
  friend bool operator==(const Reward& a, const Reward& b) {
    return (a <=> b) == 0;
  }

  std::string ToString() const;

 private:
  bool crashed_ = false;
  double value_ = 0.0;
};

struct GoalErrors {
  double e_d = 0.0;
  double e_psi = 0.0;
  double e_v = 0.0;
};

// Euclidean position error, wrapped absolute heading error, absolute
// velocity error.
GoalErrors ComputeGoalErrors(const Pose& state, const Pose& goal);

// 1 iff all three errors are strictly below their tolerances.
bool GoalFlag(const Pose& state, const Pose& goal, const Tolerances& tol);

// -1 per step, crash sentinel on crash.
Reward SparseReward(bool crash);

// 1 iff the last `t_goal` flags in the history are all set.
bool SuccessIntegral(std::span<const int> goal_flag_history, int t_goal);

// Negated Euclidean distance travelled between consecutive states.
double PathlengthDelta(double x0, double y0, double x1, double y1);

enum class VvcMode { kOff, kSpatial, kConstantMargin };

struct VvcConfig {
  VvcMode mode = VvcMode::kSpatial;
  double r_thresh = 5.0;              // [m]
  double margin = KmhToMps(5.0);      // [m/s]

  bool Valid() const { return r_thresh > 0.0 && margin >= 0.0; }
};

const char* ToString(VvcMode mode);
VvcMode ParseVvcMode(const std::string& name);

// Velocity bounds valid at distance e_d from the goal.
Interval VvcBounds(double e_d, double v_goal, double v_min, double v_max,
                   const VvcConfig& cfg);

// -sum_l alpha_l (z(l) - z_ref(l))^2, or the crash sentinel.
Reward RichReward(std::span<const double> state, std::span<const double> ref,
                  std::span<const double> weights, bool crash);

}  // namespace tshc
