#pragma once

#include <cstddef>
#include <vector>

#include "prw/physim/environment.hpp"

namespace prw::physim {

// Waypoints are target gripper poses, visited in order.
struct Plan {
  std::vector<Pose2> waypoints;
  double gain = 1.0;              // action units per metre of error
  double angle_gain = 1.0;        // action units per radian of error
  double position_tolerance = 0.02;
  double angle_tolerance = 0.05;
  double max_linear_action = 1.0; // cap on the norm of (vx, vy)
};

Plan default_plan(EnvKind kind);
// Moves the gripper away from the goal region; progress along it should fall.
Plan retreat_plan(EnvKind kind);

// Proportional controller toward the current waypoint. Stateful: advances to
// the next waypoint once within tolerance and holds the final one.
class ScriptedExpert {
 public:
  // Throws ConfigError on an empty plan.
  ScriptedExpert(const Environment& env, Plan plan);

  Action act(const EnvState& state);
  std::size_t waypoint_index() const { return index_; }
  const Plan& plan() const { return plan_; }

 private:
  const Environment* env_;
  Plan plan_;
  std::size_t index_ = 0;
};

// Single-shot form: P-control toward plan.waypoints[index] without advancing.
Action expert_action(const Pose2& gripper, const Plan& plan, std::size_t index);

}  // namespace prw::physim
