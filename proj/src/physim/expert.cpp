#include "prw/physim/expert.hpp"

#include <algorithm>
#include <cmath>

#include "prw/common/error.hpp"

namespace prw::physim {

Plan default_plan(EnvKind kind) {
  Plan plan;
  if (kind == EnvKind::kBlockInsertion) {
    const BlockInsertionParams p;
    const Pose2 goal = p.goal_pose();
    plan.waypoints = {
        {goal.x, p.floor_y + p.half_size + 0.15, 0.0},
        {goal.x, goal.y - 0.02, 0.0},
    };
    plan.gain = 4.0;
    plan.angle_gain = 2.0;
    plan.max_linear_action = 0.265;
    plan.position_tolerance = 0.02;
  } else {
    const LatchDoorParams p;
    const double phi = p.latch_threshold + 0.35;
    const double twist = 0.06;  // torsion preload against the return spring
    for (double beta : {0.0, 0.12, 0.24, 0.36, 0.48, 0.60}) {
      const Vec2 tip = p.tip_world(beta, phi);
      plan.waypoints.push_back({tip.x, tip.y, beta + phi + twist});
    }
    plan.gain = 8.0;
    plan.angle_gain = 6.0;
    plan.max_linear_action = 0.25;
    plan.position_tolerance = 0.03;
    plan.angle_tolerance = 0.1;
  }
  return plan;
}

Plan retreat_plan(EnvKind kind) {
  Plan plan;
  if (kind == EnvKind::kBlockInsertion) {
    const BlockInsertionParams p;
    plan.waypoints = {{p.start.x - 0.35, p.start.y + 0.35, 0.3}};
    plan.gain = 4.0;
    plan.max_linear_action = 0.265;
  } else {
    // Twist the handle against its stop and push the door shut.
    const LatchDoorParams p;
    const Vec2 tip = p.tip_world(0.0, -0.3);
    plan.waypoints = {{tip.x, tip.y, -0.3}};
    plan.gain = 8.0;
    plan.angle_gain = 6.0;
    plan.max_linear_action = 0.25;
  }
  return plan;
}

Action expert_action(const Pose2& gripper, const Plan& plan, std::size_t index) {
  const Pose2& target = plan.waypoints.at(index);
  Action a{plan.gain * (target.x - gripper.x), plan.gain * (target.y - gripper.y),
           plan.angle_gain * (target.angle - gripper.angle)};
  const double lin = std::hypot(a.vx, a.vy);
  if (lin > plan.max_linear_action && lin > 0.0) {
    const double s = plan.max_linear_action / lin;
    a.vx *= s;
    a.vy *= s;
  }
  return a.clamped();
}

ScriptedExpert::ScriptedExpert(const Environment& env, Plan plan)
    : env_(&env), plan_(std::move(plan)) {
  if (plan_.waypoints.empty()) throw ConfigError("expert plan has no waypoints");
}

Action ScriptedExpert::act(const EnvState& state) {
  const Pose2 g = env_->gripper_pose(state);
  while (index_ + 1 < plan_.waypoints.size()) {
    const Pose2& w = plan_.waypoints[index_];
    const bool reached =
        std::hypot(w.x - g.x, w.y - g.y) < plan_.position_tolerance &&
        std::abs(w.angle - g.angle) < plan_.angle_tolerance;
    if (!reached) break;
    ++index_;
  }
  return expert_action(g, plan_, index_);
}

}  // namespace prw::physim
