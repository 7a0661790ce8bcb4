#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "prw/physim/contact.hpp"
#include "prw/physim/types.hpp"

namespace prw::physim {

inline constexpr double kDefaultDt = 0.01;

// Maps normalized actions to commanded velocities and tracks them with a
// viscous drive (F = gain * (v_cmd - v)). With zero action the drive is pure
// damping. Outside the workspace box, outward velocity commands are zeroed.
struct DriveParams {
  double max_speed = 1.0;       // m/s at |action| = 1
  double max_rate = 2.0;        // rad/s at |action| = 1
  double linear_gain = 10.0;    // N*s/m
  double angular_gain = 0.15;   // N*m*s/rad
};

// Orthographic top/side view covering [x_min, x_max] x [y_min, y_max].
struct Camera {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
  std::size_t side = kDefaultGridSide;
  std::size_t supersample = 4;  // samples per cell edge
};

struct StaticPart {
  Aabb box;
  double intensity = 0.5;
  double depth = 0.3;
};

// Block held by the gripper, inserted into a slot cut into the floor.
struct BlockInsertionParams {
  double half_size = 0.15;
  double mass = 1.0;
  Pose2 start{-0.5, 0.6, 0.0};
  double start_jitter = 0.05;       // uniform +/- on x, y (m) and angle (rad)
  double slot_center_x = 0.30;
  double slot_half_width = 0.19;
  double slot_depth = 0.30;
  double floor_y = 0.0;
  double floor_bottom = -0.6;
  double success_fraction = 0.8;    // of slot depth
  double block_intensity = 1.0;
  double block_depth = 0.9;
  double floor_intensity = 0.45;
  double floor_depth = 0.4;
  Camera camera{-1.0, 1.0, -0.6, 1.4, kDefaultGridSide, 4};
  // Gripper workspace; keeps the block inside the camera view.
  Aabb workspace{-0.6, -0.6, 0.6, 1.0};
  ContactParams contact;
  DriveParams drive;

  double inertia() const {
    return mass * (8.0 * half_size * half_size) / 12.0;
  }
  double success_depth() const { return success_fraction * slot_depth; }
  Pose2 goal_pose() const {
    return {slot_center_x, floor_y - slot_depth + half_size, 0.0};
  }
};

// Door on a hinge, held shut by a latch until its lever handle is turned.
// The gripper grasps the handle tip through a linear and a torsional spring.
struct LatchDoorParams {
  Vec2 hinge{-0.45, -0.2};
  double door_length = 0.9;
  double door_half_thickness = 0.03;
  double door_inertia = 0.54;
  double door_damping = 0.5;
  Vec2 handle_pivot_local{0.75, 0.06};
  double handle_length = 0.15;
  double handle_inertia = 0.01;
  double handle_return_stiffness = 0.5;  // N*m/rad
  double handle_damping = 0.05;
  double handle_max_angle = 1.5707963267948966;
  double gripper_mass = 1.0;
  double gripper_inertia = 0.01;
  double gripper_half_size = 0.04;
  double grasp_stiffness = 300.0;
  double grasp_damping = 5.0;
  double grasp_torsion_stiffness = 10.0;
  double grasp_torsion_damping = 0.05;
  double start_jitter = 0.01;
  double latch_threshold = 0.7853981633974483;  // 45 deg
  double open_threshold = 0.5235987755982988;   // 30 deg
  Camera camera{-1.0, 1.0, -0.8, 1.2, kDefaultGridSide, 4};
  Aabb workspace{-0.85, -0.65, 0.85, 1.05};
  ContactParams contact;
  DriveParams drive{1.0, 2.0, 40.0, 0.5};

  Vec2 pivot_world(double door_angle) const {
    return hinge + rotate(handle_pivot_local, door_angle);
  }
  Vec2 tip_world(double door_angle, double handle_angle) const {
    return pivot_world(door_angle) +
           rotate({handle_length, 0.0}, door_angle + handle_angle);
  }
};

struct StepResult {
  EnvState state;
  Wrench2 wrench;
};

// Polygon to rasterize; `polygon` is convex and counter-clockwise.
struct RenderBody {
  std::vector<Vec2> polygon;
  double intensity = 1.0;
  double depth = 1.0;
};

// Task-relevant coordinates used by the distance-based baseline reward.
struct TaskCoordinates {
  std::vector<double> current;
  std::vector<double> goal;
};

class Environment {
 public:
  explicit Environment(BlockInsertionParams params);
  explicit Environment(LatchDoorParams params);
  static Environment make(EnvKind kind);

  EnvKind kind() const;
  const Camera& camera() const;

  // Nominal start state with seeded jitter.
  EnvState initial_state(std::uint64_t seed) const;

  // One semi-implicit Euler step with penalty contact. Throws
  // ValidationError on non-finite input or dt <= 0, TunnelingError when a
  // penetration exceeds the contact cap.
  StepResult step(const EnvState& state, const Action& action, double dt) const;

  bool success(const EnvState& state) const;

  // State configured analytically at the task goal.
  EnvState goal_state() const;

  Pose2 gripper_pose(const EnvState& state) const;
  Twist2 gripper_velocity(const EnvState& state) const;

  std::vector<RenderBody> render_bodies(const EnvState& state) const;
  std::vector<StaticPart> static_parts() const;
  TaskCoordinates task_coordinates(const EnvState& state) const;

  // Block insertion only: depth of the lowest block corner below the floor
  // while the block is over the slot.
  double insertion_depth(const EnvState& state) const;
  // Latch door only.
  double door_angle(const EnvState& state) const;
  double handle_angle(const EnvState& state) const;

  const BlockInsertionParams& block_params() const;
  const LatchDoorParams& door_params() const;

  // Kinetic energy of the dynamic bodies (gripper/block included).
  double kinetic_energy(const EnvState& state) const;

  // Penalty contacts of the block against the static geometry.
  std::vector<ContactPoint> block_contacts(const EnvState& state) const;

 private:
  std::variant<BlockInsertionParams, LatchDoorParams> params_;
};

// Free-function form of Environment::step.
inline StepResult step_env(const Environment& env, const EnvState& state,
                           const Action& action, double dt = kDefaultDt) {
  return env.step(state, action, dt);
}

}  // namespace prw::physim
