#include "prw/physim/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prw/common/error.hpp"
#include "prw/common/rng.hpp"

namespace prw::physim {
namespace {

constexpr std::uint32_t kSlotGeometryId = 1;
constexpr std::uint32_t kDoorFrameGeometryId = 2;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void validate_step_input(const EnvState& state, const Action& action,
                         double dt, EnvKind expected, std::size_t bodies) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("step: dt must be positive and finite");
  }
  if (state.kind != expected || state.poses.size() != bodies ||
      state.velocities.size() != bodies) {
    throw ValidationError("step: state does not match environment");
  }
  if (!state.finite()) throw ValidationError("step: non-finite state");
  if (!action.finite()) throw ValidationError("step: non-finite action");
}

void check_tunneling(double penetration, const ContactParams& contact) {
  if (penetration > contact.tunneling_cap) {
    throw TunnelingError("penetration " + std::to_string(penetration) +
                         " m exceeds cap; dt too large");
  }
}

// ---------------------------------------------------------------------------
// Block insertion

std::vector<Aabb> slot_boxes(const BlockInsertionParams& p) {
  const double left = p.slot_center_x - p.slot_half_width;
  const double right = p.slot_center_x + p.slot_half_width;
  const double x_lo = p.camera.x_min - 1.0;
  const double x_hi = p.camera.x_max + 1.0;
  return {
      {x_lo, p.floor_bottom, left, p.floor_y},
      {right, p.floor_bottom, x_hi, p.floor_y},
      {left, p.floor_bottom, right, p.floor_y - p.slot_depth},
  };
}

OrientedBox block_box(const BlockInsertionParams& p, const EnvState& s) {
  return {s.poses[0], p.half_size, p.half_size};
}

Vec2 workspace_command(const DriveParams& d, const Action& a, Vec2 pos, const Aabb& ws) {
  Vec2 cmd{d.max_speed * a.vx, d.max_speed * a.vy};
  if ((pos.x <= ws.x0 && cmd.x < 0.0) || (pos.x >= ws.x1 && cmd.x > 0.0)) cmd.x = 0.0;
  if ((pos.y <= ws.y0 && cmd.y < 0.0) || (pos.y >= ws.y1 && cmd.y > 0.0)) cmd.y = 0.0;
  return cmd;
}

std::vector<ContactPoint> block_contacts_impl(const BlockInsertionParams& p,
                                              const EnvState& s) {
  std::vector<ContactPoint> all;
  const OrientedBox box = block_box(p, s);
  for (const Aabb& obstacle : slot_boxes(p)) {
    auto c = box_contacts(box, obstacle);
    all.insert(all.end(), c.begin(), c.end());
  }
  return all;
}

StepResult step_block(const BlockInsertionParams& p, const EnvState& s,
                      const Action& action, double dt) {
  validate_step_input(s, action, dt, EnvKind::kBlockInsertion, 1);
  const Action a = action.clamped();
  const Pose2& pose = s.poses[0];
  const Twist2& vel = s.velocities[0];
  const Vec2 center{pose.x, pose.y};
  const Vec2 v{vel.vx, vel.vy};

  Vec2 contact_force;
  double contact_torque = 0.0;
  for (const ContactPoint& c : block_contacts_impl(p, s)) {
    check_tunneling(c.penetration, p.contact);
    const Vec2 r = c.point - center;
    const Vec2 vp = v + cross(vel.omega, r);
    const double vn = dot(vp, c.normal);
    const double fn = penalty_normal_force(c.penetration, -vn, p.contact);
    const Vec2 vt = vp - vn * c.normal;
    const Vec2 f = fn * c.normal - p.contact.tangential_damping * vt;
    contact_force = contact_force + f;
    contact_torque += cross(r, f);
  }

  const DriveParams& d = p.drive;
  const Vec2 cmd = workspace_command(d, a, center, p.workspace);
  const Vec2 drive_force{d.linear_gain * (cmd.x - vel.vx), d.linear_gain * (cmd.y - vel.vy)};
  const double drive_torque = d.angular_gain * (d.max_rate * a.omega - vel.omega);

  const Vec2 force = drive_force + contact_force;
  const double torque = drive_torque + contact_torque;

  StepResult out{s, {contact_force.x, contact_force.y, contact_torque}};
  Twist2& nv = out.state.velocities[0];
  nv.vx = vel.vx + dt * force.x / p.mass;
  nv.vy = vel.vy + dt * force.y / p.mass;
  nv.omega = vel.omega + dt * torque / p.inertia();
  Pose2& np = out.state.poses[0];
  np.x = pose.x + dt * nv.vx;
  np.y = pose.y + dt * nv.vy;
  np.angle = pose.angle + dt * nv.omega;
  out.state.grip_point = {np.x, np.y};
  out.state.step = s.step + 1;
  return out;
}

EnvState block_state_at(const BlockInsertionParams& p, Pose2 pose) {
  EnvState s;
  s.kind = EnvKind::kBlockInsertion;
  s.poses = {pose};
  s.velocities = {Twist2{}};
  s.grip_point = {pose.x, pose.y};
  s.geometry_id = kSlotGeometryId;
  s.step = 0;
  (void)p;
  return s;
}

double block_insertion_depth(const BlockInsertionParams& p, const EnvState& s) {
  const Pose2& pose = s.poses[0];
  if (std::abs(pose.x - p.slot_center_x) > p.slot_half_width) return 0.0;
  double lowest = pose.y;
  for (const Vec2& c : block_box(p, s).corners()) lowest = std::min(lowest, c.y);
  return std::max(0.0, p.floor_y - lowest);
}

// ---------------------------------------------------------------------------
// Latch door: bodies are [door, handle, gripper]. The door pose stores the
// hinge position and door angle; the handle pose stores the pivot position and
// the absolute handle angle (door angle + relative handle angle).

struct DoorCoords {
  double beta, beta_dot, phi, phi_dot;
};

DoorCoords door_coords(const EnvState& s) {
  return {s.poses[0].angle, s.velocities[0].omega,
          s.poses[1].angle - s.poses[0].angle,
          s.velocities[1].omega - s.velocities[0].omega};
}

EnvState door_state_from(const LatchDoorParams& p, double beta, double beta_dot,
                         double phi, double phi_dot, Pose2 gripper,
                         Twist2 gripper_vel, std::uint64_t step) {
  EnvState s;
  s.kind = EnvKind::kLatchDoor;
  const Vec2 pivot = p.pivot_world(beta);
  const Vec2 pivot_vel = cross(beta_dot, pivot - p.hinge);
  s.poses = {{p.hinge.x, p.hinge.y, beta},
             {pivot.x, pivot.y, beta + phi},
             gripper};
  s.velocities = {{0.0, 0.0, beta_dot},
                  {pivot_vel.x, pivot_vel.y, beta_dot + phi_dot},
                  gripper_vel};
  s.grip_point = p.tip_world(beta, phi);
  s.geometry_id = kDoorFrameGeometryId;
  s.step = step;
  return s;
}

StepResult step_door(const LatchDoorParams& p, const EnvState& s,
                     const Action& action, double dt) {
  validate_step_input(s, action, dt, EnvKind::kLatchDoor, 3);
  const Action a = action.clamped();
  const DoorCoords q = door_coords(s);
  const Pose2& g = s.poses[2];
  const Twist2& gv = s.velocities[2];

  const Vec2 pivot = p.pivot_world(q.beta);
  const Vec2 tip = p.tip_world(q.beta, q.phi);
  const double abs_rate = q.beta_dot + q.phi_dot;
  const Vec2 tip_vel =
      cross(q.beta_dot, pivot - p.hinge) + cross(abs_rate, tip - pivot);

  // Grasp springs. Positive quantities act on the gripper.
  const Vec2 grasp_force = -p.grasp_stiffness * (Vec2{g.x, g.y} - tip) -
                           p.grasp_damping * (Vec2{gv.vx, gv.vy} - tip_vel);
  const double torsion =
      p.grasp_torsion_stiffness * (g.angle - (q.beta + q.phi)) +
      p.grasp_torsion_damping * (gv.omega - abs_rate);

  // Handle-to-door internal torque: return spring, damping, travel stops.
  double internal = -p.handle_return_stiffness * q.phi -
                    p.handle_damping * q.phi_dot;
  if (q.phi < 0.0) {
    const double pen = -q.phi * p.handle_length;
    check_tunneling(pen, p.contact);
    internal += p.handle_length *
                penalty_normal_force(pen, -q.phi_dot * p.handle_length, p.contact);
  } else if (q.phi > p.handle_max_angle) {
    const double pen = (q.phi - p.handle_max_angle) * p.handle_length;
    check_tunneling(pen, p.contact);
    internal -= p.handle_length *
                penalty_normal_force(pen, q.phi_dot * p.handle_length, p.contact);
  }

  // Door stops: the frame (beta < 0) and the latch bolt while engaged.
  double stop = 0.0;
  const double lever = p.door_length;
  if (q.beta < 0.0) {
    const double pen = -std::sin(q.beta) * lever;
    check_tunneling(pen, p.contact);
    stop += lever * penalty_normal_force(
                        pen, -std::cos(q.beta) * q.beta_dot * lever, p.contact);
  } else if (q.beta > 0.0 && q.phi < p.latch_threshold) {
    const double pen = std::sin(q.beta) * lever;
    check_tunneling(pen, p.contact);
    stop -= lever * penalty_normal_force(
                        pen, std::cos(q.beta) * q.beta_dot * lever, p.contact);
  }

  const Vec2 tip_force = -1.0 * grasp_force;
  const double handle_torque = cross(tip - pivot, tip_force) + torsion + internal;
  const double door_torque = cross(pivot - p.hinge, tip_force) - internal + stop -
                             p.door_damping * q.beta_dot;

  const double beta_acc = door_torque / p.door_inertia;
  const double abs_acc = handle_torque / p.handle_inertia;
  const double beta_dot = q.beta_dot + dt * beta_acc;
  const double phi_dot = q.phi_dot + dt * (abs_acc - beta_acc);
  const double beta = q.beta + dt * beta_dot;
  const double phi = q.phi + dt * phi_dot;

  const DriveParams& d = p.drive;
  const Vec2 cmd = workspace_command(d, a, {g.x, g.y}, p.workspace);
  const Vec2 drive_force{d.linear_gain * (cmd.x - gv.vx), d.linear_gain * (cmd.y - gv.vy)};
  const double drive_torque = d.angular_gain * (d.max_rate * a.omega - gv.omega);
  Twist2 ngv{gv.vx + dt * (drive_force.x + grasp_force.x) / p.gripper_mass,
             gv.vy + dt * (drive_force.y + grasp_force.y) / p.gripper_mass,
             gv.omega + dt * (drive_torque - torsion) / p.gripper_inertia};
  Pose2 ng{g.x + dt * ngv.vx, g.y + dt * ngv.vy, g.angle + dt * ngv.omega};

  StepResult out{door_state_from(p, beta, beta_dot, phi, phi_dot, ng, ngv,
                                 s.step + 1),
                 {grasp_force.x, grasp_force.y, -torsion}};
  return out;
}

std::vector<Aabb> door_frame_boxes(const LatchDoorParams& p) {
  const double y0 = p.hinge.y - p.door_half_thickness;
  const double y1 = p.hinge.y + p.door_half_thickness;
  return {
      {p.camera.x_min - 1.0, y0, p.hinge.x - 0.05, y1},
      {p.hinge.x + p.door_length + 0.03, y0, p.camera.x_max + 1.0, y1},
  };
}

std::vector<Vec2> box_polygon(const OrientedBox& b) {
  auto c = b.corners();
  return {c.begin(), c.end()};
}

std::vector<Vec2> aabb_polygon(const Aabb& b) {
  auto c = b.corners();
  return {c.begin(), c.end()};
}

}  // namespace

Environment::Environment(BlockInsertionParams params) : params_(params) {}
Environment::Environment(LatchDoorParams params) : params_(params) {}

Environment Environment::make(EnvKind kind) {
  if (kind == EnvKind::kLatchDoor) return Environment(LatchDoorParams{});
  return Environment(BlockInsertionParams{});
}

EnvKind Environment::kind() const {
  return std::holds_alternative<BlockInsertionParams>(params_)
             ? EnvKind::kBlockInsertion
             : EnvKind::kLatchDoor;
}

const Camera& Environment::camera() const {
  return std::visit([](const auto& p) -> const Camera& { return p.camera; },
                    params_);
}

const BlockInsertionParams& Environment::block_params() const {
  if (auto* p = std::get_if<BlockInsertionParams>(&params_)) return *p;
  throw ContractError("not a block-insertion environment");
}

const LatchDoorParams& Environment::door_params() const {
  if (auto* p = std::get_if<LatchDoorParams>(&params_)) return *p;
  throw ContractError("not a latch-door environment");
}

EnvState Environment::initial_state(std::uint64_t seed) const {
  Rng rng(derive_seed(seed, 0x1A17));
  return std::visit(
      Overloaded{
          [&](const BlockInsertionParams& p) {
            const double j = p.start_jitter;
            Pose2 pose = p.start;
            pose.x += rng.uniform(-j, j);
            pose.y += rng.uniform(-j, j);
            pose.angle += rng.uniform(-j, j);
            return block_state_at(p, pose);
          },
          [&](const LatchDoorParams& p) {
            const Vec2 tip = p.tip_world(0.0, 0.0);
            const double j = p.start_jitter;
            Pose2 g{tip.x + rng.uniform(-j, j), tip.y + rng.uniform(-j, j), 0.0};
            return door_state_from(p, 0.0, 0.0, 0.0, 0.0, g, {}, 0);
          }},
      params_);
}

StepResult Environment::step(const EnvState& state, const Action& action,
                             double dt) const {
  return std::visit(
      Overloaded{[&](const BlockInsertionParams& p) {
                   return step_block(p, state, action, dt);
                 },
                 [&](const LatchDoorParams& p) {
                   return step_door(p, state, action, dt);
                 }},
      params_);
}

bool Environment::success(const EnvState& state) const {
  if (kind() == EnvKind::kBlockInsertion) {
    return insertion_depth(state) >= block_params().success_depth();
  }
  const auto& p = door_params();
  return handle_angle(state) >= p.latch_threshold &&
         door_angle(state) >= p.open_threshold;
}

EnvState Environment::goal_state() const {
  return std::visit(
      Overloaded{[&](const BlockInsertionParams& p) {
                   return block_state_at(p, p.goal_pose());
                 },
                 [&](const LatchDoorParams& p) {
                   const double beta = p.open_threshold + 0.05;
                   const double phi = p.latch_threshold + 0.1;
                   const Vec2 tip = p.tip_world(beta, phi);
                   return door_state_from(p, beta, 0.0, phi, 0.0,
                                          {tip.x, tip.y, beta + phi}, {}, 0);
                 }},
      params_);
}

Pose2 Environment::gripper_pose(const EnvState& state) const {
  return kind() == EnvKind::kBlockInsertion ? state.poses.at(0)
                                            : state.poses.at(2);
}

Twist2 Environment::gripper_velocity(const EnvState& state) const {
  return kind() == EnvKind::kBlockInsertion ? state.velocities.at(0)
                                            : state.velocities.at(2);
}

double Environment::insertion_depth(const EnvState& state) const {
  return block_insertion_depth(block_params(), state);
}

double Environment::door_angle(const EnvState& state) const {
  (void)door_params();
  return state.poses.at(0).angle;
}

double Environment::handle_angle(const EnvState& state) const {
  (void)door_params();
  return state.poses.at(1).angle - state.poses.at(0).angle;
}

std::vector<StaticPart> Environment::static_parts() const {
  std::vector<StaticPart> parts;
  std::visit(Overloaded{[&](const BlockInsertionParams& p) {
                          for (const Aabb& b : slot_boxes(p)) {
                            parts.push_back({b, p.floor_intensity, p.floor_depth});
                          }
                        },
                        [&](const LatchDoorParams& p) {
                          for (const Aabb& b : door_frame_boxes(p)) {
                            parts.push_back({b, 0.4, 0.3});
                          }
                        }},
             params_);
  return parts;
}

std::vector<RenderBody> Environment::render_bodies(const EnvState& state) const {
  std::vector<RenderBody> bodies;
  for (const StaticPart& part : static_parts()) {
    bodies.push_back({aabb_polygon(part.box), part.intensity, part.depth});
  }
  std::visit(
      Overloaded{
          [&](const BlockInsertionParams& p) {
            bodies.push_back({box_polygon(block_box(p, state)),
                              p.block_intensity, p.block_depth});
          },
          [&](const LatchDoorParams& p) {
            const Pose2& door = state.poses[0];
            const Vec2 mid = p.hinge + rotate({0.5 * p.door_length, 0.0}, door.angle);
            bodies.push_back(
                {box_polygon({{mid.x, mid.y, door.angle},
                              0.5 * p.door_length,
                              p.door_half_thickness}),
                 0.7, 0.5});
            const Pose2& handle = state.poses[1];
            const Vec2 hmid = Vec2{handle.x, handle.y} +
                              rotate({0.5 * p.handle_length, 0.0}, handle.angle);
            bodies.push_back({box_polygon({{hmid.x, hmid.y, handle.angle},
                                           0.5 * p.handle_length,
                                           0.02}),
                              0.85, 0.7});
            bodies.push_back({box_polygon({state.poses[2], p.gripper_half_size,
                                           p.gripper_half_size}),
                              1.0, 0.9});
          }},
      params_);
  return bodies;
}

TaskCoordinates Environment::task_coordinates(const EnvState& state) const {
  if (kind() == EnvKind::kBlockInsertion) {
    const auto& p = block_params();
    const Pose2 goal = p.goal_pose();
    return {{state.poses[0].x, state.poses[0].y}, {goal.x, goal.y}};
  }
  const auto& p = door_params();
  // Handle error is weighted down; the door angle carries the task.
  constexpr double kHandleWeight = 0.5;
  return {{kHandleWeight * handle_angle(state), door_angle(state)},
          {kHandleWeight * (p.latch_threshold + 0.1), p.open_threshold + 0.05}};
}

double Environment::kinetic_energy(const EnvState& state) const {
  if (kind() == EnvKind::kBlockInsertion) {
    const auto& p = block_params();
    const Twist2& v = state.velocities[0];
    return 0.5 * p.mass * (v.vx * v.vx + v.vy * v.vy) +
           0.5 * p.inertia() * v.omega * v.omega;
  }
  const auto& p = door_params();
  const DoorCoords q = door_coords(state);
  const Twist2& g = state.velocities[2];
  const double abs_rate = q.beta_dot + q.phi_dot;
  return 0.5 * p.door_inertia * q.beta_dot * q.beta_dot +
         0.5 * p.handle_inertia * abs_rate * abs_rate +
         0.5 * p.gripper_mass * (g.vx * g.vx + g.vy * g.vy) +
         0.5 * p.gripper_inertia * g.omega * g.omega;
}

std::vector<ContactPoint> Environment::block_contacts(const EnvState& state) const {
  return block_contacts_impl(block_params(), state);
}

}  // namespace prw::physim
