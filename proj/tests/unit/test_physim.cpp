#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "block_oracle.hpp"
#include "polygon_oracle.hpp"
#include "prw/common/error.hpp"
#include "prw/physim/contact.hpp"
#include "prw/physim/demo.hpp"
#include "prw/physim/render.hpp"

using namespace prw::physim;
using prw::testing::OracleBlock;

namespace {

const Environment& block_env() {
  static const Environment env = Environment::make(EnvKind::kBlockInsertion);
  return env;
}

const Environment& door_env() {
  static const Environment env = Environment::make(EnvKind::kLatchDoor);
  return env;
}

EnvState block_at(Pose2 pose, Twist2 vel = {}) {
  EnvState s = block_env().initial_state(0);
  s.poses[0] = pose;
  s.velocities[0] = vel;
  s.grip_point = {pose.x, pose.y};
  return s;
}

const Demonstration& block_demo_seed7() {
  static const Demonstration demo =
      record_demo(block_env(), 7, default_plan(EnvKind::kBlockInsertion));
  return demo;
}

}  // namespace

TEST(Contact, PenaltyForceFormula) {
  const ContactParams p;
  EXPECT_EQ(penalty_normal_force(0.01, 0.0, p), 5.0);
  EXPECT_EQ(penalty_normal_force(0.02, 0.1, p), 500.0 * 0.02 + 10.0 * 0.1);
  EXPECT_EQ(penalty_normal_force(0.01, -10.0, p), 0.0);  // never pulls
  EXPECT_EQ(penalty_normal_force(0.0, 0.0, p), 0.0);
}

TEST(StepEnv, FreeBodyAtRestStaysPut) {
  const EnvState s = block_env().initial_state(3);
  const StepResult r = step_env(block_env(), s, Action{});
  EXPECT_EQ(r.state.poses, s.poses);
  EXPECT_EQ(r.state.velocities, s.velocities);
  EXPECT_EQ(r.wrench, Wrench2{});
  EXPECT_EQ(r.state.step, s.step + 1);
}

TEST(StepEnv, RejectsBadInput) {
  EnvState s = block_env().initial_state(0);
  EXPECT_THROW(step_env(block_env(), s, Action{}, 0.0), prw::ValidationError);
  EXPECT_THROW(step_env(block_env(), s, Action{NAN, 0.0, 0.0}), prw::ValidationError);
  s.poses[0].x = INFINITY;
  EXPECT_THROW(step_env(block_env(), s, Action{}), prw::ValidationError);
  EXPECT_THROW(step_env(door_env(), block_env().initial_state(0), Action{}),
               prw::ValidationError);
}

TEST(StepEnv, DeepPenetrationIsTunneling) {
  const auto& p = block_env().block_params();
  // Bottom face 0.2 m below the floor surface, outside the slot.
  const EnvState s = block_at({-0.5, p.floor_y + p.half_size - 0.2, 0.0});
  EXPECT_THROW(step_env(block_env(), s, Action{}), prw::TunnelingError);
}

TEST(StepEnv, NoPenetrationMeansNoContactForce) {
  const EnvState s = block_at({-0.5, 0.5, 0.3}, {0.4, -0.2, 1.0});
  EXPECT_TRUE(block_env().block_contacts(s).empty());
  EXPECT_EQ(step_env(block_env(), s, Action{0.3, 0.1, 0.0}).wrench, Wrench2{});
}

TEST(StepEnv, KineticEnergyNonIncreasingWithoutContact) {
  EnvState s = block_at({-0.4, 0.8, 0.0}, {0.5, 0.3, 2.0});
  double ke = block_env().kinetic_energy(s);
  for (int i = 0; i < 50; ++i) {
    s = step_env(block_env(), s, Action{}).state;
    const double next = block_env().kinetic_energy(s);
    EXPECT_LE(next, ke);
    ke = next;
  }
}

TEST(StepEnv, ScriptedInsertionMatchesIndependentOracle) {
  const auto& p = block_env().block_params();
  // Drops into the slot while drifting right, so it touches the floor and a wall.
  EnvState s = block_at({0.30, 0.25, 0.02});
  OracleBlock b{0.30, 0.25, 0.02, 0.0, 0.0, 0.0};
  double lib_impulse[3] = {0, 0, 0}, ref_impulse[3] = {0, 0, 0};
  bool touched = false;
  const double dt = kDefaultDt;
  for (int k = 0; k < 200; ++k) {
    const Action a{0.1, -1.0, k < 100 ? 0.05 : 0.0};
    const StepResult r = step_env(block_env(), s, a, dt);
    const auto o = prw::testing::oracle_block_step(p, b, a.vx, a.vy, a.omega, dt);
    s = r.state;
    b = o.next;
    lib_impulse[0] += r.wrench.fx * dt;
    lib_impulse[1] += r.wrench.fy * dt;
    lib_impulse[2] += r.wrench.torque * dt;
    ref_impulse[0] += o.fx * dt;
    ref_impulse[1] += o.fy * dt;
    ref_impulse[2] += o.tz * dt;
    touched = touched || r.wrench.fy != 0.0;
    const Pose2& q = s.poses[0];
    const Twist2& v = s.velocities[0];
    ASSERT_NEAR(q.x, b.x, 1e-9) << k;
    ASSERT_NEAR(q.y, b.y, 1e-9) << k;
    ASSERT_NEAR(q.angle, b.a, 1e-9) << k;
    ASSERT_NEAR(v.vx, b.vx, 1e-9) << k;
    ASSERT_NEAR(v.vy, b.vy, 1e-9) << k;
    ASSERT_NEAR(v.omega, b.w, 1e-9) << k;
  }
  EXPECT_TRUE(touched);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(lib_impulse[i], ref_impulse[i], 1e-9);
  EXPECT_GE(block_env().insertion_depth(s), p.success_depth());
  EXPECT_TRUE(block_env().success(s));
}

TEST(StepEnv, StaticGeometryNeverMoves) {
  const Demonstration& demo = block_demo_seed7();
  for (const DemoStep& st : demo.steps) {
    EXPECT_EQ(st.state.geometry_id, demo.steps[0].state.geometry_id);
  }
}

TEST(StepEnv, DoorIsDeterministic) {
  EnvState a = door_env().initial_state(5), b = door_env().initial_state(5);
  for (int k = 0; k < 100; ++k) {
    const Action act{0.2 * std::sin(0.1 * k), -0.3, 0.1};
    a = step_env(door_env(), a, act).state;
    b = step_env(door_env(), b, act).state;
  }
  EXPECT_EQ(a, b);
}

TEST(Render, EmptySceneIsBlack) {
  const auto g = render_bodies({}, Camera{});
  for (double v : g.intensity) EXPECT_EQ(v, 0.0);
  for (double v : g.depth) EXPECT_EQ(v, 0.0);
}

TEST(Render, UnitSquareMatchesCrossingNumber) {
  const Camera cam;  // [-1, 1]^2, 32 cells, 4x4 subsamples
  for (double angle : {0.0, 0.37}) {
    RenderBody body;
    for (auto [x, y] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}) {
      body.polygon.push_back({x * std::cos(angle) - y * std::sin(angle),
                              x * std::sin(angle) + y * std::cos(angle)});
    }
    const std::vector<RenderBody> bodies{body};
    const auto g = render_bodies(bodies, cam);
    const double cell = 2.0 / 32.0;
    for (std::size_t r = 0; r < 32; ++r) {
      for (std::size_t c = 0; c < 32; ++c) {
        int hits = 0;
        for (int j = 0; j < 4; ++j)
          for (int i = 0; i < 4; ++i) {
            const double x = -1.0 + cell * (c + (i + 0.5) / 4.0);
            const double y = 1.0 - cell * (r + (j + 0.5) / 4.0);
            hits += prw::testing::crossing_number_inside(body.polygon, x, y) ? 1 : 0;
          }
        EXPECT_EQ(g.intensity[r * 32 + c] > 0.0, hits > 0) << r << "," << c;
        EXPECT_DOUBLE_EQ(g.intensity[r * 32 + c], hits / 16.0) << r << "," << c;
      }
    }
  }
}

TEST(Render, NearerBodyWinsOverlap) {
  RenderBody far{{{-0.6, -0.6}, {0.2, -0.6}, {0.2, 0.2}, {-0.6, 0.2}}, 0.3, 0.2};
  RenderBody near{{{-0.2, -0.2}, {0.6, -0.2}, {0.6, 0.6}, {-0.2, 0.6}}, 0.9, 0.8};
  for (bool swap : {false, true}) {
    std::vector<RenderBody> bodies{far, near};
    if (swap) std::swap(bodies[0], bodies[1]);
    const auto g = render_bodies(bodies, Camera{});
    std::size_t row = 0, col = 0;
    ASSERT_TRUE(cell_of(Camera{}, {0.0, 0.0}, row, col));  // fully inside the overlap
    EXPECT_DOUBLE_EQ(g.depth[row * 32 + col], 0.8);
    EXPECT_DOUBLE_EQ(g.intensity[row * 32 + col], 0.9);
    ASSERT_TRUE(cell_of(Camera{}, {-0.45, -0.45}, row, col));  // far body only
    EXPECT_DOUBLE_EQ(g.depth[row * 32 + col], 0.2);
  }
}

TEST(Render, CentroidCellIsOccupied) {
  const Demonstration& demo = block_demo_seed7();
  for (std::size_t t = 0; t < demo.steps.size(); t += 25) {
    const Pose2& q = demo.steps[t].state.poses[0];
    std::size_t row = 0, col = 0;
    ASSERT_TRUE(cell_of(block_env().camera(), {q.x, q.y}, row, col));
    const auto& depth = demo.steps[t].obs.depth;
    EXPECT_DOUBLE_EQ(depth[row * 32 + col], block_env().block_params().block_depth) << t;
  }
}

TEST(Render, GridsStayInUnitRange) {
  const auto g = render(door_env(), door_env().initial_state(1));
  for (double v : g.intensity) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  for (double v : g.depth) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
}

TEST(Sense, EmptyHistoryGivesZeroWindow) {
  const Observation o = sense(block_env(), block_env().initial_state(0), WrenchWindow{});
  for (double v : o.ft_window) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(o.intensity.size(), 32u * 32u);
}

TEST(Sense, ConstantWrenchFillsEveryRow) {
  WrenchWindow w;
  for (int i = 0; i < 40; ++i) w.push({1.0, 2.0, 3.0});
  const Observation o = sense(block_env(), block_env().initial_state(0), w);
  for (std::size_t r = 0; r < kWindowLength; ++r) {
    const double expect[6] = {1, 2, 3, 0, 0, 0};
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(o.ft_window[r * 6 + c], expect[c]);
  }
}

TEST(Sense, WindowHoldsLast32InOrderAndShifts) {
  WrenchWindow w;
  for (int i = 0; i < 50; ++i) w.push({double(i), -double(i), 0.5 * i});
  const auto rows = w.rows();
  for (std::size_t r = 0; r < 32; ++r) EXPECT_EQ(rows[r * 6], double(18 + r));
  w.push({99.0, 0.0, 0.0});
  const auto shifted = w.rows();
  for (std::size_t r = 0; r + 1 < 32; ++r)
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(shifted[r * 6 + c], rows[(r + 1) * 6 + c]);
  EXPECT_EQ(shifted[31 * 6], 99.0);
}

TEST(Sense, ShortHistoryIsPaddedOnTheOldSide) {
  WrenchWindow w;
  w.push({4.0, 5.0, 6.0});
  w.push({7.0, 8.0, 9.0});
  const auto rows = w.rows();
  for (std::size_t r = 0; r < 30; ++r)
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(rows[r * 6 + c], 0.0);
  EXPECT_EQ(rows[30 * 6], 4.0);
  EXPECT_EQ(rows[31 * 6 + 2], 9.0);
  EXPECT_EQ(WrenchWindow::from_rows(rows).rows(), rows);
}

TEST(Sense, PoseMatchesGripper) {
  const EnvState s = door_env().initial_state(2);
  const Observation o = sense(door_env(), s, WrenchWindow{});
  EXPECT_EQ(o.pose, door_env().gripper_pose(s));
  EXPECT_EQ(o.velocity, door_env().gripper_velocity(s));
}

TEST(Expert, AtFinalWaypointGivesZeroAction) {
  Plan plan;
  plan.waypoints = {{0.3, 0.2, 0.1}};
  const Action a = expert_action({0.3, 0.2, 0.1}, plan, 0);
  EXPECT_EQ(a, Action{});
}

TEST(Expert, FarWaypointClampsToUnit) {
  Plan plan;
  plan.waypoints = {{1.0, 0.0, 0.0}};
  plan.gain = 1.0;
  plan.max_linear_action = 1.0;
  EXPECT_EQ(expert_action({0.0, 0.0, 0.0}, plan, 0), (Action{1.0, 0.0, 0.0}));
  plan.gain = 5.0;
  EXPECT_EQ(expert_action({0.0, 0.0, 0.0}, plan, 0), (Action{1.0, 0.0, 0.0}));
}

TEST(Expert, EmptyPlanIsAConfigError) {
  EXPECT_THROW(ScriptedExpert(block_env(), Plan{}), prw::ConfigError);
}

TEST(Demo, BlockSeed7Succeeds) {
  const Demonstration& demo = block_demo_seed7();
  EXPECT_TRUE(demo.success);
  EXPECT_LE(demo.horizon(), 600u);
  EXPECT_EQ(demo.success, block_env().success(demo.steps.back().state));
  EXPECT_FALSE(demo.steps.back().action.has_value());
  for (std::size_t t = 0; t + 1 < demo.steps.size(); ++t) {
    ASSERT_TRUE(demo.steps[t].action.has_value());
    EXPECT_LE(std::abs(demo.steps[t].action->vx), 1.0);
  }
}

TEST(Demo, DoorSucceeds) {
  const Demonstration demo = record_demo(door_env(), 7, default_plan(EnvKind::kLatchDoor));
  EXPECT_TRUE(demo.success);
  EXPECT_EQ(demo.success, door_env().success(demo.steps.back().state));
}

TEST(Demo, SameSeedIsBitIdentical) {
  const Demonstration again =
      record_demo(block_env(), 7, default_plan(EnvKind::kBlockInsertion));
  EXPECT_EQ(again, block_demo_seed7());
  EXPECT_EQ(encode_demo(again), encode_demo(block_demo_seed7()));
}

TEST(Demo, ShortHorizonTruncates) {
  const Demonstration demo = record_demo(block_env(), 7, default_plan(EnvKind::kBlockInsertion),
                                         {.horizon = 10});
  EXPECT_FALSE(demo.success);
  EXPECT_EQ(demo.steps.size(), 11u);
  EXPECT_NE(demo.status, "ok");
}

TEST(Demo, ReplayReproducesStates) {
  const Demonstration& demo = block_demo_seed7();
  const auto states = replay_states(block_env(), demo);
  ASSERT_EQ(states.size(), demo.steps.size());
  for (std::size_t t = 0; t < states.size(); ++t) EXPECT_EQ(states[t], demo.steps[t].state);
}

TEST(Demo, FileRoundTripAndHeader) {
  const Demonstration& demo = block_demo_seed7();
  const auto bytes = encode_demo(demo);
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "PRLD");
  std::uint32_t version = 0, kind = 0, T = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&kind, bytes.data() + 8, 4);
  std::memcpy(&T, bytes.data() + 12, 4);
  EXPECT_EQ(version, 1u);
  EXPECT_EQ(kind, 1u);
  EXPECT_EQ(T, demo.horizon());
  EXPECT_EQ(decode_demo(bytes), demo);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_demo(bad), prw::ValidationError);
  bad = bytes;
  bad.resize(bytes.size() / 2);
  EXPECT_THROW(decode_demo(bad), prw::ValidationError);
}

TEST(Success, Predicates) {
  EXPECT_FALSE(block_env().success(block_env().initial_state(0)));
  EXPECT_TRUE(block_env().success(block_env().goal_state()));
  EXPECT_FALSE(door_env().success(door_env().initial_state(0)));
  const EnvState goal = door_env().goal_state();
  EXPECT_TRUE(door_env().success(goal));
  // Handle turned past the latch, door still shut.
  EnvState turned = goal;
  const double phi = door_env().handle_angle(goal);
  turned.poses[0].angle = 0.0;
  turned.poses[1].angle = phi;
  EXPECT_GE(door_env().handle_angle(turned), door_env().door_params().latch_threshold);
  EXPECT_FALSE(door_env().success(turned));
}

TEST(Success, BlockThresholdPlusEpsilon) {
  const auto& p = block_env().block_params();
  const double y = p.floor_y - p.success_depth() + p.half_size - 1e-6;
  EXPECT_TRUE(block_env().success(block_at({p.slot_center_x, y, 0.0})));
  const double y_short = p.floor_y - p.success_depth() + p.half_size + 1e-6;
  EXPECT_FALSE(block_env().success(block_at({p.slot_center_x, y_short, 0.0})));
}

TEST(EnvKindNames, ParseRoundTrip) {
  EXPECT_EQ(parse_env_kind("block-insertion"), EnvKind::kBlockInsertion);
  EXPECT_EQ(parse_env_kind(to_string(EnvKind::kLatchDoor)), EnvKind::kLatchDoor);
  EXPECT_THROW(parse_env_kind("peg"), prw::ConfigError);
}

TEST(Expert, RetreatPlanMovesAwayFromSlot) {
  const Environment& env = block_env();
  const Demonstration d = record_demo(env, 7, retreat_plan(EnvKind::kBlockInsertion),
                                      {.horizon = 300, .stop_on_success = false});
  EXPECT_FALSE(d.success);
  const Pose2 goal = env.block_params().goal_pose();
  auto dist = [&](const EnvState& s) {
    return std::hypot(s.poses[0].x - goal.x, s.poses[0].y - goal.y);
  };
  EXPECT_GT(dist(d.steps.back().state), dist(d.steps.front().state) + 0.3);
}

TEST(Workspace, OutwardCommandsStopAtTheBoundary) {
  const Environment env = Environment::make(EnvKind::kBlockInsertion);
  const Camera& cam = env.camera();
  const double reach = env.block_params().half_size * std::sqrt(2.0);
  for (const Action push : {Action{-1, 0, 0}, Action{1, 0, 0}, Action{0, 1, 0}}) {
    EnvState s = env.initial_state(1);
    for (int t = 0; t < 400; ++t) s = env.step(s, push, kDefaultDt).state;
    const Pose2 g = env.gripper_pose(s);
    // The whole block stays in view.
    EXPECT_GT(g.x - reach, cam.x_min);
    EXPECT_LT(g.x + reach, cam.x_max);
    EXPECT_LT(g.y + reach, cam.y_max);
    // Inward commands still move it back.
    const EnvState back = env.step(s, Action{-push.vx, -push.vy, 0}, kDefaultDt).state;
    EXPECT_LT(std::abs(env.gripper_pose(back).x) + std::abs(env.gripper_pose(back).y - 0.6),
              std::abs(g.x) + std::abs(g.y - 0.6));
  }
}
