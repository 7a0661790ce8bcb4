#include "prw/physim/demo.hpp"

#include <cmath>
#include <limits>

#include "prw/common/error.hpp"

namespace prw::physim {
namespace {

constexpr char kDemoMagic[] = "PRLD";
constexpr std::uint32_t kDemoVersion = 1;
constexpr char kDemoFooterMagic[] = "PRLE";
constexpr std::uint8_t kRecordDelimiter = 0x0A;

}  // namespace

Demonstration record_demo(const Environment& env, std::uint64_t seed,
                          const Plan& plan, const DemoOptions& options) {
  ScriptedExpert expert(env, plan);
  Demonstration demo;
  demo.kind = env.kind();
  demo.seed = seed;

  Episode episode(env, env.initial_state(seed));
  for (std::size_t t = 0;; ++t) {
    const EnvState& s = episode.state();
    Observation obs = episode.observe();
    const bool done = (options.stop_on_success && env.success(s)) ||
                      t == options.horizon;
    if (done) {
      demo.steps.push_back({s, std::nullopt, std::move(obs)});
      break;
    }
    const Action a = expert.act(s);
    demo.steps.push_back({s, a, std::move(obs)});
    episode.step(a, options.dt);
  }
  demo.success = env.success(demo.steps.back().state);
  if (!demo.success) demo.status = "warning: horizon reached without success";
  return demo;
}

std::vector<EnvState> replay_states(const Environment& env,
                                    const Demonstration& demo, double dt) {
  std::vector<EnvState> out;
  if (demo.steps.empty()) return out;
  EnvState s = demo.steps.front().state;
  out.push_back(s);
  for (std::size_t t = 0; t + 1 < demo.steps.size(); ++t) {
    s = env.step(s, *demo.steps[t].action, dt).state;
    out.push_back(s);
  }
  return out;
}

void put_state(ByteWriter& w, const EnvState& s) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.poses.size()));
  w.put<std::uint32_t>(s.geometry_id);
  w.put<std::uint64_t>(s.step);
  for (std::size_t i = 0; i < s.poses.size(); ++i) {
    const Pose2& p = s.poses[i];
    const Twist2& v = s.velocities[i];
    w.put_f64s(std::array{p.x, p.y, p.angle, v.vx, v.vy, v.omega});
  }
  w.put(s.grip_point.x);
  w.put(s.grip_point.y);
}

EnvState get_state(ByteReader& r) {
  EnvState s;
  const auto n = r.get<std::uint32_t>();
  if (n > 16) throw ValidationError("implausible body count");
  s.geometry_id = r.get<std::uint32_t>();
  s.step = r.get<std::uint64_t>();
  s.poses.resize(n);
  s.velocities.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::array<double, 6> v{};
    r.get_f64s(v);
    s.poses[i] = {v[0], v[1], v[2]};
    s.velocities[i] = {v[3], v[4], v[5]};
  }
  s.grip_point.x = r.get<double>();
  s.grip_point.y = r.get<double>();
  s.kind = s.geometry_id == 2 ? EnvKind::kLatchDoor : EnvKind::kBlockInsertion;
  return s;
}

void put_observation(ByteWriter& w, const Observation& o) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(o.grid_side));
  w.put_f64s(o.intensity);
  w.put_f64s(o.depth);
  w.put_f64s(std::array{o.pose.x, o.pose.y, o.pose.angle, o.velocity.vx,
                        o.velocity.vy, o.velocity.omega});
  w.put_f64s(o.ft_window);
}

Observation get_observation(ByteReader& r) {
  Observation o;
  o.grid_side = r.get<std::uint32_t>();
  if (o.grid_side == 0 || o.grid_side > 1024) {
    throw ValidationError("implausible grid side");
  }
  o.intensity.resize(o.grid_side * o.grid_side);
  o.depth.resize(o.grid_side * o.grid_side);
  r.get_f64s(o.intensity);
  r.get_f64s(o.depth);
  std::array<double, 6> pv{};
  r.get_f64s(pv);
  o.pose = {pv[0], pv[1], pv[2]};
  o.velocity = {pv[3], pv[4], pv[5]};
  r.get_f64s(o.ft_window);
  return o;
}

Bytes encode_demo(const Demonstration& demo) {
  ByteWriter w;
  w.put_magic(kDemoMagic);
  w.put<std::uint32_t>(kDemoVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(demo.kind));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(demo.horizon()));
  for (std::size_t t = 0; t < demo.steps.size(); ++t) {
    const DemoStep& step = demo.steps[t];
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t));
    put_state(w, step.state);
    w.put<std::uint8_t>(step.action ? 1 : 0);
    const Action a = step.action.value_or(Action{});
    w.put_f64s(std::array{a.vx, a.vy, a.omega});
    put_observation(w, step.obs);
    w.put<std::uint8_t>(kRecordDelimiter);
  }
  w.put_magic(kDemoFooterMagic);
  w.put<std::uint64_t>(demo.seed);
  w.put<std::uint8_t>(demo.success ? 1 : 0);
  return w.take();
}

Demonstration decode_demo(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(kDemoMagic);
  if (r.get<std::uint32_t>() != kDemoVersion) {
    throw ValidationError("unsupported demo version");
  }
  Demonstration demo;
  const auto kind = r.get<std::uint32_t>();
  if (kind != 1 && kind != 2) throw ValidationError("bad env kind in demo");
  demo.kind = static_cast<EnvKind>(kind);
  const auto horizon = r.get<std::uint32_t>();
  demo.steps.reserve(horizon + 1);
  for (std::uint32_t t = 0; t <= horizon; ++t) {
    if (r.get<std::uint32_t>() != t) throw ValidationError("demo record out of order");
    DemoStep step;
    step.state = get_state(r);
    const bool has_action = r.get<std::uint8_t>() != 0;
    std::array<double, 3> a{};
    r.get_f64s(a);
    if (has_action) step.action = Action::from_array(a);
    step.obs = get_observation(r);
    if (r.get<std::uint8_t>() != kRecordDelimiter) {
      throw ValidationError("missing demo record delimiter");
    }
    demo.steps.push_back(std::move(step));
  }
  r.expect_magic(kDemoFooterMagic);
  demo.seed = r.get<std::uint64_t>();
  demo.success = r.get<std::uint8_t>() != 0;
  if (!r.at_end()) throw ValidationError("trailing bytes in demo file");
  if (!demo.success) demo.status = "warning: horizon reached without success";
  return demo;
}

void save_demo(const std::filesystem::path& path, const Demonstration& demo) {
  write_file(path, encode_demo(demo));
}

Demonstration load_demo(const std::filesystem::path& path) {
  return decode_demo(read_file(path));
}

}  // namespace prw::physim
