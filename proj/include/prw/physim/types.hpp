#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace prw::physim {

enum class EnvKind : std::uint32_t {
  kBlockInsertion = 1,
  kLatchDoor = 2,
};

std::string_view to_string(EnvKind kind);
// Accepts "block-insertion" / "latch-door"; throws ConfigError otherwise.
EnvKind parse_env_kind(std::string_view name);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// omega x r for a planar angular velocity.
inline Vec2 cross(double w, Vec2 r) { return {-w * r.y, w * r.x}; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
inline Vec2 rotate(Vec2 a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double angle = 0.0;
  friend bool operator==(const Pose2&, const Pose2&) = default;
};

struct Twist2 {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
  friend bool operator==(const Twist2&, const Twist2&) = default;
};

// Net contact force and torque felt at the gripper.
struct Wrench2 {
  double fx = 0.0;
  double fy = 0.0;
  double torque = 0.0;
  friend bool operator==(const Wrench2&, const Wrench2&) = default;
};

// Commanded end-effector velocity in normalized units; each component is
// clamped to [-1, 1] before use.
struct Action {
  static constexpr double kBound = 1.0;

  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  Action clamped() const;
  bool finite() const {
    return std::isfinite(vx) && std::isfinite(vy) && std::isfinite(omega);
  }
  std::array<double, 3> as_array() const { return {vx, vy, omega}; }
  static Action from_array(const std::array<double, 3>& a) {
    return {a[0], a[1], a[2]};
  }
  friend bool operator==(const Action&, const Action&) = default;
};

struct EnvState {
  EnvKind kind = EnvKind::kBlockInsertion;
  std::vector<Pose2> poses;
  std::vector<Twist2> velocities;
  Vec2 grip_point;
  std::uint32_t geometry_id = 0;
  std::uint64_t step = 0;

  bool finite() const;
  friend bool operator==(const EnvState&, const EnvState&) = default;
};

inline constexpr std::size_t kDefaultGridSide = 32;
inline constexpr std::size_t kWindowLength = 32;
inline constexpr std::size_t kWindowChannels = 6;
inline constexpr std::size_t kWindowSize = kWindowLength * kWindowChannels;

using WrenchWindowRows = std::array<double, kWindowSize>;

struct Observation {
  std::size_t grid_side = kDefaultGridSide;
  std::vector<double> intensity;  // grid_side^2, row-major, row 0 at the top
  std::vector<double> depth;      // same layout, 1 = nearest, 0 = background
  Pose2 pose;
  Twist2 velocity;
  WrenchWindowRows ft_window{};  // 32 rows x (fx, fy, torque, 0, 0, 0), newest last

  friend bool operator==(const Observation&, const Observation&) = default;
};

}  // namespace prw::physim
