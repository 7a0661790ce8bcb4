#include "prw/physim/types.hpp"

#include <algorithm>

#include "prw/common/error.hpp"

namespace prw::physim {

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::kBlockInsertion:
      return "block-insertion";
    case EnvKind::kLatchDoor:
      return "latch-door";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view name) {
  if (name == "block-insertion") return EnvKind::kBlockInsertion;
  if (name == "latch-door") return EnvKind::kLatchDoor;
  throw ConfigError("unknown env kind '" + std::string(name) + "'");
}

Action Action::clamped() const {
  auto c = [](double v) { return std::clamp(v, -kBound, kBound); };
  return {c(vx), c(vy), c(omega)};
}

bool EnvState::finite() const {
  for (const auto& p : poses) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.angle))
      return false;
  }
  for (const auto& v : velocities) {
    if (!std::isfinite(v.vx) || !std::isfinite(v.vy) || !std::isfinite(v.omega))
      return false;
  }
  return std::isfinite(grip_point.x) && std::isfinite(grip_point.y);
}

}  // namespace prw::physim
