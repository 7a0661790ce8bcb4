#pragma once

#include <array>
#include <vector>

#include "prw/physim/types.hpp"

namespace prw::physim {

struct ContactParams {
  double stiffness = 500.0;          // k_p, N/m
  double damping = 10.0;             // k_d, N*s/m
  double tangential_damping = 2.0;   // viscous friction, N*s/m
  double tunneling_cap = 0.1;        // m
};

// Spring-damper normal force, clamped to be non-negative.
inline double penalty_normal_force(double penetration, double penetration_rate,
                                   const ContactParams& p) {
  const double f = p.stiffness * penetration + p.damping * penetration_rate;
  return f > 0.0 ? f : 0.0;
}

struct Aabb {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(Vec2 p) const {
    return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1;
  }
  std::array<Vec2, 4> corners() const {
    return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
  }
};

struct OrientedBox {
  Pose2 pose;
  double half_x = 0.0;
  double half_y = 0.0;

  // Counter-clockwise, starting at local (-hx, -hy).
  std::array<Vec2, 4> corners() const;
  bool contains(Vec2 p) const;
};

// A penetrating point. `normal` is the unit direction of the force that acts
// on the dynamic body.
struct ContactPoint {
  Vec2 point;
  Vec2 normal;
  double penetration = 0.0;
};

// Vertex-in-box tests in both directions between a dynamic oriented box and a
// static axis-aligned box.
std::vector<ContactPoint> box_contacts(const OrientedBox& body,
                                       const Aabb& obstacle);

}  // namespace prw::physim
