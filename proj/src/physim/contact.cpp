#include "prw/physim/contact.hpp"

#include <cmath>

namespace prw::physim {

std::array<Vec2, 4> OrientedBox::corners() const {
  const std::array<Vec2, 4> local{
      {{-half_x, -half_y}, {half_x, -half_y}, {half_x, half_y}, {-half_x, half_y}}};
  std::array<Vec2, 4> out{};
  const Vec2 c{pose.x, pose.y};
  for (std::size_t i = 0; i < 4; ++i) out[i] = c + rotate(local[i], pose.angle);
  return out;
}

bool OrientedBox::contains(Vec2 p) const {
  const Vec2 local = rotate(p - Vec2{pose.x, pose.y}, -pose.angle);
  return std::abs(local.x) < half_x && std::abs(local.y) < half_y;
}

std::vector<ContactPoint> box_contacts(const OrientedBox& body,
                                       const Aabb& obstacle) {
  std::vector<ContactPoint> out;

  // Body corners inside the obstacle: push out through the nearest face.
  for (const Vec2& v : body.corners()) {
    if (!obstacle.contains(v)) continue;
    const double d_left = v.x - obstacle.x0;
    const double d_right = obstacle.x1 - v.x;
    const double d_bottom = v.y - obstacle.y0;
    const double d_top = obstacle.y1 - v.y;
    ContactPoint c{v, {0.0, 1.0}, d_top};
    if (d_left < c.penetration) c = {v, {-1.0, 0.0}, d_left};
    if (d_right < c.penetration) c = {v, {1.0, 0.0}, d_right};
    if (d_bottom < c.penetration) c = {v, {0.0, -1.0}, d_bottom};
    out.push_back(c);
  }

  // Obstacle corners inside the body: push the body away from the corner.
  const Vec2 center{body.pose.x, body.pose.y};
  for (const Vec2& v : obstacle.corners()) {
    if (!body.contains(v)) continue;
    const Vec2 local = rotate(v - center, -body.pose.angle);
    const double d_left = local.x + body.half_x;
    const double d_right = body.half_x - local.x;
    const double d_bottom = local.y + body.half_y;
    const double d_top = body.half_y - local.y;
    // Outward normal of the nearest body face, in body coordinates.
    Vec2 face{0.0, 1.0};
    double pen = d_top;
    if (d_left < pen) { face = {-1.0, 0.0}; pen = d_left; }
    if (d_right < pen) { face = {1.0, 0.0}; pen = d_right; }
    if (d_bottom < pen) { face = {0.0, -1.0}; pen = d_bottom; }
    const Vec2 n_world = rotate(face, body.pose.angle);
    out.push_back({v, -1.0 * n_world, pen});
  }
  return out;
}

}  // namespace prw::physim
