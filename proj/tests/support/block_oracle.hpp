#pragma once

// Second, deliberately plain implementation of the block-insertion dynamics
// used as a test oracle. Shares only parameter structs with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "prw/physim/environment.hpp"

namespace prw::testing {

struct OracleBlock {
  double x, y, a, vx, vy, w;
};

struct OracleStep {
  OracleBlock next;
  double fx, fy, tz;
};

inline OracleStep oracle_block_step(const physim::BlockInsertionParams& p,
                                    const OracleBlock& b, double ax, double ay,
                                    double aw, double dt) {
  ax = std::clamp(ax, -1.0, 1.0);
  ay = std::clamp(ay, -1.0, 1.0);
  aw = std::clamp(aw, -1.0, 1.0);
  const double h = p.half_size;
  const double ca = std::cos(b.a), sa = std::sin(b.a);
  const double L = p.slot_center_x - p.slot_half_width;
  const double R = p.slot_center_x + p.slot_half_width;
  const double far_l = p.camera.x_min - 1.0, far_r = p.camera.x_max + 1.0;
  // {x0, y0, x1, y1}
  const std::array<std::array<double, 4>, 3> boxes{{
      {far_l, p.floor_bottom, L, p.floor_y},
      {R, p.floor_bottom, far_r, p.floor_y},
      {L, p.floor_bottom, R, p.floor_y - p.slot_depth},
  }};
  const double ex[4] = {-h, h, h, -h};
  const double ey[4] = {-h, -h, h, h};

  struct C { double px, py, nx, ny, pen; };
  std::vector<C> cs;
  for (const auto& bx : boxes) {
    for (int k = 0; k < 4; ++k) {
      const double px = b.x + ca * ex[k] - sa * ey[k];
      const double py = b.y + sa * ex[k] + ca * ey[k];
      if (!(px > bx[0] && px < bx[2] && py > bx[1] && py < bx[3])) continue;
      const double pens[4] = {bx[3] - py, px - bx[0], bx[2] - px, py - bx[1]};
      const double nxs[4] = {0, -1, 1, 0};
      const double nys[4] = {1, 0, 0, -1};
      int m = 0;
      for (int q = 1; q < 4; ++q)
        if (pens[q] < pens[m]) m = q;
      cs.push_back({px, py, nxs[m], nys[m], pens[m]});
    }
    const double ox[4] = {bx[0], bx[2], bx[2], bx[0]};
    const double oy[4] = {bx[1], bx[1], bx[3], bx[3]};
    for (int k = 0; k < 4; ++k) {
      const double dx = ox[k] - b.x, dy = oy[k] - b.y;
      const double lx = ca * dx + sa * dy;
      const double ly = -sa * dx + ca * dy;
      if (!(std::abs(lx) < h && std::abs(ly) < h)) continue;
      const double pens[4] = {h - ly, lx + h, h - lx, ly + h};
      const double fxs[4] = {0, -1, 1, 0};
      const double fys[4] = {1, 0, 0, -1};
      int m = 0;
      for (int q = 1; q < 4; ++q)
        if (pens[q] < pens[m]) m = q;
      const double nx = -(ca * fxs[m] - sa * fys[m]);
      const double ny = -(sa * fxs[m] + ca * fys[m]);
      cs.push_back({ox[k], oy[k], nx, ny, pens[m]});
    }
  }

  double fx = 0, fy = 0, tz = 0;
  for (const C& c : cs) {
    const double rx = c.px - b.x, ry = c.py - b.y;
    const double vpx = b.vx - b.w * ry, vpy = b.vy + b.w * rx;
    const double vn = vpx * c.nx + vpy * c.ny;
    const double fn = std::max(0.0, p.contact.stiffness * c.pen - p.contact.damping * vn);
    const double cfx = fn * c.nx - p.contact.tangential_damping * (vpx - vn * c.nx);
    const double cfy = fn * c.ny - p.contact.tangential_damping * (vpy - vn * c.ny);
    fx += cfx;
    fy += cfy;
    tz += rx * cfy - ry * cfx;
  }
  const auto& d = p.drive;
  const double Fx = fx + d.linear_gain * (d.max_speed * ax - b.vx);
  const double Fy = fy + d.linear_gain * (d.max_speed * ay - b.vy);
  const double T = tz + d.angular_gain * (d.max_rate * aw - b.w);
  const double I = p.mass * 8.0 * h * h / 12.0;
  OracleStep out{};
  out.next.vx = b.vx + dt * Fx / p.mass;
  out.next.vy = b.vy + dt * Fy / p.mass;
  out.next.w = b.w + dt * T / I;
  out.next.x = b.x + dt * out.next.vx;
  out.next.y = b.y + dt * out.next.vy;
  out.next.a = b.a + dt * out.next.w;
  out.fx = fx;
  out.fy = fy;
  out.tz = tz;
  return out;
}

}  // namespace prw::testing
