#include "prw/physim/render.hpp"

#include <algorithm>
#include <cmath>

namespace prw::physim {
namespace {

struct PreparedBody {
  const RenderBody* body;
  double x_min, x_max, y_min, y_max;
};

// Strictly inside a convex counter-clockwise polygon.
bool inside_convex(const std::vector<Vec2>& poly, Vec2 p) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    if (cross(b - a, p - a) <= 0.0) return false;
  }
  return true;
}

}  // namespace

Vec2 subsample_point(const Camera& camera, std::size_t row, std::size_t col,
                     std::size_t i, std::size_t j) {
  const double cw = (camera.x_max - camera.x_min) / static_cast<double>(camera.side);
  const double ch = (camera.y_max - camera.y_min) / static_cast<double>(camera.side);
  const double s = static_cast<double>(camera.supersample);
  return {camera.x_min + (static_cast<double>(col) + (static_cast<double>(i) + 0.5) / s) * cw,
          camera.y_max - (static_cast<double>(row) + (static_cast<double>(j) + 0.5) / s) * ch};
}

bool cell_of(const Camera& camera, Vec2 p, std::size_t& row, std::size_t& col) {
  const double fx = (p.x - camera.x_min) / (camera.x_max - camera.x_min);
  const double fy = (camera.y_max - p.y) / (camera.y_max - camera.y_min);
  if (!(fx >= 0.0 && fx < 1.0 && fy >= 0.0 && fy < 1.0)) return false;
  col = static_cast<std::size_t>(fx * static_cast<double>(camera.side));
  row = static_cast<std::size_t>(fy * static_cast<double>(camera.side));
  return true;
}

RenderedGrids render_bodies(std::span<const RenderBody> bodies,
                            const Camera& camera) {
  const std::size_t n = camera.side;
  const std::size_t ss = std::max<std::size_t>(camera.supersample, 1);
  RenderedGrids out{n, std::vector<double>(n * n, 0.0),
                    std::vector<double>(n * n, 0.0)};

  std::vector<PreparedBody> prepared;
  for (const RenderBody& b : bodies) {
    if (b.polygon.empty()) continue;
    PreparedBody pb{&b, b.polygon[0].x, b.polygon[0].x, b.polygon[0].y,
                    b.polygon[0].y};
    for (const Vec2& v : b.polygon) {
      pb.x_min = std::min(pb.x_min, v.x);
      pb.x_max = std::max(pb.x_max, v.x);
      pb.y_min = std::min(pb.y_min, v.y);
      pb.y_max = std::max(pb.y_max, v.y);
    }
    prepared.push_back(pb);
  }

  const double inv = 1.0 / static_cast<double>(ss * ss);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double sum_i = 0.0, sum_d = 0.0;
      for (std::size_t j = 0; j < ss; ++j) {
        for (std::size_t i = 0; i < ss; ++i) {
          const Vec2 p = subsample_point(camera, r, c, i, j);
          const RenderBody* best = nullptr;
          for (const PreparedBody& pb : prepared) {
            if (p.x < pb.x_min || p.x > pb.x_max || p.y < pb.y_min ||
                p.y > pb.y_max) {
              continue;
            }
            if (best != nullptr && pb.body->depth <= best->depth) continue;
            if (inside_convex(pb.body->polygon, p)) best = pb.body;
          }
          if (best != nullptr) {
            sum_i += best->intensity;
            sum_d += best->depth;
          }
        }
      }
      out.intensity[r * n + c] = std::clamp(sum_i * inv, 0.0, 1.0);
      out.depth[r * n + c] = std::clamp(sum_d * inv, 0.0, 1.0);
    }
  }
  return out;
}

RenderedGrids render(const Environment& env, const EnvState& state) {
  const auto bodies = env.render_bodies(state);
  return render_bodies(bodies, env.camera());
}

}  // namespace prw::physim
