#pragma once

#include <span>
#include <vector>

#include "prw/physim/environment.hpp"

namespace prw::physim {

struct RenderedGrids {
  std::size_t side = 0;
  std::vector<double> intensity;
  std::vector<double> depth;
};

// Orthographic rasterization. Each cell averages side-by-side subsamples;
// at every subsample the body with the largest depth value (nearest) wins.
// Background is 0 in both grids.
RenderedGrids render_bodies(std::span<const RenderBody> bodies,
                            const Camera& camera);

RenderedGrids render(const Environment& env, const EnvState& state);

// World coordinates of subsample (i, j) inside cell (row, col).
Vec2 subsample_point(const Camera& camera, std::size_t row, std::size_t col,
                     std::size_t i, std::size_t j);

// Grid cell containing a world point, or false if out of view.
bool cell_of(const Camera& camera, Vec2 p, std::size_t& row, std::size_t& col);

}  // namespace prw::physim
