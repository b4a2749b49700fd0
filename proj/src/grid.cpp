#include "tat/grid.hpp"

#include <cmath>
#include <string>

#include "tat/error.hpp"

namespace tat {

Grid2D make_grid(std::size_t nx, std::size_t ny, double x_min, double x_max, double y_min,
                 double y_max) {
  if (nx < 3 || ny < 3)
    throw InvalidArgument("grid needs at least 3 nodes per axis, got " + std::to_string(nx) +
                          "x" + std::to_string(ny));
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) ||
      !std::isfinite(y_max))
    throw InvalidArgument("grid bounds must be finite");
  if (!(x_max > x_min) || !(y_max > y_min)) throw InvalidArgument("grid bounds are empty");

  Grid2D g;
  g.nx = nx;
  g.ny = ny;
  g.x_min = x_min;
  g.x_max = x_max;
  g.y_min = y_min;
  g.y_max = y_max;
  g.dx = (x_max - x_min) / static_cast<double>(nx - 1);
  g.dy = (y_max - y_min) / static_cast<double>(ny - 1);
  return g;
}

Grid2D make_square_grid(std::size_t n, double half_width) {
  return make_grid(n, n, -half_width, half_width, -half_width, half_width);
}

std::vector<std::size_t> boundary_nodes(const Grid2D& g) {
  std::vector<std::size_t> out;
  out.reserve(2 * (g.nx - 1) + 2 * (g.ny - 1));
  for (std::size_t i = 0; i + 1 < g.nx; ++i) out.push_back(g.index(i, 0));
  for (std::size_t j = 0; j + 1 < g.ny; ++j) out.push_back(g.index(g.nx - 1, j));
  for (std::size_t i = g.nx - 1; i > 0; --i) out.push_back(g.index(i, g.ny - 1));
  for (std::size_t j = g.ny - 1; j > 0; --j) out.push_back(g.index(0, j));
  return out;
}

}  // namespace tat
