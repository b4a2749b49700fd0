#pragma once

#include <cstddef>
#include <vector>

namespace tat {

/// Uniform node grid on [x_min, x_max] x [y_min, y_max].
///
/// Nodes are ordered row-major with y as the slow index: node (i, j) has
/// linear index j * nx + i and sits at (x_min + i * dx, y_min + j * dy).
struct Grid2D {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  double dx = 0.0;
  double dy = 0.0;

  std::size_t size() const { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
  double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
  double y(std::size_t j) const { return y_min + static_cast<double>(j) * dy; }
  bool on_boundary(std::size_t i, std::size_t j) const {
    return i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
  }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Validates counts and bounds and derives the spacings.
Grid2D make_grid(std::size_t nx, std::size_t ny, double x_min, double x_max,
                 double y_min, double y_max);

/// Square grid with n nodes per side on [-half_width, half_width]^2.
Grid2D make_square_grid(std::size_t n, double half_width = 1.0);

/// Closed rectangle of node indices [i0, i1] x [j0, j1] of some grid.
struct Region {
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  std::size_t j0 = 0;
  std::size_t j1 = 0;

  static Region whole(const Grid2D& g) { return {0, g.nx - 1, 0, g.ny - 1}; }
  bool contains(std::size_t i, std::size_t j) const {
    return i >= i0 && i <= i1 && j >= j0 && j <= j1;
  }
  friend bool operator==(const Region&, const Region&) = default;
};

/// Nodes of the grid boundary, counterclockwise from (x_min, y_min), each
/// corner listed once. Size is 2 (nx - 1) + 2 (ny - 1).
std::vector<std::size_t> boundary_nodes(const Grid2D& grid);

}  // namespace tat
