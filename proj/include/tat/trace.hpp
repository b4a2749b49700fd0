#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "tat/grid.hpp"

namespace tat {

using TraceMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Time series of wave values at the boundary nodes of a grid.
///
/// Row n holds the sample at t = n * dt; column k belongs to sensors[k].
struct BoundaryTrace {
  double dt = 0.0;
  std::vector<std::size_t> sensors;
  TraceMatrix values;

  BoundaryTrace() = default;
  BoundaryTrace(double dt_, std::vector<std::size_t> sensors_, TraceMatrix values_);

  /// Zero trace sampling every boundary node of `grid` at nt times.
  static BoundaryTrace zero(const Grid2D& grid, std::size_t nt, double dt);

  std::size_t nt() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t sensor_count() const { return sensors.size(); }
  double duration() const { return dt * static_cast<double>(nt() - 1); }
  double sup_norm() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
};

/// H^1 norm on (0, T) x boundary: trapezoidal in time and along the
/// closed sensor loop, derivatives by forward differences.
double trace_h1_norm(const BoundaryTrace& trace, const Grid2D& grid);

/// Same sensors with the time axis reversed: row n becomes row nt - 1 - n.
BoundaryTrace reversed_in_time(const BoundaryTrace& trace);

}  // namespace tat
