#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "tat/field.hpp"
#include "tat/media.hpp"

namespace tat {

/// C2 cubic B-spline interpolant of c^2 with its exact gradient.
///
/// Coefficients are prefiltered so the spline matches the nodal values;
/// the grid is extended by mirror symmetry, which gives zero normal slope
/// at the edges.
class SquaredSpeedSpline {
 public:
  explicit SquaredSpeedSpline(const ScalarField2D& c);

  /// c^2 and its gradient at a point of the grid rectangle.
  double value(const Eigen::Vector2d& x, Eigen::Vector2d* grad = nullptr) const;
  const Grid2D& grid() const { return grid_; }

 private:
  Grid2D grid_;
  Eigen::ArrayXd coeff_;  // row-major like the field
};

enum class RayStatus { Exited, Trapped };

/// Bicharacteristic of H = c^2 |xi|^2 / 2 parametrized by metric length.
struct Ray {
  std::vector<Eigen::Vector2d> positions;
  std::vector<Eigen::Vector2d> momenta;
  /// Length in the metric c^-2 dx^2 (travel time) up to the exit point.
  double length = 0.0;
  RayStatus status = RayStatus::Exited;
  /// max |H - H0| / H0 over the samples.
  double hamiltonian_drift = 0.0;
};

struct RayOptions {
  double step = 2e-3;
  /// Arc length beyond which the ray is reported as trapped.
  double max_length = 50.0;
  /// Relative Hamiltonian drift that signals a step that is too large.
  double drift_tolerance = 1e-6;
};

/// Integrates the ray from x0 in the direction of the covector xi0 (which
/// is rescaled to unit length for the metric) with classical RK4 until it
/// leaves the closed grid rectangle; the exit point is located on the last
/// step by cubic Hermite interpolation. Throws SolverError when the drift
/// exceeds the tolerance.
Ray trace_ray(const Eigen::Vector2d& x0, const Eigen::Vector2d& xi0, const SquaredSpeedSpline& speed,
              const RayOptions& opts = {});
Ray trace_ray(const Eigen::Vector2d& x0, const Eigen::Vector2d& xi0, const Medium& medium,
              double step);

struct RayRecord {
  Eigen::Vector2d start;
  double angle;  // direction of xi0, radians
  double length;
};

/// Rays from n_boundary points spaced evenly along the perimeter (starting
/// at the lower-left corner, counterclockwise), each launched in the inward
/// directions -w + 2 w k / n_angles, k = 1..n_angles-1, around the inward
/// normal (w = pi/2 on edges, pi/4 at corners).
std::vector<RayRecord> survey_rays(const Medium& medium, std::size_t n_boundary,
                                   std::size_t n_angles, double step);

/// Longest sampled geodesic in the closed domain; a lower bound for T0.
/// Throws Error if any ray is trapped.
double estimate_T0(const Medium& medium, std::size_t n_boundary, std::size_t n_angles, double step);

/// First-order fast marching for |grad d| = 1/c with d = 0 on the boundary,
/// on an n x n resampling of the medium grid.
ScalarField2D boundary_distance(const Medium& medium, std::size_t n);

/// max over nodes of boundary_distance; approximates T1.
double estimate_T1(const Medium& medium, std::size_t n_samples);

}  // namespace tat
