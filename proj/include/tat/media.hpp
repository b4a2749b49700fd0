#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "tat/field.hpp"
#include "tat/grid.hpp"

namespace tat {

/// Half side of the square domain Omega = [-1, 1]^2 the builders target.
inline constexpr double kDomainHalfWidth = 1.0;

/// Distance from (x, y) to the boundary of Omega; negative outside.
double distance_to_domain_boundary(double x, double y);

/// Cosine ramp: 0 on and outside the boundary of Omega, 1 at depth >= width.
double boundary_taper(double x, double y, double width);

/// Piecewise attenuation map with two high-attenuation disks over a
/// background that grows linearly in x.
struct AttenuationParams {
  double d1 = 9.0;
  double d2 = 4.0;
  double d3 = 1.5;
  Eigen::Vector2d center1{1.0 / 3.0, -0.5};
  double radius1_sq = 0.05;
  Eigen::Vector2d center2{-1.0 / 3.0, 1.0 / 3.0};
  double radius2_sq = 0.07;
  double taper_width = 0.1;

  /// Throws InvalidArgument on negative magnitudes, non-positive radii or a
  /// taper band wider than half of Omega.
  void validate() const;
  /// Unmollified map at a point: zero outside Omega.
  double piecewise(double x, double y) const;

  friend bool operator==(const AttenuationParams&, const AttenuationParams&) = default;
};

/// Sound speed and attenuation on the grid of Omega.
struct Medium {
  ScalarField2D c;
  ScalarField2D a;

  Medium() = default;
  /// Checks c > 0, a >= 0 and a shared grid.
  Medium(ScalarField2D c_, ScalarField2D a_);

  const Grid2D& grid() const { return c.grid(); }
  /// Copy with the attenuation multiplied by `factor` (>= 0).
  Medium with_scaled_attenuation(double factor) const;
};

/// 1 + 0.2 sin(2 pi x) + 0.1 cos(2 pi y), blended to exactly 1 across the
/// taper band and outside Omega.
ScalarField2D build_sound_speed(const Grid2D& grid, double taper_width);

/// Piecewise map mollified by a Gaussian of standard deviation two grid
/// cells, then multiplied by the boundary taper.
ScalarField2D build_attenuation(const Grid2D& grid, const AttenuationParams& params);

Medium build_medium(const Grid2D& grid, const AttenuationParams& params);

/// One ellipse of an additive intensity phantom.
struct Ellipse {
  Eigen::Vector2d center;
  double semi_x;
  double semi_y;
  double angle_deg;
  double intensity;

  bool contains(double x, double y) const;
};

/// The ten-ellipse Shepp-Logan table on [-1, 1]^2 (outer ellipse reaches
/// |y| = 0.92).
const std::vector<Ellipse>& shepp_logan_ellipses();

/// Shepp-Logan scaled so the outer ellipse touches [-0.9, 0.9]^2.
double shepp_logan_value(double x, double y);

/// Normalized, truncated Gaussian blur with standard deviation `sigma`
/// (length units); the kernel reaches at most `max_reach` from its center.
/// Values beyond the grid are treated as zero. sigma == 0 is the identity.
ScalarField2D gaussian_blur(const ScalarField2D& field, double sigma, double max_reach);

/// Scaled Shepp-Logan sampled on `grid` and blurred with `blur_radius`.
/// The kernel is cut at min(3 sigma, 0.05) so the support stays inside
/// |x| <= 0.95.
ScalarField2D build_phantom(const Grid2D& grid, double blur_radius);

/// Thermoacoustic initial data (f, -a f).
WavePair tat_initial_data(const ScalarField2D& f, const Medium& medium);

}  // namespace tat
