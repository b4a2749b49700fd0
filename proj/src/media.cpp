#include "tat/media.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tat {

double distance_to_domain_boundary(double x, double y) {
  return kDomainHalfWidth - std::max(std::abs(x), std::abs(y));
}

double boundary_taper(double x, double y, double width) {
  const double d = distance_to_domain_boundary(x, y);
  if (d <= 0.0) return 0.0;
  if (d >= width) return 1.0;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * d / width));
}

void AttenuationParams::validate() const {
  if (!(d1 >= 0.0) || !(d2 >= 0.0) || !(d3 >= 0.0))
    throw InvalidArgument("attenuation magnitudes must be nonnegative");
  if (!(radius1_sq > 0.0) || !(radius2_sq > 0.0))
    throw InvalidArgument("disk radii must be positive");
  if (!center1.allFinite() || !center2.allFinite())
    throw InvalidArgument("disk centers must be finite");
  if (!(taper_width > 0.0) || !(taper_width < kDomainHalfWidth))
    throw InvalidArgument("taper width must lie in (0, " + std::to_string(kDomainHalfWidth) + ")");
}

double AttenuationParams::piecewise(double x, double y) const {
  if (distance_to_domain_boundary(x, y) < 0.0) return 0.0;
  const Eigen::Vector2d p(x, y);
  if ((p - center1).squaredNorm() < radius1_sq) return d1;
  if ((p - center2).squaredNorm() < radius2_sq) return d2;
  return d3 * (1.0 + x);
}

Medium::Medium(ScalarField2D c_, ScalarField2D a_) : c(std::move(c_)), a(std::move(a_)) {
  if (!(c.grid() == a.grid())) throw InvalidArgument("sound speed and attenuation grids differ");
  if (!(c.min() > 0.0)) throw InvalidArgument("sound speed must be positive");
  if (!(a.min() >= 0.0)) throw InvalidArgument("attenuation must be nonnegative");
}

Medium Medium::with_scaled_attenuation(double factor) const {
  if (!(factor >= 0.0)) throw InvalidArgument("attenuation scale must be nonnegative");
  return Medium(c, factor * a);
}

ScalarField2D build_sound_speed(const Grid2D& grid, double taper_width) {
  if (!(taper_width > 0.0) || !(taper_width < kDomainHalfWidth))
    throw InvalidArgument("taper width must lie in (0, 1)");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return ScalarField2D::sample(grid, [&](double x, double y) {
    const double tau = boundary_taper(x, y, taper_width);
    if (tau == 0.0) return 1.0;
    return 1.0 + tau * (0.2 * std::sin(two_pi * x) + 0.1 * std::cos(two_pi * y));
  });
}

ScalarField2D gaussian_blur(const ScalarField2D& field, double sigma, double max_reach) {
  if (!(sigma >= 0.0)) throw InvalidArgument("blur sigma must be nonnegative");
  if (sigma == 0.0) return field;
  const Grid2D& g = field.grid();
  // Disk-shaped support: a separable cut would reach sqrt(2) further along
  // the diagonals.
  const double reach = std::min(3.0 * sigma, max_reach);
  const auto hx = static_cast<long>(std::floor(reach / g.dx));
  const auto hy = static_cast<long>(std::floor(reach / g.dy));
  struct Tap {
    long di, dj;
    double w;
  };
  std::vector<Tap> taps;
  double total = 0.0;
  for (long q = -hy; q <= hy; ++q)
    for (long p = -hx; p <= hx; ++p) {
      const double rx = static_cast<double>(p) * g.dx, ry = static_cast<double>(q) * g.dy;
      const double r2 = rx * rx + ry * ry;
      if (r2 > reach * reach * (1.0 + 1e-12)) continue;
      const double w = std::exp(-0.5 * r2 / (sigma * sigma));
      taps.push_back({p, q, w});
      total += w;
    }
  for (Tap& t : taps) t.w /= total;

  const long nx = static_cast<long>(g.nx), ny = static_cast<long>(g.ny);
  const double* in = field.values().data();
  ScalarField2D::Values out = ScalarField2D::Values::Zero(field.values().size());
  for (long j = 0; j < ny; ++j)
    for (long i = 0; i < nx; ++i) {
      double s = 0.0;
      for (const Tap& t : taps) {
        const long ii = i + t.di, jj = j + t.dj;
        if (ii >= 0 && ii < nx && jj >= 0 && jj < ny) s += t.w * in[jj * nx + ii];
      }
      out[j * nx + i] = s;
    }
  return ScalarField2D(g, std::move(out));
}

ScalarField2D build_attenuation(const Grid2D& grid, const AttenuationParams& params) {
  params.validate();
  const auto raw = ScalarField2D::sample(
      grid, [&](double x, double y) { return params.piecewise(x, y); });
  // Mollifier width is fixed in grid cells; the cutoff is generous enough
  // that the discrete kernel is indistinguishable from the full Gaussian.
  const double sigma = 2.0 * std::min(grid.dx, grid.dy);
  const auto smooth = gaussian_blur(raw, sigma, 3.0 * sigma);
  const auto taper = ScalarField2D::sample(
      grid, [&](double x, double y) { return boundary_taper(x, y, params.taper_width); });
  return smooth * taper;
}

Medium build_medium(const Grid2D& grid, const AttenuationParams& params) {
  return Medium(build_sound_speed(grid, params.taper_width), build_attenuation(grid, params));
}

bool Ellipse::contains(double x, double y) const {
  const double th = angle_deg * std::numbers::pi / 180.0;
  const double px = x - center.x();
  const double py = y - center.y();
  const double u = (px * std::cos(th) + py * std::sin(th)) / semi_x;
  const double v = (-px * std::sin(th) + py * std::cos(th)) / semi_y;
  return u * u + v * v <= 1.0;
}

const std::vector<Ellipse>& shepp_logan_ellipses() {
  static const std::vector<Ellipse> table{
      {{0.0, 0.0}, 0.69, 0.92, 0.0, 2.0},
      {{0.0, -0.0184}, 0.6624, 0.874, 0.0, -0.98},
      {{0.22, 0.0}, 0.11, 0.31, -18.0, -0.02},
      {{-0.22, 0.0}, 0.16, 0.41, 18.0, -0.02},
      {{0.0, 0.35}, 0.21, 0.25, 0.0, 0.01},
      {{0.0, 0.1}, 0.046, 0.046, 0.0, 0.01},
      {{0.0, -0.1}, 0.046, 0.046, 0.0, 0.01},
      {{-0.08, -0.605}, 0.046, 0.023, 0.0, 0.01},
      {{0.0, -0.605}, 0.023, 0.023, 0.0, 0.01},
      {{0.06, -0.605}, 0.023, 0.046, 0.0, 0.01},
  };
  return table;
}

double shepp_logan_value(double x, double y) {
  constexpr double scale = 0.9 / 0.92;
  const double xs = x / scale;
  const double ys = y / scale;
  double v = 0.0;
  for (const auto& e : shepp_logan_ellipses())
    if (e.contains(xs, ys)) v += e.intensity;
  return v;
}

ScalarField2D build_phantom(const Grid2D& grid, double blur_radius) {
  if (!(blur_radius >= 0.0)) throw InvalidArgument("blur radius must be nonnegative");
  const auto sharp = ScalarField2D::sample(grid, shepp_logan_value);
  return gaussian_blur(sharp, blur_radius, 0.05);
}

WavePair tat_initial_data(const ScalarField2D& f, const Medium& medium) {
  return {f, -(medium.a * f)};
}

}  // namespace tat
