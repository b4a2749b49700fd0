#include "tat/raygeo.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>

namespace tat {
namespace {

using Vec2 = Eigen::Vector2d;

// Solves (c[k-1] + 4 c[k] + c[k+1]) / 6 = f[k] with mirrored ends, in place,
// on `n` values spaced `stride` apart.
void prefilter_line(double* f, std::size_t n, std::size_t stride) {
  std::vector<double> sup(n), rhs(n);
  // Rows 0 and n-1 have doubled off-diagonals from the mirror.
  double diag = 4.0 / 6.0;
  sup[0] = (2.0 / 6.0) / diag;
  rhs[0] = f[0] / diag;
  for (std::size_t k = 1; k < n; ++k) {
    const double lower = (k + 1 == n) ? 2.0 / 6.0 : 1.0 / 6.0;
    diag = 4.0 / 6.0 - lower * sup[k - 1];
    sup[k] = (1.0 / 6.0) / diag;
    rhs[k] = (f[k * stride] - lower * rhs[k - 1]) / diag;
  }
  f[(n - 1) * stride] = rhs[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) f[k * stride] = rhs[k] - sup[k] * f[(k + 1) * stride];
}

std::size_t mirror(long k, std::size_t n) {
  const long last = static_cast<long>(n) - 1;
  if (k < 0) k = -k;
  if (k > last) k = 2 * last - k;
  return static_cast<std::size_t>(std::clamp(k, 0L, last));
}

void bspline_weights(double t, double w[4], double d[4]) {
  const double s = 1.0 - t;
  w[0] = s * s * s / 6.0;
  w[1] = (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0;
  w[2] = (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0;
  w[3] = t * t * t / 6.0;
  d[0] = -0.5 * s * s;
  d[1] = 0.5 * (3.0 * t * t - 4.0 * t);
  d[2] = 0.5 * (-3.0 * t * t + 2.0 * t + 1.0);
  d[3] = 0.5 * t * t;
}

bool inside(const Grid2D& g, const Vec2& x, double tol = 1e-12) {
  return x.x() >= g.x_min - tol && x.x() <= g.x_max + tol && x.y() >= g.y_min - tol &&
         x.y() <= g.y_max + tol;
}

// Largest excursion beyond the rectangle (<= 0 inside).
double outside_by(const Grid2D& g, const Vec2& x) {
  return std::max({g.x_min - x.x(), x.x() - g.x_max, g.y_min - x.y(), x.y() - g.y_max});
}

struct PhasePoint {
  Vec2 x;
  Vec2 xi;
};

PhasePoint flow(const SquaredSpeedSpline& speed, const PhasePoint& p) {
  Vec2 grad;
  const double c2 = speed.value(p.x, &grad);
  return {c2 * p.xi, -0.5 * p.xi.squaredNorm() * grad};
}

}  // namespace

SquaredSpeedSpline::SquaredSpeedSpline(const ScalarField2D& c)
    : grid_(c.grid()), coeff_(c.values().square()) {
  double* data = coeff_.data();
  for (std::size_t j = 0; j < grid_.ny; ++j) prefilter_line(data + j * grid_.nx, grid_.nx, 1);
  for (std::size_t i = 0; i < grid_.nx; ++i) prefilter_line(data + i, grid_.ny, grid_.nx);
}

double SquaredSpeedSpline::value(const Vec2& x, Vec2* grad) const {
  const double fx = std::clamp((x.x() - grid_.x_min) / grid_.dx, 0.0, static_cast<double>(grid_.nx - 1));
  const double fy = std::clamp((x.y() - grid_.y_min) / grid_.dy, 0.0, static_cast<double>(grid_.ny - 1));
  const long ix = std::min(static_cast<long>(fx), static_cast<long>(grid_.nx) - 2);
  const long iy = std::min(static_cast<long>(fy), static_cast<long>(grid_.ny) - 2);
  double wx[4], dwx[4], wy[4], dwy[4];
  bspline_weights(fx - static_cast<double>(ix), wx, dwx);
  bspline_weights(fy - static_cast<double>(iy), wy, dwy);
  double v = 0.0, gx = 0.0, gy = 0.0;
  for (int b = 0; b < 4; ++b) {
    const std::size_t row = mirror(iy - 1 + b, grid_.ny) * grid_.nx;
    double sv = 0.0, sd = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double cval = coeff_[static_cast<Eigen::Index>(row + mirror(ix - 1 + a, grid_.nx))];
      sv += wx[a] * cval;
      sd += dwx[a] * cval;
    }
    v += wy[b] * sv;
    gx += wy[b] * sd;
    gy += dwy[b] * sv;
  }
  if (grad) *grad = Vec2(gx / grid_.dx, gy / grid_.dy);
  return v;
}

Ray trace_ray(const Vec2& x0, const Vec2& xi0, const SquaredSpeedSpline& speed,
              const RayOptions& opts) {
  const Grid2D& g = speed.grid();
  if (!inside(g, x0)) throw InvalidArgument("ray must start in the closed domain");
  if (!(xi0.norm() > 0.0)) throw InvalidArgument("ray covector must be nonzero");
  if (!(opts.step > 0.0)) throw InvalidArgument("ray step must be positive");

  const double c2_start = speed.value(x0);
  PhasePoint p{x0, xi0 / (std::sqrt(c2_start) * xi0.norm())};  // H = 1/2
  const double h0 = 0.5;
  const double h = opts.step;

  Ray ray;
  ray.positions.push_back(p.x);
  ray.momenta.push_back(p.xi);
  double s = 0.0;
  while (true) {
    const PhasePoint k1 = flow(speed, p);
    const PhasePoint k2 = flow(speed, {p.x + 0.5 * h * k1.x, p.xi + 0.5 * h * k1.xi});
    const PhasePoint k3 = flow(speed, {p.x + 0.5 * h * k2.x, p.xi + 0.5 * h * k2.xi});
    const PhasePoint k4 = flow(speed, {p.x + h * k3.x, p.xi + h * k3.xi});
    const PhasePoint q{p.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                       p.xi + h / 6.0 * (k1.xi + 2.0 * k2.xi + 2.0 * k3.xi + k4.xi)};

    if (!inside(g, q.x)) {
      // Hermite cubic through (p, k1.x) and (q, velocity at q), bisected for
      // the crossing of the boundary.
      const Vec2 vq = speed.value(q.x) * q.xi;
      auto at = [&](double t) {
        const double t2 = t * t, t3 = t2 * t;
        return ((2 * t3 - 3 * t2 + 1) * p.x + (t3 - 2 * t2 + t) * h * k1.x +
                (-2 * t3 + 3 * t2) * q.x + (t3 - t2) * h * vq)
            .eval();
      };
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (outside_by(g, at(mid)) > 0.0 ? hi : lo) = mid;
      }
      s += lo * h;
      ray.positions.push_back(at(lo));
      ray.momenta.push_back(p.xi + lo * (q.xi - p.xi));
      break;
    }
    p = q;
    s += h;
    const double drift = std::abs(0.5 * speed.value(p.x) * p.xi.squaredNorm() - h0) / h0;
    ray.hamiltonian_drift = std::max(ray.hamiltonian_drift, drift);
    if (drift > opts.drift_tolerance)
      throw SolverError("ray step too large: Hamiltonian drift " + std::to_string(drift));
    ray.positions.push_back(p.x);
    ray.momenta.push_back(p.xi);
    if (s > opts.max_length) {
      ray.status = RayStatus::Trapped;
      break;
    }
  }
  ray.length = s;
  return ray;
}

Ray trace_ray(const Vec2& x0, const Vec2& xi0, const Medium& medium, double step) {
  RayOptions opts;
  opts.step = step;
  return trace_ray(x0, xi0, SquaredSpeedSpline(medium.c), opts);
}

std::vector<RayRecord> survey_rays(const Medium& medium, std::size_t n_boundary,
                                   std::size_t n_angles, double step) {
  if (n_boundary < 8 || n_angles < 8) throw InvalidArgument("ray survey needs >= 8 samples per axis");
  const Grid2D& g = medium.grid();
  const SquaredSpeedSpline speed(medium.c);
  RayOptions opts;
  opts.step = step;

  const double lx = g.x_max - g.x_min, ly = g.y_max - g.y_min;
  const double perimeter = 2.0 * (lx + ly);
  const double corner_tol = 1e-12 * perimeter;
  std::vector<RayRecord> out;
  for (std::size_t b = 0; b < n_boundary; ++b) {
    const double arc = perimeter * static_cast<double>(b) / static_cast<double>(n_boundary);
    Vec2 x;
    double normal;  // inward normal angle
    double half = std::numbers::pi / 2.0;
    if (arc < lx) {
      x = {g.x_min + arc, g.y_min};
      normal = std::numbers::pi / 2.0;
    } else if (arc < lx + ly) {
      x = {g.x_max, g.y_min + (arc - lx)};
      normal = std::numbers::pi;
    } else if (arc < 2.0 * lx + ly) {
      x = {g.x_max - (arc - lx - ly), g.y_max};
      normal = -std::numbers::pi / 2.0;
    } else {
      x = {g.x_min, g.y_max - (arc - 2.0 * lx - ly)};
      normal = 0.0;
    }
    const std::array<double, 5> corner_arcs{0.0, lx, lx + ly, 2.0 * lx + ly, perimeter};
    for (double ca : corner_arcs)
      if (std::abs(arc - ca) < corner_tol) {
        // Corner: bisect the two adjacent inward normals.
        const Vec2 centre((g.x_min + g.x_max) / 2.0, (g.y_min + g.y_max) / 2.0);
        const Vec2 diag((centre.x() > x.x()) ? 1.0 : -1.0, (centre.y() > x.y()) ? 1.0 : -1.0);
        normal = std::atan2(diag.y(), diag.x());
        half = std::numbers::pi / 4.0;
      }
    for (std::size_t k = 1; k < n_angles; ++k) {
      const double angle =
          normal - half + 2.0 * half * static_cast<double>(k) / static_cast<double>(n_angles);
      const Ray ray = trace_ray(x, Vec2(std::cos(angle), std::sin(angle)), speed, opts);
      if (ray.status == RayStatus::Trapped)
        throw Error("trapped ray from (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                    "): non-trapping hypothesis violated");
      out.push_back({x, angle, ray.length});
    }
  }
  return out;
}

double estimate_T0(const Medium& medium, std::size_t n_boundary, std::size_t n_angles, double step) {
  double best = 0.0;
  for (const auto& r : survey_rays(medium, n_boundary, n_angles, step)) best = std::max(best, r.length);
  return best;
}

ScalarField2D boundary_distance(const Medium& medium, std::size_t n) {
  if (n < 16) throw InvalidArgument("boundary distance needs >= 16 samples per axis");
  const Grid2D& mg = medium.grid();
  const Grid2D g = make_grid(n, n, mg.x_min, mg.x_max, mg.y_min, mg.y_max);
  const SquaredSpeedSpline speed(medium.c);
  std::vector<double> slowness(g.size());
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      slowness[g.index(i, j)] = 1.0 / std::sqrt(speed.value(Vec2(g.x(i), g.y(j))));

  constexpr double inf = std::numeric_limits<double>::infinity();
  enum class State : unsigned char { Far, Trial, Known };
  std::vector<double> d(g.size(), inf);
  std::vector<State> state(g.size(), State::Far);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t k : boundary_nodes(g)) {
    d[k] = 0.0;
    state[k] = State::Known;
  }

  auto known = [&](std::size_t k) { return state[k] == State::Known ? d[k] : inf; };
  auto update = [&](std::size_t i, std::size_t j) {
    const std::size_t k = g.index(i, j);
    if (state[k] == State::Known) return;
    const double a = std::min(i > 0 ? known(k - 1) : inf, i + 1 < n ? known(k + 1) : inf);
    const double b = std::min(j > 0 ? known(k - n) : inf, j + 1 < n ? known(k + n) : inf);
    const double s = slowness[k];
    double t = std::min(a + s * g.dx, b + s * g.dy);
    if (std::isfinite(a) && std::isfinite(b)) {
      // ((t - a)/dx)^2 + ((t - b)/dy)^2 = s^2
      const double wx = 1.0 / (g.dx * g.dx), wy = 1.0 / (g.dy * g.dy);
      const double qa = wx + wy;
      const double qb = -2.0 * (a * wx + b * wy);
      const double qc = a * a * wx + b * b * wy - s * s;
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double two = (-qb + std::sqrt(disc)) / (2.0 * qa);
        if (two >= std::max(a, b)) t = std::min(t, two);
      }
    }
    if (t < d[k]) {
      d[k] = t;
      state[k] = State::Trial;
      heap.emplace(t, k);
    }
  };
  auto relax_neighbours = [&](std::size_t k) {
    const std::size_t i = k % n, j = k / n;
    if (i > 0) update(i - 1, j);
    if (i + 1 < n) update(i + 1, j);
    if (j > 0) update(i, j - 1);
    if (j + 1 < n) update(i, j + 1);
  };
  for (std::size_t k : boundary_nodes(g)) relax_neighbours(k);
  while (!heap.empty()) {
    const auto [t, k] = heap.top();
    heap.pop();
    if (state[k] == State::Known || t > d[k]) continue;
    state[k] = State::Known;
    relax_neighbours(k);
  }
  ScalarField2D::Values v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) v[static_cast<Eigen::Index>(k)] = d[k];
  return ScalarField2D(g, std::move(v));
}

double estimate_T1(const Medium& medium, std::size_t n_samples) {
  return boundary_distance(medium, n_samples).max();
}

}  // namespace tat
