#include "tat/wave.hpp"

#include <Eigen/SparseCore>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <string>
#include <utility>

#include "tat/io.hpp"

namespace tat {
namespace {

using Vec = Eigen::VectorXd;

void check_region(const Grid2D& g, const Region& r) {
  if (r.i0 > r.i1 || r.j0 > r.j1 || r.i1 >= g.nx || r.j1 >= g.ny)
    throw InvalidArgument("energy region lies outside the grid");
}

// Trapezoidal energy over a node rectangle. vel(k) returns u_t at node k.
// Gradients are centered where both neighbours exist, one-sided otherwise.
template <typename VelFn>
double region_energy(const double* u, VelFn&& vel, const double* inv_c2, std::size_t nx,
                     std::size_t ny, double dx, double dy, const Region& r) {
  const double wx_edge = r.i0 == r.i1 ? dx : 0.5 * dx;
  const double wy_edge = r.j0 == r.j1 ? dy : 0.5 * dy;
  double total = 0.0;
  for (std::size_t j = r.j0; j <= r.j1; ++j) {
    const double wy = (j == r.j0 || j == r.j1) ? wy_edge : dy;
    double row = 0.0;
    for (std::size_t i = r.i0; i <= r.i1; ++i) {
      const std::size_t k = j * nx + i;
      double gx, gy;
      if (i == 0)
        gx = (u[k + 1] - u[k]) / dx;
      else if (i + 1 == nx)
        gx = (u[k] - u[k - 1]) / dx;
      else
        gx = (u[k + 1] - u[k - 1]) / (2.0 * dx);
      if (j == 0)
        gy = (u[k + nx] - u[k]) / dy;
      else if (j + 1 == ny)
        gy = (u[k] - u[k - nx]) / dy;
      else
        gy = (u[k + nx] - u[k - nx]) / (2.0 * dy);
      const double vt = vel(k);
      const double wx = (i == r.i0 || i == r.i1) ? wx_edge : dx;
      row += wx * (gx * gx + gy * gy + inv_c2[k] * vt * vt);
    }
    total += wy * row;
  }
  return total;
}

inline double laplacian(const double* u, std::size_t k, std::size_t nx, double idx2, double idy2) {
  return (u[k - 1] - 2.0 * u[k] + u[k + 1]) * idx2 + (u[k - nx] - 2.0 * u[k] + u[k + nx]) * idy2;
}

void check_finite(const Vec& v, const char* what, std::size_t step) {
  if (!v.allFinite()) throw InstabilityError(std::string(what) + " produced non-finite values", step);
}

void check_leapfrog_bound(double c_max, double dt, const Grid2D& g) {
  const double courant = c_max * dt * std::sqrt(1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy));
  if (courant > 1.0 + 1e-12)
    throw InvalidArgument("CFL violation: c dt sqrt(1/dx^2 + 1/dy^2) = " + std::to_string(courant));
}

ScalarField2D extract(const Vec& v, const Grid2D& box, const Grid2D& inner, std::size_t ox,
                      std::size_t oy) {
  ScalarField2D::Values out(static_cast<Eigen::Index>(inner.size()));
  for (std::size_t j = 0; j < inner.ny; ++j)
    for (std::size_t i = 0; i < inner.nx; ++i)
      out[static_cast<Eigen::Index>(inner.index(i, j))] =
          v[static_cast<Eigen::Index>(box.index(i + ox, j + oy))];
  return ScalarField2D(inner, std::move(out));
}

// Cubic absorption profile; xi is the depth into the layer.
double pml_profile(double xi, double width, double strength) {
  if (xi <= 0.0 || width <= 0.0) return 0.0;
  const double r = xi / width;
  return strength * r * r * r;
}

}  // namespace

void SolveConfig::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("final time must be positive");
  if (!(cfl > 0.0) || !(cfl < 1.0)) throw InvalidArgument("cfl must lie in (0, 1)");
  if (pml_strength && !(*pml_strength >= 0.0) )
    throw InvalidArgument("pml strength must be nonnegative");
  if (!(box_margin >= 0.0) || !std::isfinite(box_margin))
    throw InvalidArgument("box margin must be nonnegative");
}

TimeAxis time_axis(const Medium& medium, const SolveConfig& cfg) {
  cfg.validate();
  const Grid2D& g = medium.grid();
  const double c_max = std::max(medium.c.max(), 1.0);
  const double dt_max = cfg.cfl * std::min(g.dx, g.dy) / c_max;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.T / dt_max - 1e-9)));
  TimeAxis axis{cfg.T / static_cast<double>(steps), steps};
  check_leapfrog_bound(c_max, axis.dt, g);
  return axis;
}

double default_pml_strength(double layer_width) {
  // R = exp(-s L / 2) for the cubic profile at unit speed.
  return 2.0 * std::log(1e4) / layer_width;
}

ForwardResult forward_solve(const WavePair& initial, const Medium& medium, const SolveConfig& cfg) {
  const Grid2D& og = medium.grid();
  if (!(initial.grid() == og)) throw InvalidArgument("initial data and medium grids differ");
  const TimeAxis axis = time_axis(medium, cfg);
  const double dt = axis.dt;

  const std::size_t p = cfg.pml_cells;
  const auto margin_x = static_cast<std::size_t>(std::ceil(cfg.box_margin / og.dx - 1e-9));
  const auto margin_y = static_cast<std::size_t>(std::ceil(cfg.box_margin / og.dy - 1e-9));
  const std::size_t ox = margin_x + p + 1;  // +1 leaves room for the outer wall
  const std::size_t oy = margin_y + p + 1;
  const Grid2D box = make_grid(og.nx + 2 * ox, og.ny + 2 * oy, og.x_min - ox * og.dx,
                               og.x_max + ox * og.dx, og.y_min - oy * og.dy, og.y_max + oy * og.dy);
  const std::size_t nx = box.nx, ny = box.ny, n_nodes = box.size();
  const double dx = og.dx, dy = og.dy;
  const double idx2 = 1.0 / (dx * dx), idy2 = 1.0 / (dy * dy);
  const Region omega{ox, ox + og.nx - 1, oy, oy + og.ny - 1};

  // Layer occupies nodes 0..p (0 is the Dirichlet wall) on each side.
  const double strength = cfg.pml_strength.value_or(
      p > 0 ? default_pml_strength(static_cast<double>(p) * std::min(dx, dy)) : 0.0);
  const double width_x = static_cast<double>(p) * dx, width_y = static_cast<double>(p) * dy;
  auto depth = [&](double pos, std::size_t n, double h) {  // pos in node units
    const double left = static_cast<double>(p) - pos;
    const double right = pos - static_cast<double>(n - 1 - p);
    return std::max({left, right, 0.0}) * h;
  };
  auto zeta_x = [&](double i) { return pml_profile(depth(i, nx, dx), width_x, strength); };
  auto zeta_y = [&](double j) { return pml_profile(depth(j, ny, dy), width_y, strength); };

  Vec c2(n_nodes), a(n_nodes), inv_c2(n_nodes);
  Vec c2dt2(n_nodes), inv1pb(n_nodes), onemb(n_nodes), zz(n_nodes);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t k = box.index(i, j);
      double cv = 1.0, av = 0.0;
      if (omega.contains(i, j)) {
        cv = medium.c(i - ox, j - oy);
        av = medium.a(i - ox, j - oy);
      }
      const double z1 = zeta_x(static_cast<double>(i)), z2 = zeta_y(static_cast<double>(j));
      const double beta = 0.5 * dt * (av + z1 + z2);
      c2[k] = cv * cv;
      a[k] = av;
      inv_c2[k] = 1.0 / c2[k];
      c2dt2[k] = c2[k] * dt * dt;
      inv1pb[k] = 1.0 / (1.0 + beta);
      onemb[k] = 1.0 - beta;
      zz[k] = dt * dt * z1 * z2;
    }

  // Auxiliary fields: psi_x at (i + 1/2, j), psi_y at (i, j + 1/2), both
  // stored at the index of their lower node.
  Vec psi_x = Vec::Zero(n_nodes), psi_y = Vec::Zero(n_nodes);
  Vec px_keep, px_gain, px_src, py_keep, py_gain, py_src;
  auto node_row_in_layer = [&](std::size_t j) { return j <= p || j + 1 + p >= ny; };
  if (p > 0) {
    px_keep = px_gain = px_src = py_keep = py_gain = py_src = Vec::Zero(n_nodes);
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t k = box.index(i, j);
        if (i + 1 < nx) {
          const double az = zeta_x(static_cast<double>(i) + 0.5);
          const double bz = zeta_y(static_cast<double>(j)) - az;
          const double cf = 0.5 * (c2[k] + c2[k + 1]);
          px_keep[k] = (1.0 - 0.5 * dt * az) / (1.0 + 0.5 * dt * az);
          px_gain[k] = 1.0 / (1.0 + 0.5 * dt * az);
          px_src[k] = dt * cf * bz / dx;
        }
        if (j + 1 < ny) {
          const double az = zeta_y(static_cast<double>(j) + 0.5);
          const double bz = zeta_x(static_cast<double>(i)) - az;
          const double cf = 0.5 * (c2[k] + c2[k + nx]);
          py_keep[k] = (1.0 - 0.5 * dt * az) / (1.0 + 0.5 * dt * az);
          py_gain[k] = 1.0 / (1.0 + 0.5 * dt * az);
          py_src[k] = dt * cf * bz / dy;
        }
      }
  }
  // Column spans touched by the layer in a row that is not itself in the layer.
  const std::array<std::pair<std::size_t, std::size_t>, 2> side_cols{
      std::pair<std::size_t, std::size_t>{1, p}, {nx - 1 - p, nx - 2}};

  Vec prev = Vec::Zero(n_nodes), cur = Vec::Zero(n_nodes), next = Vec::Zero(n_nodes);
  Vec w = Vec::Zero(n_nodes);
  for (std::size_t j = 0; j < og.ny; ++j)
    for (std::size_t i = 0; i < og.nx; ++i) {
      const std::size_t k = box.index(i + ox, j + oy);
      cur[k] = initial.u(i, j);
      w[k] = initial.ut(i, j);
    }

  auto sensors_omega = boundary_nodes(og);
  std::vector<std::size_t> sensors_box(sensors_omega.size());
  for (std::size_t s = 0; s < sensors_omega.size(); ++s) {
    const std::size_t i = sensors_omega[s] % og.nx, j = sensors_omega[s] / og.nx;
    sensors_box[s] = box.index(i + ox, j + oy);
  }
  TraceMatrix trace(static_cast<Eigen::Index>(axis.samples()),
                    static_cast<Eigen::Index>(sensors_box.size()));
  auto record_trace = [&](std::size_t n, const Vec& u) {
    for (std::size_t s = 0; s < sensors_box.size(); ++s)
      trace(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s)) =
          u[static_cast<Eigen::Index>(sensors_box[s])];
  };

  ForwardResult result;
  result.dt = dt;
  std::vector<double> damping_rate(axis.samples(), 0.0);
  // Damping density 2 a c^-2 u_t^2 over Omega with the same weights as the energy.
  auto damping_at = [&](auto&& vel) {
    double total = 0.0;
    for (std::size_t j = omega.j0; j <= omega.j1; ++j) {
      const double wy = (j == omega.j0 || j == omega.j1) ? 0.5 * dy : dy;
      for (std::size_t i = omega.i0; i <= omega.i1; ++i) {
        const std::size_t k = box.index(i, j);
        if (a[k] == 0.0) continue;
        const double wx = (i == omega.i0 || i == omega.i1) ? 0.5 * dx : dx;
        const double vt = vel(k);
        total += wx * wy * 2.0 * a[k] * inv_c2[k] * vt * vt;
      }
    }
    return total;
  };
  auto snapshot = [&](std::size_t n, const Vec& u) {
    if (cfg.snapshot_every == 0 || n % cfg.snapshot_every != 0) return;
    char name[32];
    std::snprintf(name, sizeof name, "u_%06zu.tatf", n);
    write_field(extract(u, box, og, ox, oy), cfg.snapshot_dir / name);
  };

  // t = 0
  record_trace(0, cur);
  snapshot(0, cur);
  {
    auto vel0 = [&](std::size_t k) { return w[k]; };
    damping_rate[0] = damping_at(vel0);
    if (cfg.record_energy)
      result.energy_series.push_back(
          region_energy(cur.data(), vel0, inv_c2.data(), nx, ny, dx, dy, omega));
  }

  // Taylor start: u^1 = u^0 + dt w + dt^2/2 (c^2 Lap u^0 - a w).
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      next[k] = cur[k] + dt * w[k] +
                0.5 * (c2dt2[k] * laplacian(cur.data(), k, nx, idx2, idy2) - dt * dt * a[k] * w[k]);
    }
  prev.swap(cur);
  cur.swap(next);  // prev = u^0, cur = u^1

  const double inv2dt = 0.5 / dt;
  for (std::size_t n = 1; n <= axis.steps; ++n) {
    const double* u = cur.data();
    const double* um = prev.data();
    double* up = next.data();
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      const std::size_t row = j * nx;
      for (std::size_t k = row + 1; k + 1 < row + nx; ++k)
        up[k] = (2.0 * u[k] - onemb[k] * um[k] + c2dt2[k] * laplacian(u, k, nx, idx2, idy2)) *
                inv1pb[k];
    }
    if (p > 0) {
      const double dt2 = dt * dt;
      auto correct = [&](std::size_t j, std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i <= i1; ++i) {
          const std::size_t k = j * nx + i;
          const double div = (psi_x[k] - psi_x[k - 1]) / dx + (psi_y[k] - psi_y[k - nx]) / dy;
          up[k] += (dt2 * div - zz[k] * u[k]) * inv1pb[k];
        }
      };
      for (std::size_t j = 1; j + 1 < ny; ++j) {
        if (node_row_in_layer(j)) {
          correct(j, 1, nx - 2);
        } else {
          for (auto [i0, i1] : side_cols) correct(j, i0, i1);
        }
      }
      // psi^{n+1} from the time-centred gradient of (u^{n+1} + u^n) / 2.
      auto update_x = [&](std::size_t j, std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i <= i1; ++i) {
          const std::size_t k = j * nx + i;
          const double grad = 0.5 * ((up[k + 1] + u[k + 1]) - (up[k] + u[k]));
          psi_x[k] = px_keep[k] * psi_x[k] + px_gain[k] * px_src[k] * grad;
        }
      };
      auto update_y = [&](std::size_t j, std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i <= i1; ++i) {
          const std::size_t k = j * nx + i;
          const double grad = 0.5 * ((up[k + nx] + u[k + nx]) - (up[k] + u[k]));
          psi_y[k] = py_keep[k] * psi_y[k] + py_gain[k] * py_src[k] * grad;
        }
      };
      for (std::size_t j = 0; j < ny; ++j) {
        if (node_row_in_layer(j)) {
          update_x(j, 0, nx - 2);
        } else {
          update_x(j, 0, p);
          update_x(j, nx - 2 - p, nx - 2);
        }
      }
      for (std::size_t j = 0; j + 1 < ny; ++j) {
        if (j <= p || j + 2 + p >= ny) {
          update_y(j, 0, nx - 1);
        } else {
          update_y(j, 0, p);
          update_y(j, nx - 1 - p, nx - 1);
        }
      }
    }
    if (n % 32 == 0 || n == axis.steps) check_finite(next, "forward solve", n);

    auto vel = [&](std::size_t k) { return (up[k] - um[k]) * inv2dt; };
    record_trace(n, cur);
    snapshot(n, cur);
    damping_rate[n] = damping_at(vel);
    if (cfg.record_energy)
      result.energy_series.push_back(
          region_energy(u, vel, inv_c2.data(), nx, ny, dx, dy, omega));

    if (n == axis.steps) {
      Vec ut = (next - prev) * inv2dt;
      result.final = WavePair(extract(cur, box, og, ox, oy), extract(ut, box, og, ox, oy));
      result.box_final = WavePair(ScalarField2D(box, cur.array()), ScalarField2D(box, ut.array()));
    }
    prev.swap(cur);
    cur.swap(next);
  }

  double integral = 0.5 * (damping_rate.front() + damping_rate.back());
  for (std::size_t n = 1; n + 1 < damping_rate.size(); ++n) integral += damping_rate[n];
  result.damping_integral = integral * dt;
  result.trace = BoundaryTrace(dt, std::move(sensors_omega), std::move(trace));
  result.box_c = ScalarField2D(box, c2.array().sqrt());
  result.omega_in_box = omega;
  return result;
}

DirichletResult dirichlet_solve(const WavePair& initial, const BoundaryTrace& boundary,
                                const ScalarField2D& c, const ScalarField2D& damping,
                                bool record_energy) {
  const Grid2D& g = c.grid();
  if (!(initial.grid() == g) || !(damping.grid() == g))
    throw InvalidArgument("interior solve fields live on different grids");
  if (boundary.sensors != boundary_nodes(g))
    throw InvalidArgument("trace sensors do not match the grid boundary");
  if (boundary.nt() < 2) throw InvalidArgument("trace needs at least two time samples");
  const double dt = boundary.dt;
  check_leapfrog_bound(c.max(), dt, g);
  if (!((1.0 + 0.5 * dt * damping.values()).minCoeff() > 0.0))
    throw InvalidArgument("negative damping too strong for the time step");

  const std::size_t nx = g.nx, ny = g.ny, n_nodes = g.size();
  const std::size_t steps = boundary.nt() - 1;
  const double idx2 = 1.0 / (g.dx * g.dx), idy2 = 1.0 / (g.dy * g.dy);
  const Vec c2 = c.values().square().matrix();
  const Vec inv_c2 = c.values().square().inverse().matrix();
  const Vec c2dt2 = c2 * dt * dt;
  const Vec b = damping.values().matrix();
  const Vec inv1pb = (1.0 + 0.5 * dt * b.array()).inverse().matrix();
  const Vec onemb = (1.0 - 0.5 * dt * b.array()).matrix();
  const Region whole = Region::whole(g);
  const auto& sensors = boundary.sensors;
  auto inject = [&](Vec& u, std::size_t n) {
    for (std::size_t s = 0; s < sensors.size(); ++s)
      u[static_cast<Eigen::Index>(sensors[s])] =
          boundary.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s));
  };

  DirichletResult result;
  Vec prev = Vec::Zero(n_nodes), cur = initial.u.values().matrix(), next = Vec::Zero(n_nodes);
  const Vec w = initial.ut.values().matrix();
  inject(cur, 0);
  if (record_energy)
    result.energy_series.push_back(region_energy(
        cur.data(), [&](std::size_t k) { return w[k]; }, inv_c2.data(), nx, ny, g.dx, g.dy, whole));

  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      next[k] = cur[k] + dt * w[k] +
                0.5 * (c2dt2[k] * laplacian(cur.data(), k, nx, idx2, idy2) - dt * dt * b[k] * w[k]);
    }
  inject(next, 1);
  prev.swap(cur);
  cur.swap(next);

  const double inv2dt = 0.5 / dt;
  for (std::size_t n = 1; n < steps; ++n) {
    const double* u = cur.data();
    const double* um = prev.data();
    double* up = next.data();
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      const std::size_t row = j * nx;
      for (std::size_t k = row + 1; k + 1 < row + nx; ++k)
        up[k] = (2.0 * u[k] - onemb[k] * um[k] + c2dt2[k] * laplacian(u, k, nx, idx2, idy2)) *
                inv1pb[k];
    }
    inject(next, n + 1);
    if (n % 32 == 0) check_finite(next, "interior solve", n);
    if (record_energy)
      result.energy_series.push_back(region_energy(
          u, [&](std::size_t k) { return (up[k] - um[k]) * inv2dt; }, inv_c2.data(), nx, ny, g.dx,
          g.dy, whole));
    prev.swap(cur);
    cur.swap(next);
  }
  check_finite(cur, "interior solve", steps);

  // Velocity at the last step from the scheme's own Taylor relation:
  // u_t (1 + b dt/2) = (u^N - u^{N-1}) / dt + dt/2 c^2 Lap u^N.
  Vec ut = Vec::Zero(n_nodes);
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t k = j * nx + i;
      ut[k] = ((cur[k] - prev[k]) / dt + 0.5 * dt * c2[k] * laplacian(cur.data(), k, nx, idx2, idy2)) *
              inv1pb[k];
    }
  const auto last = static_cast<Eigen::Index>(steps);
  for (std::size_t s = 0; s < sensors.size(); ++s) {
    const auto col = static_cast<Eigen::Index>(s);
    const auto& h = boundary.values;
    ut[static_cast<Eigen::Index>(sensors[s])] =
        steps >= 2 ? (3.0 * h(last, col) - 4.0 * h(last - 1, col) + h(last - 2, col)) * inv2dt
                   : (h(last, col) - h(last - 1, col)) / dt;
  }
  check_finite(ut, "interior solve", steps);
  if (record_energy)
    result.energy_series.push_back(region_energy(
        cur.data(), [&](std::size_t k) { return ut[k]; }, inv_c2.data(), nx, ny, g.dx, g.dy, whole));
  result.final = WavePair(ScalarField2D(g, cur.array()), ScalarField2D(g, ut.array()));
  return result;
}

WavePair backward_solve(const BoundaryTrace& trace, const WavePair& terminal, const Medium& medium,
                        int sign, const SolveConfig& cfg) {
  if (sign != 1 && sign != -1) throw InvalidArgument("damping sign must be +1 or -1");
  const TimeAxis axis = time_axis(medium, cfg);
  if (trace.nt() != axis.samples() || std::abs(trace.dt - axis.dt) > 1e-12 * axis.dt)
    throw InvalidArgument("trace time axis does not match the solve configuration");
  if (!(terminal.grid() == medium.grid()))
    throw InvalidArgument("terminal data and medium grids differ");
  // s = T - t turns v_tt + sign a v_t = c^2 Lap v into V_ss - sign a V_s = c^2 Lap V.
  const WavePair start(terminal.u, -terminal.ut);
  const auto run = dirichlet_solve(start, reversed_in_time(trace), medium.c,
                                   static_cast<double>(-sign) * medium.a);
  return WavePair(run.final.u, -run.final.ut);
}

HarmonicExtender::HarmonicExtender(const Grid2D& grid)
    : grid_(grid), boundary_(boundary_nodes(grid)) {
  const std::size_t mx = grid.nx - 2, my = grid.ny - 2;
  const double ax = 1.0 / (grid.dx * grid.dx), ay = 1.0 / (grid.dy * grid.dy);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(5 * mx * my);
  for (std::size_t j = 0; j < my; ++j)
    for (std::size_t i = 0; i < mx; ++i) {
      const auto row = static_cast<int>(j * mx + i);
      entries.emplace_back(row, row, 2.0 * (ax + ay));
      if (i > 0) entries.emplace_back(row, row - 1, -ax);
      if (i + 1 < mx) entries.emplace_back(row, row + 1, -ax);
      if (j > 0) entries.emplace_back(row, row - static_cast<int>(mx), -ay);
      if (j + 1 < my) entries.emplace_back(row, row + static_cast<int>(mx), -ay);
    }
  matrix_.resize(static_cast<Eigen::Index>(mx * my), static_cast<Eigen::Index>(mx * my));
  matrix_.setFromTriplets(entries.begin(), entries.end());
  factor_.compute(matrix_);
  if (factor_.info() != Eigen::Success) throw SolverError("Laplacian factorization failed");
}

Eigen::VectorXd HarmonicExtender::rhs_from(std::span<const double> values) const {
  const std::size_t nx = grid_.nx, mx = grid_.nx - 2, my = grid_.ny - 2;
  Vec full = Vec::Zero(static_cast<Eigen::Index>(grid_.size()));
  for (std::size_t s = 0; s < boundary_.size(); ++s)
    full[static_cast<Eigen::Index>(boundary_[s])] = values[s];
  const double ax = 1.0 / (grid_.dx * grid_.dx), ay = 1.0 / (grid_.dy * grid_.dy);
  Vec rhs = Vec::Zero(static_cast<Eigen::Index>(mx * my));
  for (std::size_t j = 0; j < my; ++j)
    for (std::size_t i = 0; i < mx; ++i) {
      double r = 0.0;
      const std::size_t gi = i + 1, gj = j + 1;
      if (gi == 1) r += ax * full[static_cast<Eigen::Index>(gj * nx)];
      if (gi == grid_.nx - 2) r += ax * full[static_cast<Eigen::Index>(gj * nx + gi + 1)];
      if (gj == 1) r += ay * full[static_cast<Eigen::Index>(gi)];
      if (gj == grid_.ny - 2) r += ay * full[static_cast<Eigen::Index>((gj + 1) * nx + gi)];
      rhs[static_cast<Eigen::Index>(j * mx + i)] = r;
    }
  return rhs;
}

ScalarField2D HarmonicExtender::extend(std::span<const double> values) const {
  if (values.size() != boundary_.size())
    throw InvalidArgument("expected " + std::to_string(boundary_.size()) + " boundary values, got " +
                          std::to_string(values.size()));
  const Vec rhs = rhs_from(values);
  Vec x = factor_.solve(rhs);
  const double scale = rhs.norm();
  constexpr int kMaxRefinements = 5;
  for (int pass = 0;; ++pass) {
    const Vec residual = rhs - matrix_ * x;
    if (scale == 0.0 || residual.norm() <= 1e-10 * scale) break;
    if (pass == kMaxRefinements)
      throw SolverError("harmonic extension did not reach 1e-10 relative residual");
    x += factor_.solve(residual);
  }
  const std::size_t nx = grid_.nx, mx = grid_.nx - 2;
  ScalarField2D::Values out = ScalarField2D::Values::Zero(static_cast<Eigen::Index>(grid_.size()));
  for (std::size_t s = 0; s < boundary_.size(); ++s)
    out[static_cast<Eigen::Index>(boundary_[s])] = values[s];
  for (std::size_t j = 0; j + 2 < grid_.ny; ++j)
    for (std::size_t i = 0; i < mx; ++i)
      out[static_cast<Eigen::Index>((j + 1) * nx + i + 1)] = x[static_cast<Eigen::Index>(j * mx + i)];
  return ScalarField2D(grid_, std::move(out));
}

std::shared_ptr<const HarmonicExtender> harmonic_extender(const Grid2D& grid) {
  static std::mutex mutex;
  static std::vector<std::shared_ptr<const HarmonicExtender>> cache;
  std::lock_guard lock(mutex);
  for (const auto& e : cache)
    if (e->grid() == grid) return e;
  if (cache.size() >= 8) cache.erase(cache.begin());
  cache.push_back(std::make_shared<const HarmonicExtender>(grid));
  return cache.back();
}

ScalarField2D harmonic_extension(std::span<const double> boundary_values, const Grid2D& grid) {
  return harmonic_extender(grid)->extend(boundary_values);
}

double local_energy(const WavePair& state, const ScalarField2D& c, const Region& region) {
  const Grid2D& g = c.grid();
  if (!(state.grid() == g)) throw InvalidArgument("state and sound speed grids differ");
  check_region(g, region);
  const ScalarField2D::Values inv_c2 = c.values().square().inverse();
  const double* ut = state.ut.values().data();
  return region_energy(
      state.u.values().data(), [ut](std::size_t k) { return ut[k]; }, inv_c2.data(), g.nx, g.ny,
      g.dx, g.dy, region);
}

double energy_rise_rate(std::span<const double> series, double dt, double min_window) {
  if (series.empty()) return 0.0;
  if (!(dt > 0.0) || !(min_window > 0.0)) throw InvalidArgument("energy_rise_rate needs dt, window > 0");
  if (!(series[0] > 0.0)) throw InvalidArgument("energy_rise_rate needs a positive initial energy");
  double worst = 0.0;
  for (std::size_t n = 0; n < series.size(); ++n)
    for (std::size_t m = n + 1; m < series.size(); ++m) {
      const double span = std::max(static_cast<double>(m - n) * dt, min_window);
      worst = std::max(worst, (series[m] - series[n]) / (series[0] * span));
    }
  return worst;
}

double energy_norm(const WavePair& state, const ScalarField2D& c) {
  return std::sqrt(local_energy(state, c, Region::whole(c.grid())));
}

double extended_energy(const ForwardResult& result, const ScalarField2D& c, const Region& region) {
  const WavePair* state = nullptr;
  if (c.grid() == result.final.grid())
    state = &result.final;
  else if (c.grid() == result.box_final.grid())
    state = &result.box_final;
  else
    throw InvalidArgument("sound speed grid matches neither Omega nor the computational box");
  return local_energy(*state, c, region) + result.damping_integral;
}

}  // namespace tat
