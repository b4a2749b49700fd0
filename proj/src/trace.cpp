#include "tat/trace.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "tat/error.hpp"

namespace tat {

BoundaryTrace::BoundaryTrace(double dt_, std::vector<std::size_t> sensors_, TraceMatrix values_)
    : dt(dt_), sensors(std::move(sensors_)), values(std::move(values_)) {
  if (!(dt > 0.0)) throw InvalidArgument("trace time step must be positive");
  if (static_cast<std::size_t>(values.cols()) != sensors.size())
    throw InvalidArgument("trace has " + std::to_string(values.cols()) + " columns for " +
                          std::to_string(sensors.size()) + " sensors");
  if (!values.allFinite()) throw InvalidArgument("trace contains non-finite values");
}

BoundaryTrace BoundaryTrace::zero(const Grid2D& grid, std::size_t nt, double dt) {
  auto sensors = boundary_nodes(grid);
  TraceMatrix v = TraceMatrix::Zero(static_cast<Eigen::Index>(nt),
                                    static_cast<Eigen::Index>(sensors.size()));
  return BoundaryTrace(dt, std::move(sensors), std::move(v));
}

BoundaryTrace reversed_in_time(const BoundaryTrace& trace) {
  TraceMatrix v = trace.values.colwise().reverse();
  return BoundaryTrace(trace.dt, trace.sensors, std::move(v));
}

double trace_h1_norm(const BoundaryTrace& trace, const Grid2D& grid) {
  const std::size_t nt = trace.nt(), ns = trace.sensor_count();
  if (nt < 2 || ns < 2) throw InvalidArgument("trace too short for an H1 norm");
  // Arc spacing to the next sensor around the loop.
  std::vector<double> ds(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    const std::size_t a = trace.sensors[k], b = trace.sensors[(k + 1) % ns];
    ds[k] = std::hypot(grid.x(a % grid.nx) - grid.x(b % grid.nx), grid.y(a / grid.nx) - grid.y(b / grid.nx));
  }
  double total = 0.0;
  for (std::size_t n = 0; n < nt; ++n) {
    const double wt = (n == 0 || n + 1 == nt) ? 0.5 * trace.dt : trace.dt;
    for (std::size_t k = 0; k < ns; ++k) {
      const std::size_t next = (k + 1) % ns;
      // Node weight along the loop: half of each adjacent segment.
      const double wnode = 0.5 * (ds[k] + ds[(k + ns - 1) % ns]);
      const double h = trace.values(n, k);
      total += wt * wnode * h * h;
      const double hs = (trace.values(n, next) - h) / ds[k];
      total += wt * ds[k] * hs * hs;
      if (n + 1 < nt) {
        const double ht = (trace.values(n + 1, k) - h) / trace.dt;
        total += trace.dt * wnode * ht * ht;
      }
    }
  }
  return std::sqrt(total);
}

}  // namespace tat
