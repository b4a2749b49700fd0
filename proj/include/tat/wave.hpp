#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "tat/field.hpp"
#include "tat/media.hpp"
#include "tat/trace.hpp"

namespace tat {

/// Time stepping and free-space truncation parameters.
struct SolveConfig {
  double T = 3.0;
  double cfl = 0.5;
  std::size_t pml_cells = 20;
  /// Peak absorption of the cubic profile. Empty selects the value giving a
  /// normal-incidence reflection of about 1e-4.
  std::optional<double> pml_strength;
  /// Gap between the boundary of Omega and the start of the PML.
  double box_margin = 0.2;
  bool record_energy = true;
  /// Dump u on Omega every k steps as u_%06d.tatf (0 disables).
  std::size_t snapshot_every = 0;
  std::filesystem::path snapshot_dir = ".";

  void validate() const;
  friend bool operator==(const SolveConfig&, const SolveConfig&) = default;
};

/// Uniform time axis t_n = n dt, n = 0..steps, with steps * dt == T.
struct TimeAxis {
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t samples() const { return steps + 1; }
};

/// dt = T / ceil(T / (cfl min(dx, dy) / c_max)), where c_max includes the
/// unit exterior speed. Throws InvalidArgument when the leapfrog bound
/// c_max dt sqrt(1/dx^2 + 1/dy^2) <= 1 is violated.
TimeAxis time_axis(const Medium& medium, const SolveConfig& cfg);

/// Normal-incidence reflection of about 1e-4 for the cubic profile.
double default_pml_strength(double layer_width);

struct ForwardResult {
  double dt = 0.0;
  BoundaryTrace trace;
  /// State at t = T on the grid of Omega.
  WavePair final;
  /// State at t = T on the whole computational box.
  WavePair box_final;
  /// Sound speed on the computational box.
  ScalarField2D box_c;
  /// Nodes of Omega inside the box grid.
  Region omega_in_box;
  /// 2 int_0^T int a c^-2 |u_t|^2 dx dt.
  double damping_integral = 0.0;
  /// E_Omega(u(t_n)) for n = 0..steps (empty unless recorded).
  std::vector<double> energy_series;
};

/// Damped wave equation on the plane, Omega embedded in a box truncated by
/// a PML (or by a Dirichlet wall when pml_cells == 0).
ForwardResult forward_solve(const WavePair& initial, const Medium& medium, const SolveConfig& cfg);

struct DirichletResult {
  WavePair final;
  std::vector<double> energy_series;
};

/// Forward-in-time interior problem u_tt + b u_t = c^2 Lap u on the grid of
/// `c`, with the trace injected as Dirichlet data at every step. `damping`
/// may take either sign. Runs trace.nt() - 1 steps of size trace.dt.
DirichletResult dirichlet_solve(const WavePair& initial, const BoundaryTrace& boundary,
                                const ScalarField2D& c, const ScalarField2D& damping,
                                bool record_energy = false);

/// [v(0), v_t(0)] of v_tt + sign a v_t = c^2 Lap v on Omega, run backward
/// from `terminal` at t = T with the trace as boundary data. sign = -1 is
/// the attenuated reversal, sign = +1 the plain one.
WavePair backward_solve(const BoundaryTrace& trace, const WavePair& terminal,
                        const Medium& medium, int sign, const SolveConfig& cfg);

/// Cached factorization of the 5-point Dirichlet Laplacian on a grid.
class HarmonicExtender {
 public:
  explicit HarmonicExtender(const Grid2D& grid);

  /// Discrete harmonic function with the given values on the boundary nodes
  /// (ordered as boundary_nodes()). Relative residual <= 1e-10.
  ScalarField2D extend(std::span<const double> boundary_values) const;

  const Grid2D& grid() const { return grid_; }

 private:
  using SparseMatrix = Eigen::SparseMatrix<double>;
  Eigen::VectorXd rhs_from(std::span<const double> boundary_values) const;

  Grid2D grid_;
  std::vector<std::size_t> boundary_;
  SparseMatrix matrix_;
  Eigen::SimplicialLDLT<SparseMatrix> factor_;
};

/// Shared extender for `grid`; built once per distinct grid.
std::shared_ptr<const HarmonicExtender> harmonic_extender(const Grid2D& grid);

ScalarField2D harmonic_extension(std::span<const double> boundary_values, const Grid2D& grid);

/// int_U |grad u|^2 + c^-2 |u_t|^2 with trapezoidal weights on the node
/// rectangle U and centered differences (one-sided at grid edges).
double local_energy(const WavePair& state, const ScalarField2D& c, const Region& region);

/// Worst relative energy gain per unit time in a series sampled every dt:
/// max over n < m of (E_m - E_n) / (E_0 max(t_m - t_n, min_window)).
/// Zero for a non-increasing series.
double energy_rise_rate(std::span<const double> series, double dt, double min_window = 1.0);

/// Energy norm on the whole grid of the pair.
double energy_norm(const WavePair& state, const ScalarField2D& c);

/// local_energy at T plus the accumulated damping term. `c` selects the
/// grid: Omega (result.final) or the box (result.box_final).
double extended_energy(const ForwardResult& result, const ScalarField2D& c, const Region& region);

}  // namespace tat
