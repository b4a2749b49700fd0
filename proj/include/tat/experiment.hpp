#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "tat/field.hpp"
#include "tat/media.hpp"
#include "tat/reconstruct.hpp"
#include "tat/wave.hpp"

namespace tat {

/// Sampling used for the T0 / T1 estimates.
struct GeometryConfig {
  bool enabled = true;
  std::size_t boundary_samples = 64;
  std::size_t angle_samples = 64;
  double ray_step = 5e-4;
  std::size_t t1_samples = 201;

  friend bool operator==(const GeometryConfig&, const GeometryConfig&) = default;
};

struct ExperimentConfig {
  std::size_t grid = 201;
  AttenuationParams attenuation;
  double blur_radius = 0.02;
  SolveConfig solve;
  Variant variant = Variant::SignFlipped;
  std::size_t n_terms = 100;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  GeometryConfig geometry;

  /// Validates every parameter with its owning module's rules.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// "example1", "example2" (201 grid) and the long-running "example1-full",
/// "example2-full" (501 grid). The examples differ only in d1.
ExperimentConfig preset(std::string_view name);

/// JSON with a fixed schema. Missing keys keep their defaults, unknown keys
/// and ill-typed values raise FormatError.
ExperimentConfig parse_config(std::string_view json_text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 8-bit binary PGM, row 0 at the top (largest y). Values map affinely from
/// `range` (or the field extrema) onto 0..255; a degenerate range renders
/// mid-gray.
void render_pgm(const ScalarField2D& field, const std::filesystem::path& path,
                std::optional<std::pair<double, double>> range = std::nullopt);

struct GeometryEstimate {
  double t0 = 0.0;
  double t1 = 0.0;
};

/// Writes rays.csv into the output directory and returns both estimates.
GeometryEstimate run_geometry(const ExperimentConfig& config, const Medium& medium);

/// Forward problem only: medium, phantom, trace.tatt, final state,
/// energy.csv and summary.txt. Returns the process exit status.
int run_forward(const ExperimentConfig& config, std::ostream& log);

/// Full reconstruction protocol. Validation errors propagate before any
/// file is written; an unstable term leaves the outputs so far plus a
/// FAILED marker and returns a nonzero status.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

/// Quick consistency checks on small grids; one line per check.
bool run_selftest(std::ostream& log);

}  // namespace tat
