#pragma once

#include <filesystem>

#include "tat/field.hpp"
#include "tat/trace.hpp"

namespace tat {

// Field files ("TATF"): magic, u32 nx, u32 ny, f64 x_min, x_max, y_min, y_max,
// then nx*ny f64 values row-major. Trace files ("TATT"): magic, u32 nt,
// u32 sensor count, f64 dt, then the nt x sensors matrix time-major.
// Every integer and float is little-endian.

void write_field(const ScalarField2D& field, const std::filesystem::path& path);
ScalarField2D read_field(const std::filesystem::path& path);

void write_trace(const BoundaryTrace& trace, const std::filesystem::path& path);
/// Sensor indices are not stored; they are rebuilt from `grid`, whose
/// boundary node count must match the file.
BoundaryTrace read_trace(const std::filesystem::path& path, const Grid2D& grid);

}  // namespace tat
