#include "tat/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace tat {
namespace {

constexpr std::array<char, 4> kFieldMagic{'T', 'A', 'T', 'F'};
constexpr std::array<char, 4> kTraceMagic{'T', 'A', 'T', 'T'};

class ByteWriter {
 public:
  void magic(const std::array<char, 4>& m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
  void u32(std::uint32_t v) { put(v); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(bytes_.data(), static_cast<std::streamsize>(bytes_.size()));
    if (!out) throw Error("write failed: " + path.string());
  }

 private:
  template <typename U>
  void put(U v) {
    for (std::size_t b = 0; b < sizeof(U); ++b)
      bytes_.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
  }
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path_);
    bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  void expect_magic(const std::array<char, 4>& m) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, m.data(), 4) != 0)
      throw FormatError(path_ + ": bad magic");
    pos_ += 4;
  }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError(path_ + ": truncated header");
  }
  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b)
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += sizeof(U);
    return v;
  }

  std::string path_;
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

void check_payload(const ByteReader& r, std::size_t count, const std::string& what) {
  if (r.remaining() != count * 8)
    throw FormatError(what + ": header announces " + std::to_string(count) +
                      " values but payload holds " + std::to_string(r.remaining()) + " bytes");
}

}  // namespace

void write_field(const ScalarField2D& field, const std::filesystem::path& path) {
  const Grid2D& g = field.grid();
  ByteWriter w;
  w.magic(kFieldMagic);
  w.u32(static_cast<std::uint32_t>(g.nx));
  w.u32(static_cast<std::uint32_t>(g.ny));
  w.f64(g.x_min);
  w.f64(g.x_max);
  w.f64(g.y_min);
  w.f64(g.y_max);
  for (std::size_t k = 0; k < field.size(); ++k) w.f64(field[k]);
  w.save(path);
}

ScalarField2D read_field(const std::filesystem::path& path) {
  ByteReader r(path);
  r.expect_magic(kFieldMagic);
  const std::size_t nx = r.u32();
  const std::size_t ny = r.u32();
  const double x0 = r.f64(), x1 = r.f64(), y0 = r.f64(), y1 = r.f64();
  Grid2D grid;
  try {
    grid = make_grid(nx, ny, x0, x1, y0, y1);
  } catch (const InvalidArgument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  check_payload(r, grid.size(), path.string());
  ScalarField2D::Values v(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    v[k] = r.f64();
    if (!std::isfinite(v[k])) throw FormatError(path.string() + ": non-finite payload");
  }
  return ScalarField2D(grid, std::move(v));
}

void write_trace(const BoundaryTrace& trace, const std::filesystem::path& path) {
  ByteWriter w;
  w.magic(kTraceMagic);
  w.u32(static_cast<std::uint32_t>(trace.nt()));
  w.u32(static_cast<std::uint32_t>(trace.sensor_count()));
  w.f64(trace.dt);
  for (Eigen::Index n = 0; n < trace.values.rows(); ++n)
    for (Eigen::Index k = 0; k < trace.values.cols(); ++k) w.f64(trace.values(n, k));
  w.save(path);
}

BoundaryTrace read_trace(const std::filesystem::path& path, const Grid2D& grid) {
  ByteReader r(path);
  r.expect_magic(kTraceMagic);
  const std::size_t nt = r.u32();
  const std::size_t ns = r.u32();
  const double dt = r.f64();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw FormatError(path.string() + ": invalid dt");
  auto sensors = boundary_nodes(grid);
  if (sensors.size() != ns)
    throw FormatError(path.string() + ": " + std::to_string(ns) + " sensors but grid has " +
                      std::to_string(sensors.size()) + " boundary nodes");
  check_payload(r, nt * ns, path.string());
  TraceMatrix v(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(ns));
  for (Eigen::Index n = 0; n < v.rows(); ++n)
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      v(n, k) = r.f64();
      if (!std::isfinite(v(n, k))) throw FormatError(path.string() + ": non-finite payload");
    }
  return BoundaryTrace(dt, std::move(sensors), std::move(v));
}

}  // namespace tat
