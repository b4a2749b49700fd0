#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "tat/error.hpp"
#include "tat/grid.hpp"

namespace tat {

/// Real-valued samples on a Grid2D, row-major with y slow.
///
/// Every constructed field is checked for finiteness; a non-finite entry is
/// a hard error.
template <typename Scalar>
class Field2D {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Field2D() = default;

  explicit Field2D(const Grid2D& grid, Scalar fill = Scalar(0))
      : grid_(grid), values_(Values::Constant(static_cast<Eigen::Index>(grid.size()), fill)) {
    check();
  }

  Field2D(const Grid2D& grid, Values values) : grid_(grid), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.size())
      throw InvalidArgument("field size " + std::to_string(values_.size()) +
                            " does not match grid " + std::to_string(grid_.nx) +
                            "x" + std::to_string(grid_.ny));
    check();
  }

  /// Samples fn(x, y) at every node.
  template <typename Fn>
  static Field2D sample(const Grid2D& grid, Fn&& fn) {
    Values v(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.ny; ++j)
      for (std::size_t i = 0; i < grid.nx; ++i)
        v[static_cast<Eigen::Index>(grid.index(i, j))] = fn(grid.x(i), grid.y(j));
    return Field2D(grid, std::move(v));
  }

  const Grid2D& grid() const { return grid_; }
  const Values& values() const { return values_; }
  std::size_t size() const { return grid_.size(); }

  Scalar operator()(std::size_t i, std::size_t j) const {
    return values_[static_cast<Eigen::Index>(grid_.index(i, j))];
  }
  Scalar operator[](std::size_t k) const { return values_[static_cast<Eigen::Index>(k)]; }

  Scalar min() const { return values_.minCoeff(); }
  Scalar max() const { return values_.maxCoeff(); }
  Scalar max_abs() const { return values_.abs().maxCoeff(); }
  /// Plain nodal l2 norm.
  Scalar norm() const { return std::sqrt(values_.square().sum()); }

  friend Field2D operator+(const Field2D& a, const Field2D& b) {
    same_grid(a, b);
    return Field2D(a.grid_, a.values_ + b.values_);
  }
  friend Field2D operator-(const Field2D& a, const Field2D& b) {
    same_grid(a, b);
    return Field2D(a.grid_, a.values_ - b.values_);
  }
  friend Field2D operator*(Scalar s, const Field2D& a) { return Field2D(a.grid_, s * a.values_); }
  /// Pointwise product.
  friend Field2D operator*(const Field2D& a, const Field2D& b) {
    same_grid(a, b);
    return Field2D(a.grid_, a.values_ * b.values_);
  }
  friend Field2D operator-(const Field2D& a) { return Field2D(a.grid_, -a.values_); }

 private:
  static void same_grid(const Field2D& a, const Field2D& b) {
    if (!(a.grid_ == b.grid_)) throw InvalidArgument("fields live on different grids");
  }
  void check() const {
    if (!values_.allFinite()) throw InvalidArgument("field contains non-finite values");
  }

  Grid2D grid_;
  Values values_;
};

using ScalarField2D = Field2D<double>;

/// State [u, u_t] at a fixed time; an element of the energy space.
struct WavePair {
  ScalarField2D u;
  ScalarField2D ut;

  WavePair() = default;
  WavePair(ScalarField2D u_, ScalarField2D ut_) : u(std::move(u_)), ut(std::move(ut_)) {
    if (!(u.grid() == ut.grid())) throw InvalidArgument("WavePair components on different grids");
  }
  static WavePair zero(const Grid2D& grid) { return {ScalarField2D(grid), ScalarField2D(grid)}; }

  const Grid2D& grid() const { return u.grid(); }

  friend WavePair operator+(const WavePair& a, const WavePair& b) { return {a.u + b.u, a.ut + b.ut}; }
  friend WavePair operator-(const WavePair& a, const WavePair& b) { return {a.u - b.u, a.ut - b.ut}; }
  friend WavePair operator*(double s, const WavePair& a) { return {s * a.u, s * a.ut}; }
};

}  // namespace tat
