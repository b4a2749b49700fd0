#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tat/error.hpp"
#include "tat/media.hpp"

using namespace tat;

namespace {

// Shepp & Logan (1974), written out independently of the library table:
// x0, y0, semi-axis a, semi-axis b, rotation (degrees), intensity.
constexpr double kSheppLogan[10][6] = {
    {0.0, 0.0, 0.69, 0.92, 0.0, 2.0},        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98},
    {0.22, 0.0, 0.11, 0.31, -18.0, -0.02},   {-0.22, 0.0, 0.16, 0.41, 18.0, -0.02},
    {0.0, 0.35, 0.21, 0.25, 0.0, 0.01},      {0.0, 0.1, 0.046, 0.046, 0.0, 0.01},
    {0.0, -0.1, 0.046, 0.046, 0.0, 0.01},    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.01},
    {0.0, -0.605, 0.023, 0.023, 0.0, 0.01},  {0.06, -0.605, 0.023, 0.046, 0.0, 0.01},
};

double oracle_phantom(double x, double y) {
  const double s = 0.92 / 0.9;  // the head is shrunk to fit [-0.9, 0.9]^2
  x *= s;
  y *= s;
  double sum = 0.0;
  for (const auto& e : kSheppLogan) {
    const double t = e[4] * std::numbers::pi / 180.0;
    const double dx = x - e[0], dy = y - e[1];
    const double u = (dx * std::cos(t) + dy * std::sin(t)) / e[2];
    const double v = (-dx * std::sin(t) + dy * std::cos(t)) / e[3];
    if (u * u + v * v <= 1.0) sum += e[5];
  }
  return sum;
}

// Grid on [-1, 1]^2 with 1/3 and -1/2 on nodes.
Grid2D thirds_grid() { return make_square_grid(301); }

std::size_t node_at(double v, double lo, double step) {
  return static_cast<std::size_t>(std::lround((v - lo) / step));
}

}  // namespace

TEST_CASE("sound speed follows the formula away from the boundary") {
  const Grid2D g = make_square_grid(201);
  const ScalarField2D c = build_sound_speed(g, 0.1);
  CHECK(c(100, 100) == doctest::Approx(1.1).epsilon(1e-14));
  CHECK(c(125, 125) == doctest::Approx(1.2).epsilon(1e-13));
  // Blended to exactly 1 on the boundary.
  for (std::size_t k : boundary_nodes(g)) CHECK(c[k] == 1.0);
}

TEST_CASE("medium is trivial outside Omega") {
  const Grid2D box = make_square_grid(141, 1.4);
  const ScalarField2D c = build_sound_speed(box, 0.1);
  const ScalarField2D a = build_attenuation(box, AttenuationParams{});
  for (std::size_t j = 0; j < box.ny; ++j)
    for (std::size_t i = 0; i < box.nx; ++i) {
      if (std::max(std::abs(box.x(i)), std::abs(box.y(j))) > 1.0 + 1e-12) {
        CHECK(c(i, j) == 1.0);
        CHECK(a(i, j) == 0.0);
      }
    }
  CHECK(a(node_at(1.2, -1.4, box.dx), node_at(0.0, -1.4, box.dy)) == 0.0);
  CHECK(c.min() > 0.0);
  CHECK(a.min() >= 0.0);
}

TEST_CASE("attenuation values at reference points") {
  const Grid2D g = thirds_grid();
  const ScalarField2D a = build_attenuation(g, AttenuationParams{});
  const std::size_t i1 = node_at(1.0 / 3.0, -1, g.dx), j1 = node_at(-0.5, -1, g.dy);
  CHECK(g.x(i1) == doctest::Approx(1.0 / 3.0));
  CHECK(a(i1, j1) == doctest::Approx(9.0).epsilon(0.01 / 9.0));
  const std::size_t i0 = node_at(0.0, -1, g.dx), j9 = node_at(0.9, -1, g.dy);
  CHECK(a(i0, j9) == doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("attenuation parameter validation") {
  AttenuationParams p;
  p.d1 = -1;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.radius2_sq = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.taper_width = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.taper_width = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  CHECK_THROWS_AS(Medium(ScalarField2D(make_square_grid(5), 0.0), ScalarField2D(make_square_grid(5))),
                  InvalidArgument);
  CHECK_THROWS_AS(Medium(ScalarField2D(make_square_grid(5), 1.0), ScalarField2D(make_square_grid(5), -1.0)),
                  InvalidArgument);
}

TEST_CASE("attenuation is monotone in each magnitude") {
  const Grid2D g = make_square_grid(81);
  const AttenuationParams base;
  const ScalarField2D a0 = build_attenuation(g, base);
  for (int which = 0; which < 3; ++which) {
    AttenuationParams p = base;
    (which == 0 ? p.d1 : which == 1 ? p.d2 : p.d3) += 2.5;
    const ScalarField2D a1 = build_attenuation(g, p);
    CHECK((a1.values() >= a0.values()).all());
  }
}

TEST_CASE("phantom support stays inside Omega") {
  const Grid2D g = make_square_grid(201);
  const ScalarField2D f = build_phantom(g, 0.02);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i)
      if (std::hypot(g.x(i), g.y(j)) > 0.95) CHECK(f(i, j) == 0.0);
  for (std::size_t k : boundary_nodes(g)) CHECK(f[k] == 0.0);
}

TEST_CASE("unblurred phantom matches an independent ellipse table") {
  CHECK(shepp_logan_value(0.0, 0.88) == doctest::Approx(2.0));  // outer ellipse only
  CHECK(oracle_phantom(0.0, 0.88) == doctest::Approx(2.0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = u(rng), y = u(rng);
    CHECK(shepp_logan_value(x, y) == doctest::Approx(oracle_phantom(x, y)).epsilon(1e-12));
  }
  const Grid2D g = make_square_grid(101);
  const ScalarField2D sharp = build_phantom(g, 0.0);
  for (std::size_t j = 0; j < g.ny; ++j)
    for (std::size_t i = 0; i < g.nx; ++i) CHECK(sharp(i, j) == shepp_logan_value(g.x(i), g.y(j)));
}

TEST_CASE("phantom blur preserves mass") {
  const Grid2D g = make_square_grid(201);
  const double sharp = build_phantom(g, 0.0).values().sum();
  for (double r : {0.01, 0.02, 0.03}) {
    const double blurred = build_phantom(g, r).values().sum();
    CHECK(std::abs(blurred - sharp) <= 1e-3 * std::abs(sharp));
  }
}

TEST_CASE("gaussian blur basics") {
  const Grid2D g = make_square_grid(41);
  const ScalarField2D f = ScalarField2D::sample(g, [](double x, double y) { return x * x + y; });
  CHECK((gaussian_blur(f, 0.0, 1.0).values() == f.values()).all());
  const ScalarField2D one(g, 1.0);
  // Interior nodes far from the edge see a full, normalized kernel.
  CHECK(gaussian_blur(one, 0.05, 0.15)(20, 20) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(build_phantom(g, -0.1), InvalidArgument);
}

TEST_CASE("TAT initial data") {
  const Grid2D g = make_square_grid(41);
  const Medium m = build_medium(g, AttenuationParams{});
  const ScalarField2D f = build_phantom(g, 0.05);
  const WavePair p = tat_initial_data(f, m);
  CHECK((p.u.values() == f.values()).all());
  CHECK(((p.ut.values() + m.a.values() * f.values()).abs() == 0.0).all());
}
