#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "tat/error.hpp"
#include "tat/experiment.hpp"
#include "tat/io.hpp"

using namespace tat;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<unsigned char> pgm_pixels(const fs::path& p, std::size_t& w, std::size_t& h) {
  std::ifstream in(p, std::ios::binary);
  std::string magic;
  int maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  REQUIRE(magic == "P5");
  REQUIRE(maxval == 255);
  std::vector<unsigned char> px(w * h);
  in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  return px;
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "tat_tests" / name;
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_run(const fs::path& out) {
  ExperimentConfig cfg = preset("example2");
  cfg.grid = 41;
  cfg.n_terms = 1;
  cfg.output_dir = out;
  cfg.blur_radius = 0.05;
  cfg.geometry.boundary_samples = 8;
  cfg.geometry.angle_samples = 8;
  cfg.geometry.ray_step = 2e-3;
  cfg.geometry.t1_samples = 41;
  return cfg;
}

}  // namespace

TEST_CASE("presets differ only in d1") {
  const ExperimentConfig one = preset("example1");
  ExperimentConfig two = preset("example2");
  CHECK(one.attenuation.d1 == 9.0);
  CHECK(two.attenuation.d1 == 5.0);
  CHECK(one.grid == 201);
  CHECK(preset("example2-full").grid == 501);
  two.attenuation.d1 = 9.0;
  CHECK(one == two);
  CHECK_THROWS_AS(preset("example3"), InvalidArgument);
  CHECK_NOTHROW(one.validate());
}

TEST_CASE("config round trip") {
  for (const char* name : {"example1", "example2", "example1-full"}) {
    const ExperimentConfig cfg = preset(name);
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.01, 0.4);
  std::uniform_int_distribution<std::size_t> n(17, 400);
  for (int trial = 0; trial < 50; ++trial) {
    ExperimentConfig cfg;
    cfg.grid = n(rng);
    cfg.attenuation.d1 = 10 * u(rng);
    cfg.attenuation.center2 = {u(rng) - 0.2, -u(rng)};
    cfg.attenuation.radius1_sq = u(rng) / 3;
    cfg.attenuation.taper_width = u(rng);
    cfg.blur_radius = u(rng) / 10;
    cfg.solve.T = 10 * u(rng);
    cfg.solve.cfl = u(rng);
    cfg.solve.pml_cells = n(rng) / 10;
    if (trial % 2) cfg.solve.pml_strength = 100 * u(rng);
    cfg.solve.snapshot_every = n(rng);
    cfg.variant = trial % 3 ? Variant::SignFlipped : Variant::Homan;
    cfg.n_terms = n(rng);
    cfg.output_dir = "runs/trial_" + std::to_string(trial);
    cfg.seed = rng();
    cfg.geometry.enabled = trial % 4 != 0;
    cfg.geometry.ray_step = u(rng) / 100;
    REQUIRE_NOTHROW(cfg.validate());
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }
}

TEST_CASE("config schema is strict") {
  CHECK(parse_config("{}") == ExperimentConfig{});
  CHECK(parse_config(R"({"n_terms": 8, "variant": "homan"})").n_terms == 8);
  CHECK_THROWS_AS(parse_config(R"({"n_term": 8})"), FormatError);
  CHECK_THROWS_AS(parse_config(R"({"medium": {"d4": 1}})"), FormatError);
  CHECK_THROWS_AS(parse_config(R"({"solve": {"dt": 0.1}})"), FormatError);
  CHECK_THROWS_AS(parse_config(R"({"geometry": {"steps": 3}})"), FormatError);
  CHECK_THROWS_AS(parse_config(R"({"grid": -5})"), FormatError);
  CHECK_THROWS_AS(parse_config(R"({"grid": 20.5})"), FormatError);
  CHECK_THROWS_AS(parse_config(R"({"medium": {"d1": "nine"}})"), FormatError);
  CHECK_THROWS_AS(parse_config(R"({"medium": {"center1": [1]}})"), FormatError);
  CHECK_THROWS_AS(parse_config(R"({"variant": "fast"})"), FormatError);
  CHECK_THROWS_AS(parse_config(R"({"grid": )"), FormatError);
  CHECK_THROWS_AS(parse_config("[]"), FormatError);
  CHECK(!parse_config(R"({"solve": {"pml_strength": null}})").solve.pml_strength);
  CHECK(*parse_config(R"({"solve": {"pml_strength": 3}})").solve.pml_strength == 3.0);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.grid = 9;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.n_terms = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.attenuation.d2 = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.solve.cfl = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.geometry.angle_samples = 4;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("PGM rendering") {
  const fs::path dir = fresh_dir("pgm");
  fs::create_directories(dir);
  const Grid2D g = make_square_grid(21);
  std::size_t w = 0, h = 0;

  render_pgm(ScalarField2D(g, 3.0), dir / "const.pgm");
  auto px = pgm_pixels(dir / "const.pgm", w, h);
  CHECK(w == 21);
  CHECK(h == 21);
  CHECK(std::all_of(px.begin(), px.end(), [&](unsigned char p) { return p == px[0]; }));

  const ScalarField2D x = ScalarField2D::sample(g, [](double x, double) { return x; });
  render_pgm(x, dir / "x.pgm", std::pair{-1.0, 1.0});
  px = pgm_pixels(dir / "x.pgm", w, h);
  for (std::size_t row = 0; row < h; ++row) {
    CHECK(px[row * w] == 0);
    CHECK(px[row * w + w - 1] == 255);
  }
  render_pgm(x, dir / "x2.pgm", std::pair{-1.0, 1.0});
  CHECK(slurp(dir / "x.pgm") == slurp(dir / "x2.pgm"));

  const ScalarField2D y = ScalarField2D::sample(g, [](double, double y) { return y; });
  render_pgm(y, dir / "y.pgm");
  px = pgm_pixels(dir / "y.pgm", w, h);
  CHECK(px[0] == 255);            // top row is y = 1
  CHECK(px[(h - 1) * w] == 0);    // bottom row is y = -1

  render_pgm(x, dir / "flat.pgm", std::pair{0.5, 0.5});
  px = pgm_pixels(dir / "flat.pgm", w, h);
  CHECK(std::all_of(px.begin(), px.end(), [](unsigned char p) { return p == 128; }));
}

TEST_CASE("experiment outputs") {
  const fs::path out = fresh_dir("experiment");
  std::ostringstream log;
  REQUIRE(run_experiment(small_run(out), log) == 0);
  for (const char* f : {"medium_c.tatf", "medium_a.tatf", "phantom.tatf", "truth.pgm", "recon_001.pgm",
                        "errors.csv", "summary.txt", "rays.csv", "trace.tatt", "config.json"})
    CHECK_MESSAGE(fs::exists(out / f), f);
  CHECK(!fs::exists(out / "FAILED"));

  std::istringstream csv(slurp(out / "errors.csv"));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(csv, line)) lines.push_back(line);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "term,error_percent,contraction_ratio");
  CHECK(lines[1].rfind("1,", 0) == 0);
  CHECK(lines[1].back() == ',');

  const std::string summary = slurp(out / "summary.txt");
  CHECK(summary.find("t0_estimate") != std::string::npos);
  CHECK(summary.find("t1_estimate") != std::string::npos);
  CHECK(summary.find("error_final_percent") != std::string::npos);
  CHECK(load_config(out / "config.json") == small_run(out));
  CHECK(read_field(out / "phantom.tatf").grid() == make_square_grid(41));

  const std::string first = slurp(out / "errors.csv");
  REQUIRE(run_experiment(small_run(out), log) == 0);
  CHECK(slurp(out / "errors.csv") == first);
}

TEST_CASE("multi-term run reports contraction ratios") {
  const fs::path out = fresh_dir("experiment3");
  ExperimentConfig cfg = small_run(out);
  cfg.n_terms = 3;
  cfg.geometry.enabled = false;
  std::ostringstream log;
  REQUIRE(run_experiment(cfg, log) == 0);
  std::istringstream csv(slurp(out / "errors.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) {
    ++rows;
    if (rows >= 2) CHECK(line.back() != ',');
  }
  CHECK(rows == 3);
  CHECK(fs::exists(out / "recon_003.pgm"));
  CHECK(slurp(out / "summary.txt").find("t0_estimate") == std::string::npos);
}

TEST_CASE("invalid configs leave no outputs") {
  const fs::path out = fresh_dir("invalid");
  ExperimentConfig cfg = small_run(out);
  cfg.solve.cfl = 0.9;  // passes the (0, 1) check, fails the leapfrog bound
  std::ostringstream log;
  CHECK_THROWS_AS(run_experiment(cfg, log), InvalidArgument);
  CHECK(!fs::exists(out));
  cfg = small_run(out);
  cfg.attenuation.d1 = -1;
  CHECK_THROWS_AS(run_experiment(cfg, log), InvalidArgument);
  CHECK_THROWS_AS(run_forward(cfg, log), InvalidArgument);
  CHECK(!fs::exists(out));
}

TEST_CASE("forward run outputs") {
  const fs::path out = fresh_dir("forward");
  ExperimentConfig cfg = small_run(out);
  cfg.solve.snapshot_every = 50;
  std::ostringstream log;
  REQUIRE(run_forward(cfg, log) == 0);
  for (const char* f : {"trace.tatt", "final_u.tatf", "final_ut.tatf", "energy.csv", "summary.txt"})
    CHECK_MESSAGE(fs::exists(out / f), f);
  CHECK(fs::exists(out / "snapshots" / "u_000000.tatf"));
  CHECK(fs::exists(out / "snapshots" / "u_000050.tatf"));
  const BoundaryTrace t = read_trace(out / "trace.tatt", make_square_grid(41));
  CHECK(t.sup_norm() > 0.0);
}

TEST_CASE("selftest passes") {
  std::ostringstream log;
  CHECK(run_selftest(log));
  CHECK(log.str().find("FAIL") == std::string::npos);
}
