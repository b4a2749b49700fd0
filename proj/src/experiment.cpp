#include "tat/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "tat/error.hpp"
#include "tat/io.hpp"
#include "tat/raygeo.hpp"

namespace tat {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string numbered(const char* pattern, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, k);
  return buf;
}

// Strict readers: the schema is closed and every value has one JSON type.

void check_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw FormatError(std::string(where) + " must be an object");
  for (const auto& item : obj.items())
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw FormatError("unknown key '" + item.key() + "' in " + std::string(where));
}

void read(const json& obj, const char* key, double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) throw FormatError(std::string(key) + " must be a number");
  out = v.get<double>();
}

template <std::unsigned_integral U>
void read(const json& obj, const char* key, U& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) throw FormatError(std::string(key) + " must be a nonnegative integer");
  out = v.get<U>();
}

void read(const json& obj, const char* key, bool& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw FormatError(std::string(key) + " must be a boolean");
  out = v.get<bool>();
}

void read(const json& obj, const char* key, Eigen::Vector2d& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw FormatError(std::string(key) + " must be a pair of numbers");
  out = {v[0].get<double>(), v[1].get<double>()};
}

json to_json(const Eigen::Vector2d& v) { return json::array({v.x(), v.y()}); }

}  // namespace

void ExperimentConfig::validate() const {
  if (grid < 17) throw InvalidArgument("grid must have at least 17 nodes per axis");
  attenuation.validate();
  if (!(blur_radius >= 0.0) || !std::isfinite(blur_radius))
    throw InvalidArgument("blur radius must be nonnegative");
  solve.validate();
  if (n_terms < 1) throw InvalidArgument("n_terms must be at least 1");
  if (output_dir.empty()) throw InvalidArgument("output_dir must not be empty");
  if (geometry.boundary_samples < 8 || geometry.angle_samples < 8)
    throw InvalidArgument("ray sampling counts must be at least 8");
  if (geometry.t1_samples < 16) throw InvalidArgument("t1_samples must be at least 16");
  if (!(geometry.ray_step > 0.0) || !std::isfinite(geometry.ray_step))
    throw InvalidArgument("ray_step must be positive");
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig cfg;
  std::string_view base = name;
  if (name.ends_with("-full")) {
    base = name.substr(0, name.size() - 5);
    cfg.grid = 501;
  }
  if (base == "example1") {
    cfg.attenuation.d1 = 9.0;
  } else if (base == "example2") {
    cfg.attenuation.d1 = 5.0;
  } else {
    throw InvalidArgument("unknown preset '" + std::string(name) + "'");
  }
  return cfg;
}

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, "config",
             {"grid", "medium", "solve", "variant", "n_terms", "output_dir", "seed", "geometry"});

  ExperimentConfig cfg;
  read(doc, "grid", cfg.grid);
  read(doc, "n_terms", cfg.n_terms);
  read(doc, "seed", cfg.seed);
  if (doc.contains("variant")) {
    if (!doc["variant"].is_string()) throw FormatError("variant must be a string");
    try {
      cfg.variant = parse_variant(doc["variant"].get<std::string>());
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what());
    }
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw FormatError("output_dir must be a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }

  if (doc.contains("medium")) {
    const json& m = doc["medium"];
    check_keys(m, "medium",
               {"d1", "d2", "d3", "center1", "radius1_sq", "center2", "radius2_sq", "taper_width",
                "blur_radius"});
    AttenuationParams& a = cfg.attenuation;
    read(m, "d1", a.d1);
    read(m, "d2", a.d2);
    read(m, "d3", a.d3);
    read(m, "center1", a.center1);
    read(m, "radius1_sq", a.radius1_sq);
    read(m, "center2", a.center2);
    read(m, "radius2_sq", a.radius2_sq);
    read(m, "taper_width", a.taper_width);
    read(m, "blur_radius", cfg.blur_radius);
  }

  if (doc.contains("solve")) {
    const json& s = doc["solve"];
    check_keys(s, "solve", {"T", "cfl", "pml_cells", "pml_strength", "box_margin", "snapshot_every"});
    read(s, "T", cfg.solve.T);
    read(s, "cfl", cfg.solve.cfl);
    read(s, "pml_cells", cfg.solve.pml_cells);
    read(s, "box_margin", cfg.solve.box_margin);
    read(s, "snapshot_every", cfg.solve.snapshot_every);
    if (s.contains("pml_strength") && !s["pml_strength"].is_null()) {
      double strength = 0.0;
      read(s, "pml_strength", strength);
      cfg.solve.pml_strength = strength;
    }
  }

  if (doc.contains("geometry")) {
    const json& g = doc["geometry"];
    check_keys(g, "geometry",
               {"enabled", "boundary_samples", "angle_samples", "ray_step", "t1_samples"});
    read(g, "enabled", cfg.geometry.enabled);
    read(g, "boundary_samples", cfg.geometry.boundary_samples);
    read(g, "angle_samples", cfg.geometry.angle_samples);
    read(g, "ray_step", cfg.geometry.ray_step);
    read(g, "t1_samples", cfg.geometry.t1_samples);
  }
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  const AttenuationParams& a = cfg.attenuation;
  json doc;
  doc["grid"] = cfg.grid;
  doc["medium"] = {{"d1", a.d1},
                   {"d2", a.d2},
                   {"d3", a.d3},
                   {"center1", to_json(a.center1)},
                   {"radius1_sq", a.radius1_sq},
                   {"center2", to_json(a.center2)},
                   {"radius2_sq", a.radius2_sq},
                   {"taper_width", a.taper_width},
                   {"blur_radius", cfg.blur_radius}};
  doc["solve"] = {{"T", cfg.solve.T},
                  {"cfl", cfg.solve.cfl},
                  {"pml_cells", cfg.solve.pml_cells},
                  {"pml_strength", cfg.solve.pml_strength ? json(*cfg.solve.pml_strength) : json(nullptr)},
                  {"box_margin", cfg.solve.box_margin},
                  {"snapshot_every", cfg.solve.snapshot_every}};
  doc["variant"] = std::string(to_string(cfg.variant));
  doc["n_terms"] = cfg.n_terms;
  doc["output_dir"] = cfg.output_dir.string();
  doc["seed"] = cfg.seed;
  doc["geometry"] = {{"enabled", cfg.geometry.enabled},
                     {"boundary_samples", cfg.geometry.boundary_samples},
                     {"angle_samples", cfg.geometry.angle_samples},
                     {"ray_step", cfg.geometry.ray_step},
                     {"t1_samples", cfg.geometry.t1_samples}};
  return doc.dump(2) + "\n";
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void render_pgm(const ScalarField2D& field, const fs::path& path,
                std::optional<std::pair<double, double>> range) {
  const Grid2D& g = field.grid();
  const auto [lo, hi] = range.value_or(std::pair{field.min(), field.max()});
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InvalidArgument("render range must be finite");

  std::string pixels(g.size(), '\0');
  for (std::size_t row = 0; row < g.ny; ++row) {
    const std::size_t j = g.ny - 1 - row;
    for (std::size_t i = 0; i < g.nx; ++i) {
      double level = 127.5;
      if (hi != lo) level = 255.0 * (field(i, j) - lo) / (hi - lo);
      const long byte = std::lround(std::clamp(level, 0.0, 255.0));
      pixels[row * g.nx + i] = static_cast<char>(static_cast<unsigned char>(byte));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << g.nx << ' ' << g.ny << "\n255\n";
  out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw Error("short write to " + path.string());
}

GeometryEstimate run_geometry(const ExperimentConfig& config, const Medium& medium) {
  const GeometryConfig& geo = config.geometry;
  const auto rays = survey_rays(medium, geo.boundary_samples, geo.angle_samples, geo.ray_step);
  fs::create_directories(config.output_dir);
  std::ofstream csv(config.output_dir / "rays.csv");
  csv << "x,y,angle,length\n";
  GeometryEstimate est;
  for (const auto& r : rays) {
    csv << fixed(r.start.x(), 9) << ',' << fixed(r.start.y(), 9) << ',' << fixed(r.angle, 9) << ','
        << fixed(r.length, 9) << '\n';
    est.t0 = std::max(est.t0, r.length);
  }
  est.t1 = estimate_T1(medium, geo.t1_samples);
  return est;
}

namespace {

struct Setup {
  Grid2D grid;
  Medium medium;
  ScalarField2D truth;
  SolveConfig solve;
};

// Everything that can reject the configuration runs here, before any file
// is created.
Setup prepare(const ExperimentConfig& config) {
  config.validate();
  Setup s{make_square_grid(config.grid), {}, {}, config.solve};
  s.medium = build_medium(s.grid, config.attenuation);
  s.truth = build_phantom(s.grid, config.blur_radius);
  s.solve.snapshot_dir = config.output_dir / "snapshots";
  time_axis(s.medium, s.solve);
  return s;
}

void write_inputs(const ExperimentConfig& config, const Setup& s) {
  fs::create_directories(config.output_dir);
  if (s.solve.snapshot_every > 0) fs::create_directories(s.solve.snapshot_dir);
  fs::remove(config.output_dir / "FAILED");
  std::ofstream(config.output_dir / "config.json") << serialize_config(config);
  write_field(s.medium.c, config.output_dir / "medium_c.tatf");
  write_field(s.medium.a, config.output_dir / "medium_a.tatf");
  write_field(s.truth, config.output_dir / "phantom.tatf");
  render_pgm(s.truth, config.output_dir / "truth.pgm");
}

void write_failure(const fs::path& dir, const std::string& what) {
  std::ofstream(dir / "FAILED") << what << '\n';
}

}  // namespace

int run_forward(const ExperimentConfig& config, std::ostream& log) {
  Setup s = prepare(config);
  write_inputs(config, s);
  const fs::path& out = config.output_dir;
  ForwardResult fr;
  try {
    fr = forward_solve(tat_initial_data(s.truth, s.medium), s.medium, s.solve);
  } catch (const InstabilityError& e) {
    write_failure(out, e.what());
    log << "forward solve failed: " << e.what() << '\n';
    return 2;
  }
  write_trace(fr.trace, out / "trace.tatt");
  write_field(fr.final.u, out / "final_u.tatf");
  write_field(fr.final.ut, out / "final_ut.tatf");

  std::ofstream energy(out / "energy.csv");
  energy << "step,t,energy\n";
  for (std::size_t n = 0; n < fr.energy_series.size(); ++n)
    energy << n << ',' << fixed(static_cast<double>(n) * fr.dt, 9) << ','
           << fixed(fr.energy_series[n], 12) << '\n';

  const double rise = energy_rise_rate(fr.energy_series, fr.dt);
  const Region omega = Region::whole(s.grid);
  std::ofstream summary(out / "summary.txt");
  summary << "grid " << config.grid << '\n'
          << "dt " << fixed(fr.dt, 9) << '\n'
          << "steps " << fr.trace.nt() - 1 << '\n'
          << "initial_energy " << fixed(fr.energy_series.front(), 9) << '\n'
          << "final_energy " << fixed(fr.energy_series.back(), 9) << '\n'
          << "damping_integral " << fixed(fr.damping_integral, 9) << '\n'
          << "extended_energy " << fixed(extended_energy(fr, s.medium.c, omega), 9) << '\n'
          << "energy_rise_rate " << fixed(rise, 9) << '\n'
          << "trace_sup " << fixed(fr.trace.sup_norm(), 9) << '\n';
  log << "forward: " << fr.trace.nt() << " samples, dt " << fr.dt << ", energy "
      << fr.energy_series.front() << " -> " << fr.energy_series.back() << '\n';
  return 0;
}

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
  Setup s = prepare(config);
  write_inputs(config, s);
  const fs::path& out = config.output_dir;
  const std::pair range{s.truth.min(), s.truth.max()};

  std::optional<GeometryEstimate> geometry;
  std::string geometry_note;
  if (config.geometry.enabled) {
    try {
      geometry = run_geometry(config, s.medium);
      log << "T0 estimate " << geometry->t0 << ", T1 estimate " << geometry->t1 << '\n';
    } catch (const Error& e) {
      geometry_note = e.what();
      log << "geometry estimate unavailable: " << e.what() << '\n';
    }
  }

  std::ofstream csv(out / "errors.csv");
  csv << "term,error_percent,contraction_ratio\n";
  auto observer = [&](std::size_t term, const ReconstructionReport& so_far) {
    render_pgm(so_far.iterates.back().u, out / numbered("recon_%03zu.pgm", term), range);
    const double err = so_far.errors_percent.back();
    csv << term << ',' << fixed(err) << ',';
    if (term > 1) csv << fixed(so_far.contraction_ratios.back());
    csv << '\n' << std::flush;
    log << "term " << term << ": error " << fixed(err, 3) << "%\n" << std::flush;
  };

  auto write_summary = [&](const std::vector<double>& errors, std::string_view status) {
    std::ofstream summary(out / "summary.txt");
    summary << "status " << status << '\n'
            << "variant " << to_string(config.variant) << '\n'
            << "grid " << config.grid << '\n'
            << "T " << fixed(s.solve.T) << '\n'
            << "terms_completed " << errors.size() << '\n';
    if (geometry)
      summary << "t0_estimate " << fixed(geometry->t0) << '\n' << "t1_estimate " << fixed(geometry->t1) << '\n';
    else if (!geometry_note.empty())
      summary << "geometry_unavailable " << geometry_note << '\n';
    if (!errors.empty())
      summary << "error_first_percent " << fixed(errors.front()) << '\n'
              << "error_final_percent " << fixed(errors.back()) << '\n';
  };

  std::vector<double> errors;
  try {
    const BoundaryTrace h = measure(tat_initial_data(s.truth, s.medium), s.medium, s.solve);
    write_trace(h, out / "trace.tatt");
    SolveConfig quiet = s.solve;
    quiet.snapshot_every = 0;
    auto tracking = [&](std::size_t term, const ReconstructionReport& so_far) {
      errors = so_far.errors_percent;
      observer(term, so_far);
    };
    const ReconstructionReport report =
        neumann_series(h, s.medium, quiet, config.variant, config.n_terms, s.truth, tracking);
    write_field(report.iterates.back().u, out / "recon_final.tatf");
  } catch (const InstabilityError& e) {
    write_failure(out, e.what());
    write_summary(errors, "failed");
    log << "reconstruction failed: " << e.what() << '\n';
    return 2;
  }
  write_summary(errors, "ok");
  return 0;
}

bool run_selftest(std::ostream& log) {
  bool all = true;
  auto check = [&](std::string_view name, auto&& body) {
    bool ok = false;
    std::string detail;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = e.what();
    }
    all = all && ok;
    log << (ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) log << " (" << detail << ')';
    log << '\n';
  };

  const Grid2D g = make_square_grid(33);
  const Medium flat(ScalarField2D(g, 1.0), ScalarField2D(g, 0.0));
  SolveConfig short_run;
  short_run.T = 0.5;
  short_run.pml_cells = 8;
  short_run.record_energy = false;

  check("harmonic extension reproduces x", [&](std::string& d) {
    std::vector<double> values;
    for (std::size_t k : boundary_nodes(g)) values.push_back(g.x(k % g.nx));
    const ScalarField2D ext = harmonic_extension(values, g);
    const double err = (ext - ScalarField2D::sample(g, [](double x, double) { return x; })).max_abs();
    d = "max error " + general(err);
    return err < 1e-10;
  });
  check("zero data gives zero trace", [&](std::string& d) {
    const ForwardResult fr = forward_solve(WavePair::zero(g), flat, short_run);
    d = "sup " + general(fr.trace.sup_norm());
    return fr.trace.sup_norm() == 0.0;
  });
  check("time reversals agree when a = 0", [&](std::string& d) {
    const Medium m(build_sound_speed(g, 0.1), ScalarField2D(g, 0.0));
    const auto f = ScalarField2D::sample(g, [](double x, double y) {
      return std::exp(-20.0 * ((x - 0.1) * (x - 0.1) + y * y));
    });
    const BoundaryTrace h = measure(tat_initial_data(f, m), m, short_run);
    const WavePair a = time_reverse(h, m, short_run, Variant::SignFlipped);
    const WavePair b = time_reverse(h, m, short_run, Variant::Homan);
    const double diff = std::max((a.u - b.u).max_abs(), (a.ut - b.ut).max_abs());
    d = "max difference " + general(diff);
    return diff <= 1e-12;
  });
  check("flat metric T0 and T1", [&](std::string& d) {
    const double t0 = estimate_T0(flat, 16, 16, 5e-3);
    const double t1 = estimate_T1(flat, 129);
    d = "T0 " + general(t0) + ", T1 " + general(t1);
    return std::abs(t0 - 2.0 * std::sqrt(2.0)) < 1e-2 * 2.0 * std::sqrt(2.0) && std::abs(t1 - 1.0) < 1e-2;
  });
  check("config round trip", [&](std::string&) {
    const ExperimentConfig cfg = preset("example2");
    return parse_config(serialize_config(cfg)) == cfg;
  });
  return all;
}

}  // namespace tat
