// Command-line front end: forward, reconstruct, geodesic, render, selftest.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "tat/error.hpp"
#include "tat/experiment.hpp"
#include "tat/io.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::string variant;
  std::optional<std::size_t> terms;
  std::string out;
  std::optional<std::size_t> grid;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  auto* config = cmd->add_option("--config", o.config_path, "JSON experiment configuration");
  cmd->add_option("--preset", o.preset_name, "example1 | example2 | example1-full | example2-full")
      ->excludes(config);
  cmd->add_option("--variant", o.variant, "signflip | homan");
  cmd->add_option("--terms", o.terms, "number of Neumann series terms")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--grid", o.grid, "nodes per axis")->check(CLI::Range(17, 100001));
}

tat::ExperimentConfig resolve(const CommonOptions& o) {
  tat::ExperimentConfig cfg = !o.config_path.empty()    ? tat::load_config(o.config_path)
                              : !o.preset_name.empty() ? tat::preset(o.preset_name)
                                                       : tat::preset("example1");
  if (!o.variant.empty()) cfg.variant = tat::parse_variant(o.variant);
  if (o.terms) cfg.n_terms = *o.terms;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.grid) cfg.grid = *o.grid;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermoacoustic tomography in attenuating media"};
  app.require_subcommand(1);

  CommonOptions forward_opts, recon_opts, geo_opts;
  auto* forward = app.add_subcommand("forward", "simulate the measured boundary trace");
  add_common(forward, forward_opts);
  auto* reconstruct = app.add_subcommand("reconstruct", "run the Neumann series reconstruction");
  add_common(reconstruct, recon_opts);
  auto* geodesic = app.add_subcommand("geodesic", "estimate T0 and T1 of the medium");
  add_common(geodesic, geo_opts);

  std::string render_in, render_out;
  std::optional<double> render_min, render_max;
  auto* render = app.add_subcommand("render", "write a .tatf field as an 8-bit PGM image");
  render->add_option("input", render_in, "field file")->required()->check(CLI::ExistingFile);
  render->add_option("output", render_out, "PGM path")->required();
  auto* lo = render->add_option("--min", render_min, "value mapped to black");
  auto* hi = render->add_option("--max", render_max, "value mapped to white");
  lo->needs(hi);
  hi->needs(lo);

  auto* selftest = app.add_subcommand("selftest", "quick consistency checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (forward->parsed()) return tat::run_forward(resolve(forward_opts), std::cout);
    if (reconstruct->parsed()) return tat::run_experiment(resolve(recon_opts), std::cout);
    if (geodesic->parsed()) {
      const tat::ExperimentConfig cfg = resolve(geo_opts);
      cfg.validate();
      const tat::Medium medium = tat::build_medium(tat::make_square_grid(cfg.grid), cfg.attenuation);
      const tat::GeometryEstimate est = tat::run_geometry(cfg, medium);
      std::cout << "t0_estimate " << est.t0 << '\n' << "t1_estimate " << est.t1 << '\n';
      return 0;
    }
    if (render->parsed()) {
      std::optional<std::pair<double, double>> range;
      if (render_min) range = std::pair{*render_min, *render_max};
      tat::render_pgm(tat::read_field(render_in), render_out, range);
      return 0;
    }
    if (selftest->parsed()) return tat::run_selftest(std::cout) ? 0 : 1;
  } catch (const tat::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
