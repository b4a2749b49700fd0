#include "tat/reconstruct.hpp"

#include <string>

namespace tat {

std::string_view to_string(Variant v) { return v == Variant::SignFlipped ? "signflip" : "homan"; }

Variant parse_variant(std::string_view name) {
  if (name == "signflip") return Variant::SignFlipped;
  if (name == "homan") return Variant::Homan;
  throw InvalidArgument("unknown variant '" + std::string(name) + "' (expected signflip|homan)");
}

int damping_sign(Variant v) { return v == Variant::SignFlipped ? -1 : 1; }

BoundaryTrace measure(const WavePair& f, const Medium& medium, const SolveConfig& cfg) {
  SolveConfig quiet = cfg;
  quiet.record_energy = false;
  quiet.snapshot_every = 0;
  return forward_solve(f, medium, quiet).trace;
}

WavePair time_reverse(const BoundaryTrace& h, const Medium& medium, const SolveConfig& cfg,
                      Variant variant) {
  const Grid2D& grid = medium.grid();
  if (h.sensors != boundary_nodes(grid))
    throw InvalidArgument("trace sensors do not match the medium grid");
  const auto last = h.values.row(h.values.rows() - 1);
  const std::vector<double> at_t(last.begin(), last.end());
  const WavePair terminal(harmonic_extension(at_t, grid), ScalarField2D(grid));
  return backward_solve(h, terminal, medium, damping_sign(variant), cfg);
}

WavePair error_op(const WavePair& g, const Medium& medium, const SolveConfig& cfg, Variant variant) {
  return g - time_reverse(measure(g, medium, cfg), medium, cfg, variant);
}

double contraction_ratio(const WavePair& g, const Medium& medium, const SolveConfig& cfg,
                         Variant variant) {
  const double norm = energy_norm(g, medium.c);
  if (!(norm > 0.0)) throw InvalidArgument("contraction ratio of a zero-energy state");
  return energy_norm(error_op(g, medium, cfg, variant), medium.c) / norm;
}

double stability_ratio(const WavePair& f, const Medium& medium, const SolveConfig& cfg) {
  const double data = trace_h1_norm(measure(f, medium, cfg), medium.grid());
  if (!(data > 0.0)) throw InvalidArgument("stability ratio with a vanishing trace");
  return energy_norm(f, medium.c) / data;
}

double relative_error(const ScalarField2D& recon, const ScalarField2D& truth) {
  if (!(recon.grid() == truth.grid())) throw InvalidArgument("reconstruction and truth grids differ");
  const double denom = truth.norm();
  if (!(denom > 0.0)) throw InvalidArgument("relative error against a zero-norm truth");
  return 100.0 * (recon - truth).norm() / denom;
}

ReconstructionReport neumann_series(const BoundaryTrace& h, const Medium& medium,
                                    const SolveConfig& cfg, Variant variant, std::size_t n_terms,
                                    const std::optional<ScalarField2D>& truth,
                                    const TermObserver& observer) {
  if (n_terms < 1) throw InvalidArgument("the series needs at least one term");
  ReconstructionReport report;
  report.iterates.reserve(n_terms);
  auto record = [&](std::size_t term, WavePair sum) {
    if (truth) report.errors_percent.push_back(relative_error(sum.u, *truth));
    report.iterates.push_back(std::move(sum));
    if (observer) observer(term, report);
  };

  auto guarded = [&](std::size_t term, auto&& fn) {
    try {
      return fn();
    } catch (const InvalidArgument& e) {
      throw InstabilityError(std::string("Neumann term failed: ") + e.what(), term);
    } catch (const InstabilityError& e) {
      throw InstabilityError(std::string("Neumann term failed: ") + e.what(), term);
    }
  };

  WavePair residual = guarded(1, [&] { return time_reverse(h, medium, cfg, variant); });
  double residual_norm = energy_norm(residual, medium.c);
  record(1, residual);
  for (std::size_t term = 2; term <= n_terms; ++term) {
    residual = guarded(term, [&] { return error_op(residual, medium, cfg, variant); });
    const double next_norm = energy_norm(residual, medium.c);
    report.contraction_ratios.push_back(residual_norm > 0.0 ? next_norm / residual_norm : 0.0);
    residual_norm = next_norm;
    record(term, report.iterates.back() + residual);
  }
  return report;
}

}  // namespace tat
