#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "tat/field.hpp"
#include "tat/media.hpp"
#include "tat/trace.hpp"
#include "tat/wave.hpp"

namespace tat {

/// Back-projection used by the time reversal.
enum class Variant {
  SignFlipped,  ///< backward solve of u_tt - a u_t = c^2 Lap u (damped in reversed time)
  Homan,        ///< backward solve of the original damped equation
};

std::string_view to_string(Variant v);
/// Accepts "signflip" and "homan".
Variant parse_variant(std::string_view name);
/// Damping sign passed to backward_solve.
int damping_sign(Variant v);

/// Boundary trace of the forward solve.
BoundaryTrace measure(const WavePair& f, const Medium& medium, const SolveConfig& cfg);

/// Harmonic extension of h(T) as terminal value, zero terminal velocity,
/// then the backward solve selected by `variant`.
WavePair time_reverse(const BoundaryTrace& h, const Medium& medium, const SolveConfig& cfg,
                      Variant variant);

/// K g = g - A(measure(g)).
WavePair error_op(const WavePair& g, const Medium& medium, const SolveConfig& cfg, Variant variant);

/// ||K g||_H / ||g||_H in the energy norm of the medium.
double contraction_ratio(const WavePair& g, const Medium& medium, const SolveConfig& cfg,
                         Variant variant);

/// ||f||_H / ||measure(f)||_{H^1((0,T) x boundary)}: the empirical constant
/// of the stability estimate for one datum.
double stability_ratio(const WavePair& f, const Medium& medium, const SolveConfig& cfg);

/// 100 ||recon - truth||_2 / ||truth||_2 over the nodes of Omega.
double relative_error(const ScalarField2D& recon, const ScalarField2D& truth);

struct ReconstructionReport {
  /// Partial sums; iterates[m] holds terms 0..m.
  std::vector<WavePair> iterates;
  /// Error of iterates[m].u against the truth (empty without truth).
  std::vector<double> errors_percent;
  /// ||residual_{m+1}||_H / ||residual_m||_H for m = 0..n_terms-2.
  std::vector<double> contraction_ratios;
};

/// Called after each term with its 1-based index and the report so far
/// (the partial sum is `so_far.iterates.back()`).
using TermObserver = std::function<void(std::size_t term, const ReconstructionReport& so_far)>;

/// Neumann series sum_m K^m A h truncated to n_terms terms. A failing term
/// raises InstabilityError carrying its 1-based index.
ReconstructionReport neumann_series(const BoundaryTrace& h, const Medium& medium,
                                    const SolveConfig& cfg, Variant variant, std::size_t n_terms,
                                    const std::optional<ScalarField2D>& truth = std::nullopt,
                                    const TermObserver& observer = {});

}  // namespace tat
