// SPDX-License-Identifier: MIT
/**
 * @file itocheck.hpp
 * @brief Generalized Ito formulas checked on simulated paths.
 *
 * Time-independent form:
 *     f(X_T) = f(X_0) + sum grad f(X_k) dX_k - int grad f(x) d_x L(T, x)
 * Time-dependent form adds sum d_s f(s_k, X_k) ds and replaces the last term
 * by the two-parameter integral of grad f against L over (s, x).
 *
 * grad f and d_s f are left derivatives. The residual of a report is
 *     |fEnd - fStart - dsTerm - stochasticIntegral + localTimeTerm|.
 * Refinement levels share one Brownian path: coarse increments are block sums
 * of the finest ones.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pqvar/common.hpp"
#include "pqvar/pathcore.hpp"
#include "pqvar/stochastic.hpp"
#include "pqvar/young2d.hpp"

namespace pqvar {

struct ItoTerms {
    double f_end = 0.0;
    double f_start = 0.0;
    std::optional<double> ds_term;
    double stochastic_integral = 0.0;
    double local_time_term = 0.0;
    /// Direct two-parameter sum, reported next to the summation-by-parts value.
    std::optional<double> direct_local_time_term;
};

/// |fEnd - fStart - ds - stochastic + localTime|, compensated.
double ito_residual(const ItoTerms& t);

/// max(1, |each term|), the scale for relative tolerances.
double ito_scale(const ItoTerms& t);

struct ItoLevel {
    std::size_t n_steps = 0;
    double residual = 0.0;
    double max_increment = 0.0;  ///< max |X_{k+1} - X_k|
    double level_spacing = 0.0;
    std::size_t level_count = 0;
    ItoTerms terms;
};

struct ItoReport {
    std::string function;
    std::string form;  ///< "time-independent" or "time-dependent"
    std::string convention = kLocalTimeConvention;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    ItoTerms terms;     ///< finest level
    double residual = 0.0;
    double scale = 1.0;
    std::vector<ItoLevel> refinement;
    std::vector<std::string> warnings;
    /// Finest-level residual with the realized quadratic variation,
    /// |f(X_T) - f(X_0) - sum f'(X_k) dX_k - 1/2 sum f''(X_k) dX_k^2|, when a
    /// second derivative is supplied.
    std::optional<double> classical_residual;
    /// Bound for |residual - classical_residual|: sup|f''| dx (sum |dX_k| + 2)
    /// for the level quadrature plus sup|f'''| sum |dX_k|^3 / 6 when given.
    std::optional<double> classical_tolerance;
    std::optional<SeriesCondition> condition;
};

struct ItoOptions {
    /// Step counts, each dividing the largest.
    std::vector<std::size_t> schedule{1024, 4096, 16384};
    /// Level spacing dx = level_factor * (T / n)^e, with e = level_exponent
    /// for the time-independent form (one stored slice) and
    /// field_level_exponent for the time-dependent form (all slices stored).
    double level_factor = 0.25;
    double level_exponent = 1.0;
    double field_level_exponent = 0.5;
    /// Level cells are bisected (at most max_refinement_depth times) while
    /// the left derivative varies by more than oscillation_scale * dx across
    /// the cell; breakpoints of the left derivative are always levels.
    double oscillation_scale = 4.0;
    int max_refinement_depth = 12;
    /// Time-dependent form: steps per time slice of the local-time field.
    std::size_t slice_stride = 16;
    double jump_threshold = 25.0;
    /// Asserted variation exponent of grad f (time-independent; must be < 2).
    std::optional<double> asserted_q;
    /// Hypotheses of the time-dependent form: gamma-variation of grad f in x
    /// (gamma < 2) and (p, q) with 2q + 1 > 2pq.
    double gamma = 1.0;
    double p = 1.0;
    double q = 1.0;
    bool force = false;
    /// Optional f'' and sup bounds for the classical comparison.
    Fn1 second_derivative;
    std::optional<double> second_derivative_bound;
    std::optional<double> third_derivative_bound;
};

ItoReport verify_ito_time_independent(const ScalarFunction& f, const SemimartingaleSpec& spec,
                                      const ItoOptions& options = {});

ItoReport verify_ito_time_dependent(const FieldFunction& f, const SemimartingaleSpec& spec,
                                    const ItoOptions& options = {});

/// Runs one report per replicate stream (seed fixed, stream = base + r) in parallel.
std::vector<ItoReport> ito_ensemble(const ScalarFunction& f, const SemimartingaleSpec& spec,
                                    std::size_t replicates, const ItoOptions& options = {});
std::vector<ItoReport> ito_ensemble(const FieldFunction& f, const SemimartingaleSpec& spec,
                                    std::size_t replicates, const ItoOptions& options = {});

struct RefinementSummary {
    std::vector<std::size_t> n_steps;
    std::vector<double> median_residual;
    bool median_nonincreasing = false;
    double final_over_first = 0.0;
    double fraction_monotone = 0.0;  ///< replicates with nonincreasing residuals
};

RefinementSummary summarize_refinement(const std::vector<ItoReport>& reports);

struct MollifiedRow {
    int order = 0;
    double mollified_term = 0.0;  ///< -int f_n' d_x L, the classical second-order term
    double young_term = 0.0;      ///< -int grad f d_x L
    double gap = 0.0;
    std::optional<double> rhs_gap;  ///< |f_n(X_0) + sum f_n'(X_k) dX_k + term - f(X_T)|
};

struct MollifiedRouteTable {
    std::string function;
    std::size_t n_steps = 0;
    std::vector<MollifiedRow> rows;
    bool shrinking = true;  ///< gaps strictly decrease in n
    double scale = 1.0;
};

/// Classical-route second-order term with the mollified f_n against the
/// Young-route term on the same path and level grid.
MollifiedRouteTable mollified_route_check(const ScalarFunction& f, const SemimartingaleSpec& spec,
                                          const std::vector<int>& orders,
                                          const ItoOptions& options = {});

/// Time-dependent variant: f is mollified in x only, and both terms are
/// two-parameter integrals via summation by parts.
MollifiedRouteTable mollified_route_check(const FieldFunction& f, const SemimartingaleSpec& spec,
                                          const std::vector<int>& orders,
                                          const ItoOptions& options = {});

}  // namespace pqvar
