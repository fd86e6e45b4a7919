// SPDX-License-Identifier: MIT
/**
 * @file young2d.hpp
 * @brief Two-parameter Young integrals over product partitions.
 *
 * The integral of F against the rectangle increments of G is the limit of
 *
 *     sum_i sum_j F(x_{i-1}, y_{j-1}) [G(x_i,y_j) - G(x_{i-1},y_j)
 *                                      - G(x_i,y_{j-1}) + G(x_{i-1},y_{j-1})]
 *
 * over partitions that always contain the large-jump lines (JumpSets). The
 * summability condition on the variation gauges is checked separately by
 * check_series_condition; convergence of the sums themselves is judged by
 * Cauchy gaps between refinement levels, never by an absolute error claim.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pqvar/common.hpp"
#include "pqvar/pathcore.hpp"
#include "pqvar/variation.hpp"
#include "pqvar/young.hpp"

namespace pqvar {

/// Feasibility of the double series for power gauges Phi1 = u^p, Psi1 = u^q
/// with the split rho(u) = u^alpha, sigma(u) = u^{1-alpha}.
struct SeriesCondition {
    double p = 1.0;
    double q = 1.0;
    std::optional<double> gamma;
    double delta = 0.0;                  ///< margin used for the local-time exponent 2 + delta
    std::optional<double> alpha;         ///< chosen split exponent when feasible
    double alpha_lower = 0.0;            ///< 2 (1 - 1/p)
    double alpha_upper = 0.0;            ///< 1 / (p q)
    bool feasible = false;
    bool guaranteed = true;              ///< false when judged from partial sums only
    double n_exponent = 0.0;             ///< series exponent in n
    double m_exponent = 0.0;             ///< series exponent in m
    std::vector<std::pair<std::size_t, double>> partial_sums;  ///< (N, sum up to N)
    double tail_bound = 0.0;             ///< analytic bound on the full series (inf if divergent)
};

/// Power-gauge check. delta = 0 selects a margin automatically (half the
/// admissible range); a positive delta is used as given.
SeriesCondition check_series_condition(double p, double q, double delta = 0.0,
                                       std::size_t n_max = 1000,
                                       std::optional<double> gamma = std::nullopt);

/// General gauges: partial sums of
/// sum_{n,m} rho[phi(1/n)] sigma[psi(1/m)] phi1[(1/n) psi1(1/m)]
/// with rho = u^alpha, sigma = u^{1-alpha}. Feasibility is judged from the
/// relative growth of the last decade only (guaranteed = false).
SeriesCondition check_series_condition(const ConvexGauge& phi, const ConvexGauge& psi,
                                       const ConvexGauge& phi1, const ConvexGauge& psi1,
                                       double alpha, std::size_t n_max = 1000);

struct Rect {
    double x0 = 0.0;
    double x1 = 1.0;
    double y0 = 0.0;
    double y1 = 1.0;
};

enum class Corner { LowerLeft, UpperRight };

struct Young2DOptions {
    std::vector<std::size_t> schedule = dyadic_schedule(2, 10);  ///< cells per axis
    double tol = 1e-3;
    JumpSets jumps;
};

/// Fixed-grid two-parameter Riemann sum with the integrand taken at the
/// given cell corner. Rows are summed independently and reduced in order.
double riemann_sum_2d(const Fn2& F, const Fn2& G, const std::vector<double>& xs,
                      const std::vector<double>& ys, Corner corner = Corner::LowerLeft);

/// Same on sampled fields restricted to index subsets.
double riemann_sum_2d(const SampledField& F, const SampledField& G,
                      const std::vector<std::size_t>& xi, const std::vector<std::size_t>& yj,
                      Corner corner = Corner::LowerLeft);

/// Forward (lower-left) integral on dyadic product refinements of `domain`.
IntegralResult young_integral_2d(const Fn2& F, const Fn2& G, const Rect& domain,
                                 const Young2DOptions& options = {});
/// Backward (upper-right) variant.
IntegralResult young_integral_2d_backward(const Fn2& F, const Fn2& G, const Rect& domain,
                                          const Young2DOptions& options = {});

/// Sampled fields on a common grid; jump lines must be grid lines.
IntegralResult young_integral_2d(const SampledField& F, const SampledField& G,
                                 const Young2DOptions& options = {});
IntegralResult young_integral_2d_backward(const SampledField& F, const SampledField& G,
                                          const Young2DOptions& options = {});

/// Table S(E_p, E'_q) over variation-equalised partitions of F.
struct RefinementTrace {
    std::vector<std::vector<double>> x_partitions;  ///< E_0 ... E_pmax
    std::vector<std::vector<double>> y_partitions;  ///< E'_0 ... E'_qmax
    std::vector<std::vector<double>> sums;          ///< sums[p][q]
    /// S(p+1,q+1) - S(p+1,q) - S(p,q+1) + S(p,q), size pmax x qmax.
    std::vector<std::vector<double>> mixed_differences;
    double strip_delta = 0.0;  ///< a quarter of the smallest finest-level gap
};

/// Builds E_p by inserting, at each level, a splitting point into every cell
/// whose control mass exceeds 2^{-p} P, where the control of a cell is the
/// largest Phi-variation of F in x over the base grid lines in y (and
/// symmetrically with Psi for E'_q). `base` is the number of base-grid cells
/// per axis on which F is sampled.
RefinementTrace dyadic_refinement_trace(const Fn2& F, const Fn2& G, const Rect& domain, int pmax,
                                        int qmax, const ConvexGauge& phi = ConvexGauge::power(1.0),
                                        const ConvexGauge& psi = ConvexGauge::power(1.0),
                                        std::size_t base = 256);

struct SummationByParts {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

/// Discrete summation by parts for g against Ltilde on a shared (s, x) grid,
/// s along the first axis. Ltilde must vanish on both x-boundary lines and on
/// the initial time line.
///   lhs = sum_{i,j} g(s_j, x_i) [rectangle increment of Ltilde]
///   rhs = sum_{i,j} Ltilde(s_j, x_i) [rectangle increment of g]
///         - sum_i Ltilde(t, x_i) (g(t, x_i) - g(t, x_{i-1}))
SummationByParts summation_by_parts_2d(const SampledField& g, const SampledField& ltilde,
                                       double boundary_tolerance = 0.0);

/// One member of an approximating sequence.
struct ApproximationStep {
    std::string label;
    Fn2 F;
    Fn2 G;
};

/// F_n, G_n mollified in both variables for each order n, with f = 0 for
/// negative first argument and constant continuation below x_lower in the
/// second. `nodes` is the quadrature size of the mollifier on each axis.
std::vector<ApproximationStep> mollified_sequence(const Fn2& F, const Fn2& G,
                                                  const std::vector<int>& orders,
                                                  std::optional<double> x_lower = 0.0,
                                                  std::size_t nodes = 32);

struct DominatedConvergenceTable {
    std::vector<std::string> labels;
    std::vector<double> integrals;
    std::vector<double> gaps;           ///< |int F_k dG_k - int F dG|
    std::vector<double> sup_distance;   ///< spot-checked sup |F_k - F| + sup |G_k - G|
    std::vector<double> variation_bounds;  ///< 1,1-variation of G_k on the check grid
    double limit = 0.0;
    bool decaying = false;              ///< final gap < first / 10 or < tol
    bool strictly_decreasing = false;
};

/// Integrates each (F_k, G_k) at the finest level of the schedule and compares
/// against the limit integral of (F, G). The sequence must be uniformly
/// convergent on 10^3 spot points (the final sup distance must not exceed
/// the first); otherwise InputError is thrown.
DominatedConvergenceTable dominated_convergence_test(const std::vector<ApproximationStep>& sequence,
                                                     const Fn2& F, const Fn2& G,
                                                     const Rect& domain,
                                                     const Young2DOptions& options = {});

}  // namespace pqvar
