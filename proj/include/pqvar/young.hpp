// SPDX-License-Identifier: MIT
/**
 * @file young.hpp
 * @brief One-parameter Young integrals as limits of left-point
 *        Riemann-Stieltjes sums, and integrals against local-time slices.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "pqvar/common.hpp"
#include "pqvar/pathcore.hpp"

namespace pqvar {

/// Value of a refinement-limit integral with its convergence history.
struct IntegralResult {
    double value = 0.0;  ///< sum at the finest level
    std::vector<std::pair<std::size_t, double>> levels;  ///< (intervals, sum)
    double gap = 0.0;    ///< |last - previous|
    bool converged = false;
};

/// Cauchy verdict: converged iff the last two gaps are both below tol.
void finalize_verdict(IntegralResult& result, double tol);

/// Dyadic schedule 2^lo, ..., 2^hi.
std::vector<std::size_t> dyadic_schedule(int lo, int hi);

struct Young1DOptions {
    std::vector<std::size_t> schedule = dyadic_schedule(4, 14);  ///< intervals per level
    double tol = 1e-4;
    /// Asserted variation exponents of f and g; checked for 1/p + 1/q > 1.
    std::optional<std::pair<double, double>> exponents;
    bool force = false;
    /// Points inserted into every level (e.g. discontinuities of f).
    std::vector<double> required_points;
};

/// sum f(x_{i-1}) (g(x_i) - g(x_{i-1})) on uniform refinements of [a, b].
IntegralResult young_integral_1d(const Fn1& f, const Fn1& g, double a, double b,
                                 const Young1DOptions& options = {});

/// Same on sampled paths over a common grid; levels are index subsamplings,
/// the finest level being the full grid.
IntegralResult young_integral_1d(const SampledPath& f, const SampledPath& g,
                                 const Young1DOptions& options = {});

/// Left-point sum over one explicit grid.
double riemann_stieltjes_sum(const Fn1& f, const std::vector<double>& xs,
                             const std::vector<double>& gs);

struct LocalTimeIntegralOptions {
    double tol = 1e-3;
    std::optional<double> asserted_q;  ///< variation exponent of f, must be < 2
    bool force = false;
    double support_tolerance = 1e-12;
};

/// int f d_x L = int f d_x Ltilde + sum f(x_k*) (jump of h at x_k*).
/// `ltilde` must vanish at both grid ends (compact support); two zero points
/// are padded beyond each end before summing. `h`, when given, shares the grid.
IntegralResult integrate_f_dL(const Fn1& f, const SampledPath& ltilde,
                              const std::optional<SampledPath>& h = std::nullopt,
                              const LocalTimeIntegralOptions& options = {});

/// |sum f(x_{k-1}) dL_k + sum L_k df_k| on the slice grid.
double integration_by_parts_check(const SampledPath& f, const SampledPath& local_time);

}  // namespace pqvar
