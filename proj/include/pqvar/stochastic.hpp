// SPDX-License-Identifier: MIT
/**
 * @file stochastic.hpp
 * @brief Euler simulation of X = M + V and local-time estimators.
 *
 * Local time follows the Tanaka normalization without the factor 1/2:
 *
 *     L(t, x) = (X_t - x)^+ - (X_0 - x)^+ - sum_{k<j} 1{X_k > x} (X_{k+1} - X_k)
 *
 * which is half of the usual semimartingale local time. The occupation
 * estimator carries the matching 1/2.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pqvar/common.hpp"
#include "pqvar/pathcore.hpp"

namespace pqvar {

inline constexpr const char* kLocalTimeConvention = "tanaka-no-half";

/// Counter-based generator: draw k of stream (seed, stream) is
/// splitmix64(key + (k + 1) * golden) with key = splitmix64(seed ^ splitmix64(stream)).
/// Normals come from Box-Muller on pairs of draws.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform on (0, 1).
    double uniform();
    double normal();

    static std::uint64_t mix(std::uint64_t z);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::optional<double> spare_;
};

struct SemimartingaleSpec {
    double T = 1.0;
    std::size_t n_steps = 1024;
    Fn2 drift = [](double, double) { return 0.0; };       ///< b(s, x)
    Fn2 volatility = [](double, double) { return 1.0; };  ///< sigma(s, x)
    double x0 = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string drift_name = "0";
    std::string volatility_name = "1";

    void validate() const;
};

/// X with its martingale part M, drift part V and bracket <M>, on s_k = k T / n.
struct SimulatedPaths {
    SampledPath X;
    SampledPath M;
    SampledPath V;
    SampledPath QV;
};

/// Standard normal increments scaled by sqrt(T / n) for the spec's stream.
std::vector<double> brownian_increments(const SemimartingaleSpec& spec);

/// Sums consecutive blocks of `factor` increments (coarse path of the same
/// Brownian motion).
std::vector<double> coarsen_increments(const std::vector<double>& dw, std::size_t factor);

SimulatedPaths simulate(const SemimartingaleSpec& spec);

/// Euler scheme driven by given Brownian increments (size n_steps).
SimulatedPaths simulate(const SemimartingaleSpec& spec, const std::vector<double>& dw);

/// Uniform levels at integer multiples of `spacing` covering the path range
/// with one spare level on each side, merged with `extra` points.
std::vector<double> level_grid(const SampledPath& X, double spacing,
                               const std::vector<double>& extra = {});

/// Time indices 0, stride, 2 stride, ..., always ending at the last sample.
std::vector<std::size_t> time_indices(std::size_t n_samples, std::size_t stride);

struct LocalTimeField {
    std::vector<double> times;
    std::vector<double> levels;
    SampledField L;       ///< rows: times, columns: levels
    SampledField Ltilde;  ///< continuous part
    SampledField h;       ///< cumulative jump part
    std::string convention = kLocalTimeConvention;
    double resolution = 0.0;  ///< max |X_{k+1} - X_k|

    [[nodiscard]] SampledPath slice(std::size_t row) const { return L.row(row); }
    [[nodiscard]] SampledPath final_slice() const { return L.row(L.nx() - 1); }
};

/// Discrete Tanaka local time. Levels must cover [min X, max X]; L is set to
/// exactly zero below min X, where the indicator sum telescopes. The jump part
/// is extracted with `jump_threshold` (infinity disables detection).
LocalTimeField local_time_tanaka(const SimulatedPaths& paths, const std::vector<double>& levels,
                                 const std::vector<std::size_t>& time_index,
                                 double jump_threshold = 25.0);

/// Occupation estimator sum_k 1{|X_k - x| < eps} d<M>_k / (4 eps).
LocalTimeField local_time_occupation(const SimulatedPaths& paths,
                                     const std::vector<double>& levels,
                                     const std::vector<std::size_t>& time_index, double eps,
                                     double jump_threshold = 25.0);

struct OccupationCheck {
    double lhs = 0.0;         ///< int phi(x) L(t, x) dx (trapezoid)
    double rhs = 0.0;         ///< 1/2 sum phi(X_k) d<M>_k up to t
    double difference = 0.0;  ///< lhs - rhs
    double residual = 0.0;    ///< |lhs - rhs|
};

/// Compares both sides of the occupation identity at field row `row`
/// (default: last row).
OccupationCheck occupation_identity_check(const Fn1& phi, const LocalTimeField& field,
                                          const SimulatedPaths& paths,
                                          std::optional<std::size_t> row = std::nullopt);

struct JumpDecomposition {
    SampledField Ltilde;
    SampledField h;
    std::vector<double> jump_points;  ///< x_k*, right endpoints of flagged cells
    double local_scale = 0.0;
};

/// Flags x-cells where |L(T, x_{i+1}) - L(T, x_i)| exceeds threshold times the
/// local scale, the larger of the median nonzero cell increment and
/// `resolution`. Jump heights per row are the cell increment minus the mean of
/// its two neighbours; h accumulates them in x.
JumpDecomposition decompose_local_time(const SampledField& L, double jump_threshold,
                                       double resolution = 0.0);

enum class ProbeVerdict { Stabilizing, Growing, Shrinking };

std::string to_string(ProbeVerdict v);

struct ProbeRow {
    double p = 0.0;
    std::vector<double> variation;  ///< per refinement level
    double relative_change = 0.0;   ///< last two levels
    ProbeVerdict verdict = ProbeVerdict::Stabilizing;
};

struct ExponentProbe {
    std::vector<std::size_t> level_counts;  ///< intervals per level grid
    std::vector<ProbeRow> rows;
};

/// p-variation of L(T, .) on nested uniform level grids over [min X, max X]
/// with 2^k intervals for k in `refinement_exponents`. Verdicts compare the
/// last two levels against a 10% relative change.
ExponentProbe pvar_exponent_probe(const SimulatedPaths& paths, const std::vector<double>& p_list,
                                  const std::vector<int>& refinement_exponents = {6, 7, 8, 9, 10});

/// Same from precomputed slices, coarsest first.
ExponentProbe pvar_exponent_probe(const std::vector<SampledPath>& slices,
                                  const std::vector<double>& p_list);

}  // namespace pqvar
