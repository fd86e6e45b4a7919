// SPDX-License-Identifier: MIT
/**
 * @file variation.hpp
 * @brief One- and two-parameter variation of sampled paths and fields.
 *
 * All suprema are taken over partitions drawn from the sample grid. One
 * parameter variations are exact (dynamic programming over the grid); two
 * parameter variations are exact by enumeration on small grids and otherwise
 * reported as lower bounds from a local search. The report always says which.
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

/// A gauge Phi: [0, inf) -> [0, inf), strictly increasing from 0, with inverse.
class ConvexGauge {
public:
    /// Phi(u) = u^p, p >= 1.
    static ConvexGauge power(double p);
    /// Caller-supplied gauge. `convex` is the caller's assertion; validate()
    /// checks monotonicity and the inverse numerically.
    static ConvexGauge user(std::string name, Fn1 phi, Fn1 inverse, bool convex = true);

    [[nodiscard]] double operator()(double u) const;
    [[nodiscard]] double inverse(double u) const;

    [[nodiscard]] bool is_power() const noexcept { return exponent_.has_value(); }
    [[nodiscard]] std::optional<double> exponent() const noexcept { return exponent_; }
    [[nodiscard]] bool is_linear() const noexcept { return exponent_ && *exponent_ == 1.0; }
    [[nodiscard]] bool convex() const noexcept { return convex_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    /// Throws InputError when Phi(0) != 0, Phi is not strictly increasing on a
    /// log-spaced check set, or Phi(inverse(u)) misses u by more than 1e-9
    /// (relative).
    void validate() const;

private:
    std::string name_;
    std::optional<double> exponent_;
    Fn1 phi_;
    Fn1 inverse_;
    bool convex_ = true;
};

enum class Exactness { ExactOnGrid, LowerBound, UpperBound };

std::string to_string(Exactness e);

struct VariationReport {
    std::vector<double> exponents;   ///< (p) or (p, q); empty for user gauges
    std::vector<std::string> gauges; ///< gauge descriptors, one per axis
    double value = 0.0;
    Partition1D witness;             ///< x (or only) axis
    std::optional<Partition1D> witness_y;
    Exactness exactness = Exactness::ExactOnGrid;
};

/// Sum of Phi(|v_k - v_{k-1}|) over the partition, accumulated left to right.
double partition_variation_sum(const SampledPath& path, const Partition1D& partition,
                               const ConvexGauge& gauge);

/// Exact grid supremum of sum |dv|^p via dynamic programming.
VariationReport p_variation_exact(const SampledPath& path, double p);

/// Exact grid supremum of sum Phi(|dv|).
VariationReport phi_variation_exact(const SampledPath& path, const ConvexGauge& gauge);

struct DyadicBound {
    double value = 0.0;                ///< bound at n_max
    double constant = 0.0;             ///< c(p, gamma) actually used
    std::vector<double> partial_sums;  ///< bound at n_max = 1, 2, ...
    Exactness exactness = Exactness::UpperBound;
};

/// Default c(p, gamma) = (sum_{n>=1} n^{-gamma/(p-1)})^{p-1}; 1 when p = 1.
double default_dyadic_constant(double p, double gamma);

/// c * sum_{n=1}^{n_max} n^gamma sum_k |f(a_k^n) - f(a_{k-1}^n)|^p with
/// a_k^n = a + k 2^{-n} (b - a). The path must be sampled on a uniform grid
/// of 2^N intervals with N >= n_max.
DyadicBound dyadic_variation_bound(const SampledPath& dyadic_path, int n_max, double p,
                                   double gamma, std::optional<double> c = std::nullopt);

/// Same bound for a function evaluable at dyadic points of [a, b].
DyadicBound dyadic_variation_bound(const Fn1& f, double a, double b, int n_max, double p,
                                   double gamma, std::optional<double> c = std::nullopt);

/// Sum over y-cells of Psi(sum over x-cells of Phi(|double increment|)) for
/// a given product partition.
double pq_partition_sum(const SampledField& field, const Partition1D& xpart,
                        const Partition1D& ypart, const ConvexGauge& phi1,
                        const ConvexGauge& psi1);

struct PqSearchOptions {
    std::size_t exhaustive_budget = 10;  ///< max interior points per axis for enumeration
    std::size_t restarts = 8;
    std::uint64_t seed = 0x5eedULL;
};

/// Two-parameter Phi1, Psi1 variation with Phi1(u) = u^p, Psi1(u) = u^q.
VariationReport pq_variation_grid(const SampledField& field, double p, double q,
                                  const PqSearchOptions& options = {});

/// Two-parameter variation for arbitrary gauges.
VariationReport pq_variation_grid(const SampledField& field, const ConvexGauge& phi1,
                                  const ConvexGauge& psi1, const PqSearchOptions& options = {});

enum class Axis { X, Y };

/// max over lines of the other axis of the exact Phi-variation along `axis`.
double uniform_axis_variation(const SampledField& field, Axis axis, const ConvexGauge& gauge);

/// Coordinate lines that must be part of every integration partition.
struct JumpSets {
    std::vector<double> x;  ///< H
    std::vector<double> y;  ///< H'
};

/// Flags every one-cell strip whose two-parameter variation exceeds epsilon.
/// A flagged cell [x_i, x_{i+1}] contributes its right endpoint x_{i+1}.
JumpSets detect_large_jumps(const SampledField& field, double epsilon, const ConvexGauge& phi1,
                            const ConvexGauge& psi1);

}  // namespace pqvar
