// SPDX-License-Identifier: MIT
/**
 * @file common.hpp
 * @brief Shared aliases, error types and numerically careful helpers.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pqvar {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

/// Malformed input: bad parameters, inconsistent grids, unknown names.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A mathematical precondition (variation exponents, series condition) fails
/// and the caller did not force the computation.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double v) noexcept {
        add(v);
        return *this;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// n equally spaced points on [a, b], endpoints exact.
std::vector<double> linspace(double a, double b, std::size_t n);

/// Strictly increasing check.
bool strictly_increasing(const std::vector<double>& v) noexcept;

/// Sorted union of two sorted sequences, dropping duplicates.
std::vector<double> merge_sorted_unique(const std::vector<double>& a,
                                        const std::vector<double>& b);

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency() threads.
/// Each index is processed exactly once; callers write results into
/// per-index slots so reductions can be done in index order afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pqvar
