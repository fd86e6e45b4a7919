// SPDX-License-Identifier: MIT
/**
 * @file pathcore.hpp
 * @brief Sampled paths and fields, grid partitions, named test functions and
 *        mollifier smoothing.
 *
 * Everything here is immutable after construction. Paths and fields are the
 * universe over which partition suprema and Riemann sums are taken by the
 * other modules.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pqvar/common.hpp"

namespace pqvar {

/// A one-parameter function known on a strictly increasing grid.
class SampledPath {
public:
    SampledPath(std::vector<double> xs, std::vector<double> values, std::string label = {});

    [[nodiscard]] const std::vector<double>& xs() const noexcept { return xs_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    [[nodiscard]] std::size_t size() const noexcept { return xs_.size(); }
    [[nodiscard]] double x(std::size_t i) const { return xs_[i]; }
    [[nodiscard]] double value(std::size_t i) const { return values_[i]; }

    /// Piecewise-linear interpolant, constant continuation outside the grid.
    [[nodiscard]] double interpolate(double x) const;

private:
    std::vector<double> xs_;
    std::vector<double> values_;
    std::string label_;
};

/// A two-parameter function on a rectangular grid; values are row-major with
/// the first axis (xs) selecting the row.
class SampledField {
public:
    SampledField(std::vector<double> xs, std::vector<double> ys, std::vector<double> values,
                 std::string label = {});

    [[nodiscard]] const std::vector<double>& xs() const noexcept { return xs_; }
    [[nodiscard]] const std::vector<double>& ys() const noexcept { return ys_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    [[nodiscard]] std::size_t nx() const noexcept { return xs_.size(); }
    [[nodiscard]] std::size_t ny() const noexcept { return ys_.size(); }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values_[i * ys_.size() + j]; }

    /// Line x = xs[i] as a path over ys.
    [[nodiscard]] SampledPath row(std::size_t i) const;
    /// Line y = ys[j] as a path over xs.
    [[nodiscard]] SampledPath column(std::size_t j) const;
    /// Restriction to the index boxes [i0, i1] x [j0, j1] (inclusive).
    [[nodiscard]] SampledField sub(std::size_t i0, std::size_t i1, std::size_t j0,
                                   std::size_t j1) const;
    /// Swap the two axes.
    [[nodiscard]] SampledField transposed() const;

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<double> values_;
    std::string label_;
};

/// Sorted index list into a grid of `grid_size` points, endpoints included.
struct Partition1D {
    std::vector<std::size_t> indices;

    /// Throws InputError unless sorted, unique and endpoint-inclusive.
    void validate(std::size_t grid_size) const;
    static Partition1D full(std::size_t grid_size);
};

struct Partition2D {
    Partition1D x;
    Partition1D y;
};

/// A named scalar test function with its left derivative and the points where
/// the left derivative is discontinuous or singular.
struct ScalarFunction {
    std::string name;
    Fn1 value;
    Fn1 left_derivative;
    std::vector<double> breakpoints;
};

/// A named two-parameter function f(s, x) with left partial derivatives.
struct FieldFunction {
    std::string name;
    Fn2 value;
    Fn2 left_ds;
    Fn2 left_dx;
    std::vector<double> x_breakpoints;
};

/// Parses one of: x3cos, ramp(a), abs(a), polynomial(c0,c1,...),
/// indicator_step(x0), identity.
ScalarFunction scalar_test_function(std::string_view spec);

/// Parses one of: xysin, x3t3cos, xy, time (f = s), lift(<scalar spec>) (f = g(x)).
FieldFunction field_test_function(std::string_view spec);

SampledPath make_test_function(std::string_view spec, std::span<const double> grid);
SampledField make_test_function(std::string_view spec, std::span<const double> xs,
                                std::span<const double> ys);

/// The bump rho(z) = c exp(1/((z-1)^2 - 1)) on (0, 2) with c fixed by
/// composite-midpoint quadrature so that the discrete mass is one.
class Mollifier {
public:
    explicit Mollifier(std::size_t quadrature_nodes = 512);

    [[nodiscard]] std::size_t nodes() const noexcept { return z_.size(); }
    [[nodiscard]] double normalization() const noexcept { return c_; }
    /// rho(z), zero outside (0, 2).
    [[nodiscard]] double density(double z) const noexcept;
    /// rho'(z).
    [[nodiscard]] double density_derivative(double z) const noexcept;

    /// Quadrature abscissae on (0, 2) and the weights rho(z_k) h, rho'(z_k) h.
    [[nodiscard]] const std::vector<double>& abscissae() const noexcept { return z_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return w_; }
    [[nodiscard]] const std::vector<double>& derivative_weights() const noexcept { return dw_; }

    /// Discrete integral of rho: one up to rounding after normalization.
    [[nodiscard]] double mass() const;
    /// Discrete first moment of rho: one by symmetry about z = 1.
    [[nodiscard]] double first_moment() const;

private:
    double c_ = 1.0;
    std::vector<double> z_;
    std::vector<double> w_;
    std::vector<double> dw_;
};

/// g_n(x) = int_0^2 rho(z) g(x - z/n) dz. With `lower` set, arguments below it
/// are clamped (constant continuation of g below its domain).
Fn1 mollify_1d(Fn1 g, int n, const Mollifier& rho, std::optional<double> lower = std::nullopt);

/// Mollification of a sampled path: linear interpolation inside the grid,
/// constant continuation below; evaluation above the last abscissa throws.
Fn1 mollify_1d(const SampledPath& g, int n, const Mollifier& rho);

/// d/dx g_n(x) = n int_0^2 rho'(z) g(x - z/n) dz.
Fn1 mollify_1d_derivative(Fn1 g, int n, const Mollifier& rho,
                          std::optional<double> lower = std::nullopt);

/// Which kernel to use on each axis of the 2d convolution.
enum class Kernel { Density, Derivative };

/// f_n(s, x) = int int rho(r) rho(z) f(s - r/n, x - z/n) dr dz with f = 0 for
/// s < 0 and constant continuation below `x_lower` when given. Choosing the
/// Derivative kernel on an axis returns the partial derivative of f_n along
/// that axis instead.
Fn2 mollify_2d(Fn2 f, int n, const Mollifier& rho, std::optional<double> x_lower = std::nullopt,
               Kernel s_kernel = Kernel::Density, Kernel x_kernel = Kernel::Density);

}  // namespace pqvar
