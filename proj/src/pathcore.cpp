// SPDX-License-Identifier: MIT

#include "pqvar/pathcore.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

namespace pqvar {

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
    for (double d : v) {
        if (!std::isfinite(d)) {
            throw InputError(std::string(what) + " contains a non-finite value");
        }
    }
}

void require_axis(const std::vector<double>& v, const char* what) {
    if (v.size() < 2) {
        throw InputError(std::string(what) + " needs at least two points");
    }
    require_finite(v, what);
    if (!strictly_increasing(v)) {
        throw InputError(std::string(what) + " must be strictly increasing");
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

struct ParsedSpec {
    std::string name;
    std::vector<double> args;
};

// "name" or "name(a, b, ...)" or "name([a, b])".
ParsedSpec parse_spec(std::string_view spec) {
    spec = trim(spec);
    ParsedSpec out;
    const auto open = spec.find('(');
    if (open == std::string_view::npos) {
        out.name = std::string(spec);
        return out;
    }
    if (spec.back() != ')') {
        throw InputError("malformed function spec: " + std::string(spec));
    }
    out.name = std::string(trim(spec.substr(0, open)));
    std::string_view inner = spec.substr(open + 1, spec.size() - open - 2);
    inner = trim(inner);
    if (!inner.empty() && inner.front() == '[' && inner.back() == ']') {
        inner = trim(inner.substr(1, inner.size() - 2));
    }
    while (!inner.empty()) {
        const auto comma = inner.find(',');
        const std::string_view token = trim(inner.substr(0, comma));
        std::string tok(token);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw InputError("bad numeric argument '" + tok + "' in " + std::string(spec));
        }
        if (used != tok.size() || !std::isfinite(v)) {
            throw InputError("bad numeric argument '" + tok + "' in " + std::string(spec));
        }
        out.args.push_back(v);
        if (comma == std::string_view::npos) {
            break;
        }
        inner.remove_prefix(comma + 1);
    }
    return out;
}

double single_arg(const ParsedSpec& p) {
    if (p.args.size() != 1) {
        throw InputError(p.name + " takes exactly one argument");
    }
    return p.args.front();
}

}  // namespace

SampledPath::SampledPath(std::vector<double> xs, std::vector<double> values, std::string label)
    : xs_(std::move(xs)), values_(std::move(values)), label_(std::move(label)) {
    require_axis(xs_, "path abscissae");
    if (values_.size() != xs_.size()) {
        throw InputError("path values and abscissae differ in length");
    }
    require_finite(values_, "path values");
}

double SampledPath::interpolate(double x) const {
    if (x <= xs_.front()) {
        return values_.front();
    }
    if (x >= xs_.back()) {
        return values_.back();
    }
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const auto j = static_cast<std::size_t>(it - xs_.begin());
    const double w = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
    return values_[j - 1] + w * (values_[j] - values_[j - 1]);
}

SampledField::SampledField(std::vector<double> xs, std::vector<double> ys,
                           std::vector<double> values, std::string label)
    : xs_(std::move(xs)), ys_(std::move(ys)), values_(std::move(values)), label_(std::move(label)) {
    require_axis(xs_, "field first axis");
    require_axis(ys_, "field second axis");
    if (values_.size() != xs_.size() * ys_.size()) {
        throw InputError("field value count does not match its axes");
    }
    require_finite(values_, "field values");
}

SampledPath SampledField::row(std::size_t i) const {
    std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(i * ny()),
                          values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * ny()));
    return SampledPath(ys_, std::move(v));
}

SampledPath SampledField::column(std::size_t j) const {
    std::vector<double> v(nx());
    for (std::size_t i = 0; i < nx(); ++i) {
        v[i] = at(i, j);
    }
    return SampledPath(xs_, std::move(v));
}

SampledField SampledField::sub(std::size_t i0, std::size_t i1, std::size_t j0,
                               std::size_t j1) const {
    if (!(i0 < i1 && i1 < nx() && j0 < j1 && j1 < ny())) {
        throw InputError("field restriction out of range");
    }
    std::vector<double> xs(xs_.begin() + static_cast<std::ptrdiff_t>(i0),
                           xs_.begin() + static_cast<std::ptrdiff_t>(i1 + 1));
    std::vector<double> ys(ys_.begin() + static_cast<std::ptrdiff_t>(j0),
                           ys_.begin() + static_cast<std::ptrdiff_t>(j1 + 1));
    std::vector<double> v;
    v.reserve(xs.size() * ys.size());
    for (std::size_t i = i0; i <= i1; ++i) {
        for (std::size_t j = j0; j <= j1; ++j) {
            v.push_back(at(i, j));
        }
    }
    return SampledField(std::move(xs), std::move(ys), std::move(v), label_);
}

SampledField SampledField::transposed() const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < nx(); ++i) {
        for (std::size_t j = 0; j < ny(); ++j) {
            v[j * nx() + i] = at(i, j);
        }
    }
    return SampledField(ys_, xs_, std::move(v), label_);
}

void Partition1D::validate(std::size_t grid_size) const {
    if (indices.size() < 2 || indices.front() != 0 || indices.back() + 1 != grid_size) {
        throw InputError("partition must contain both grid endpoints");
    }
    for (std::size_t k = 1; k < indices.size(); ++k) {
        if (indices[k] <= indices[k - 1]) {
            throw InputError("partition indices must be strictly increasing");
        }
    }
}

Partition1D Partition1D::full(std::size_t grid_size) {
    Partition1D p;
    p.indices.resize(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
        p.indices[i] = i;
    }
    return p;
}

ScalarFunction scalar_test_function(std::string_view spec) {
    const ParsedSpec p = parse_spec(spec);
    ScalarFunction f;
    f.name = std::string(trim(spec));
    if (p.name == "x3cos") {
        f.value = [](double x) { return x == 0.0 ? 0.0 : x * x * x * std::cos(1.0 / x); };
        f.left_derivative = [](double x) {
            return x == 0.0 ? 0.0 : 3.0 * x * x * std::cos(1.0 / x) + x * std::sin(1.0 / x);
        };
        f.breakpoints = {0.0};
    } else if (p.name == "identity") {
        f.value = [](double x) { return x; };
        f.left_derivative = [](double) { return 1.0; };
    } else if (p.name == "ramp") {
        const double a = single_arg(p);
        f.value = [a](double x) { return x > a ? x - a : 0.0; };
        f.left_derivative = [a](double x) { return x > a ? 1.0 : 0.0; };
        f.breakpoints = {a};
    } else if (p.name == "abs") {
        const double a = single_arg(p);
        f.value = [a](double x) { return std::abs(x - a); };
        f.left_derivative = [a](double x) { return x > a ? 1.0 : -1.0; };
        f.breakpoints = {a};
    } else if (p.name == "indicator_step") {
        const double a = single_arg(p);
        // Left-continuous version: the value at the jump point is the left limit.
        f.value = [a](double x) { return x > a ? 1.0 : 0.0; };
        f.left_derivative = [](double) { return 0.0; };
        f.breakpoints = {a};
    } else if (p.name == "polynomial") {
        if (p.args.empty()) {
            throw InputError("polynomial needs at least one coefficient");
        }
        auto coeffs = std::make_shared<const std::vector<double>>(p.args);
        f.value = [coeffs](double x) {
            double acc = 0.0;
            for (auto it = coeffs->rbegin(); it != coeffs->rend(); ++it) {
                acc = acc * x + *it;
            }
            return acc;
        };
        f.left_derivative = [coeffs](double x) {
            double acc = 0.0;
            for (std::size_t k = coeffs->size(); k-- > 1;) {
                acc = acc * x + static_cast<double>(k) * (*coeffs)[k];
            }
            return acc;
        };
    } else {
        throw InputError("unknown scalar test function: " + std::string(spec));
    }
    return f;
}

FieldFunction field_test_function(std::string_view spec) {
    // lift(<scalar spec>) carries a nested spec, so it is split off before
    // the numeric argument parser sees it.
    const std::string_view t = trim(spec);
    if (t.starts_with("lift(") && t.back() == ')') {
        const ScalarFunction g = scalar_test_function(t.substr(5, t.size() - 6));
        FieldFunction f;
        f.name = std::string(t);
        f.value = [v = g.value](double, double x) { return v(x); };
        f.left_ds = [](double, double) { return 0.0; };
        f.left_dx = [d = g.left_derivative](double, double x) { return d(x); };
        f.x_breakpoints = g.breakpoints;
        return f;
    }
    const ParsedSpec p = parse_spec(spec);
    FieldFunction f;
    f.name = std::string(trim(spec));
    if (p.name == "xysin") {
        f.value = [](double x, double y) {
            if (x == 0.0 || y == 0.0) {
                return 0.0;
            }
            return x * y * std::sin(1.0 / x + 1.0 / y);
        };
        f.left_ds = [](double x, double y) {
            if (x == 0.0 || y == 0.0) {
                return 0.0;
            }
            const double u = 1.0 / x + 1.0 / y;
            return y * std::sin(u) - (y / x) * std::cos(u);
        };
        f.left_dx = [](double x, double y) {
            if (x == 0.0 || y == 0.0) {
                return 0.0;
            }
            const double u = 1.0 / x + 1.0 / y;
            return x * std::sin(u) - (x / y) * std::cos(u);
        };
        f.x_breakpoints = {0.0};
    } else if (p.name == "x3t3cos") {
        f.value = [](double t, double x) {
            if (t == 0.0 || x == 0.0) {
                return 0.0;
            }
            return x * x * x * t * t * t * std::cos(1.0 / t + 1.0 / x);
        };
        f.left_ds = [](double t, double x) {
            if (t == 0.0 || x == 0.0) {
                return 0.0;
            }
            const double u = 1.0 / t + 1.0 / x;
            return x * x * x * (3.0 * t * t * std::cos(u) + t * std::sin(u));
        };
        f.left_dx = [](double t, double x) {
            if (t == 0.0 || x == 0.0) {
                return 0.0;
            }
            const double u = 1.0 / t + 1.0 / x;
            return t * t * t * (3.0 * x * x * std::cos(u) + x * std::sin(u));
        };
        f.x_breakpoints = {0.0};
    } else if (p.name == "xy") {
        f.value = [](double s, double x) { return s * x; };
        f.left_ds = [](double, double x) { return x; };
        f.left_dx = [](double s, double) { return s; };
    } else if (p.name == "time") {
        f.value = [](double s, double) { return s; };
        f.left_ds = [](double, double) { return 1.0; };
        f.left_dx = [](double, double) { return 0.0; };
    } else {
        throw InputError("unknown field test function: " + std::string(spec));
    }
    return f;
}

SampledPath make_test_function(std::string_view spec, std::span<const double> grid) {
    const ScalarFunction f = scalar_test_function(spec);
    std::vector<double> xs(grid.begin(), grid.end());
    require_finite(xs, "test-function grid");
    std::vector<double> v(xs.size());
    std::transform(xs.begin(), xs.end(), v.begin(), f.value);
    return SampledPath(std::move(xs), std::move(v), f.name);
}

SampledField make_test_function(std::string_view spec, std::span<const double> xs,
                                std::span<const double> ys) {
    const FieldFunction f = field_test_function(spec);
    std::vector<double> ax(xs.begin(), xs.end());
    std::vector<double> ay(ys.begin(), ys.end());
    require_finite(ax, "test-function grid");
    require_finite(ay, "test-function grid");
    std::vector<double> v;
    v.reserve(ax.size() * ay.size());
    for (double x : ax) {
        for (double y : ay) {
            v.push_back(f.value(x, y));
        }
    }
    return SampledField(std::move(ax), std::move(ay), std::move(v), f.name);
}

namespace {

double bump(double z) noexcept {
    if (!(z > 0.0 && z < 2.0)) {
        return 0.0;
    }
    const double d = (z - 1.0) * (z - 1.0) - 1.0;
    return std::exp(1.0 / d);
}

double bump_derivative(double z) noexcept {
    if (!(z > 0.0 && z < 2.0)) {
        return 0.0;
    }
    const double d = (z - 1.0) * (z - 1.0) - 1.0;
    return std::exp(1.0 / d) * (-2.0 * (z - 1.0) / (d * d));
}

}  // namespace

Mollifier::Mollifier(std::size_t quadrature_nodes) {
    if (quadrature_nodes < 2) {
        throw InputError("mollifier needs at least two quadrature nodes");
    }
    const double h = 2.0 / static_cast<double>(quadrature_nodes);
    z_.resize(quadrature_nodes);
    for (std::size_t k = 0; k < quadrature_nodes; ++k) {
        z_[k] = (static_cast<double>(k) + 0.5) * h;
    }
    CompensatedSum raw;
    for (double z : z_) {
        raw += bump(z) * h;
    }
    c_ = 1.0 / raw.value();
    w_.resize(quadrature_nodes);
    dw_.resize(quadrature_nodes);
    for (std::size_t k = 0; k < quadrature_nodes; ++k) {
        w_[k] = c_ * bump(z_[k]) * h;
        dw_[k] = c_ * bump_derivative(z_[k]) * h;
    }
}

double Mollifier::density(double z) const noexcept { return c_ * bump(z); }

double Mollifier::density_derivative(double z) const noexcept { return c_ * bump_derivative(z); }

double Mollifier::mass() const {
    CompensatedSum s;
    for (double w : w_) {
        s += w;
    }
    return s.value();
}

double Mollifier::first_moment() const {
    CompensatedSum s;
    for (std::size_t k = 0; k < z_.size(); ++k) {
        s += z_[k] * w_[k];
    }
    return s.value();
}

namespace {

void require_order(int n) {
    if (n <= 0) {
        throw InputError("mollification order must be positive");
    }
}

Fn1 convolve_1d(Fn1 g, int n, const Mollifier& rho, std::optional<double> lower,
                bool derivative) {
    require_order(n);
    const auto inv_n = 1.0 / static_cast<double>(n);
    const double scale = derivative ? static_cast<double>(n) : 1.0;
    auto z = std::make_shared<const std::vector<double>>(rho.abscissae());
    auto w = std::make_shared<const std::vector<double>>(derivative ? rho.derivative_weights()
                                                                    : rho.weights());
    return [g = std::move(g), inv_n, scale, z, w, lower](double x) {
        CompensatedSum acc;
        for (std::size_t k = 0; k < z->size(); ++k) {
            double arg = x - (*z)[k] * inv_n;
            if (lower && arg < *lower) {
                arg = *lower;
            }
            acc += (*w)[k] * g(arg);
        }
        return scale * acc.value();
    };
}

}  // namespace

Fn1 mollify_1d(Fn1 g, int n, const Mollifier& rho, std::optional<double> lower) {
    return convolve_1d(std::move(g), n, rho, lower, false);
}

Fn1 mollify_1d_derivative(Fn1 g, int n, const Mollifier& rho, std::optional<double> lower) {
    return convolve_1d(std::move(g), n, rho, lower, true);
}

Fn1 mollify_1d(const SampledPath& g, int n, const Mollifier& rho) {
    require_order(n);
    auto path = std::make_shared<const SampledPath>(g);
    Fn1 inner = [path](double x) { return path->interpolate(x); };
    Fn1 smoothed = convolve_1d(std::move(inner), n, rho, path->xs().front(), false);
    const double upper = path->xs().back();
    return [smoothed = std::move(smoothed), upper](double x) {
        if (!(x <= upper)) {
            throw InputError("mollified path evaluated above its sampled domain");
        }
        return smoothed(x);
    };
}

Fn2 mollify_2d(Fn2 f, int n, const Mollifier& rho, std::optional<double> x_lower,
               Kernel s_kernel, Kernel x_kernel) {
    require_order(n);
    const auto inv_n = 1.0 / static_cast<double>(n);
    double scale = 1.0;
    if (s_kernel == Kernel::Derivative) {
        scale *= static_cast<double>(n);
    }
    if (x_kernel == Kernel::Derivative) {
        scale *= static_cast<double>(n);
    }
    auto z = std::make_shared<const std::vector<double>>(rho.abscissae());
    auto ws = std::make_shared<const std::vector<double>>(
        s_kernel == Kernel::Derivative ? rho.derivative_weights() : rho.weights());
    auto wx = std::make_shared<const std::vector<double>>(
        x_kernel == Kernel::Derivative ? rho.derivative_weights() : rho.weights());
    return [f = std::move(f), inv_n, scale, z, ws, wx, x_lower](double s, double x) {
        CompensatedSum acc;
        for (std::size_t r = 0; r < z->size(); ++r) {
            const double sr = s - (*z)[r] * inv_n;
            if (sr < 0.0) {
                continue;  // f is extended by zero for negative times
            }
            CompensatedSum inner;
            for (std::size_t k = 0; k < z->size(); ++k) {
                double xr = x - (*z)[k] * inv_n;
                if (x_lower && xr < *x_lower) {
                    xr = *x_lower;
                }
                inner += (*wx)[k] * f(sr, xr);
            }
            acc += (*ws)[r] * inner.value();
        }
        return scale * acc.value();
    };
}

}  // namespace pqvar
