// SPDX-License-Identifier: MIT

#include "pqvar/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <utility>

namespace pqvar {

// ---------------------------------------------------------------- gauges

ConvexGauge ConvexGauge::power(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        throw InputError("power gauge exponent must be >= 1");
    }
    ConvexGauge g;
    std::ostringstream name;
    name << "u^" << p;
    g.name_ = name.str();
    g.exponent_ = p;
    if (p == 1.0) {
        g.phi_ = [](double u) { return u; };
        g.inverse_ = [](double u) { return u; };
    } else if (p == 2.0) {
        g.phi_ = [](double u) { return u * u; };
        g.inverse_ = [](double u) { return std::sqrt(u); };
    } else {
        g.phi_ = [p](double u) { return std::pow(u, p); };
        g.inverse_ = [p](double u) { return std::pow(u, 1.0 / p); };
    }
    return g;
}

ConvexGauge ConvexGauge::user(std::string name, Fn1 phi, Fn1 inverse, bool convex) {
    if (!phi || !inverse) {
        throw InputError("user gauge needs both the function and its inverse");
    }
    ConvexGauge g;
    g.name_ = std::move(name);
    g.phi_ = std::move(phi);
    g.inverse_ = std::move(inverse);
    g.convex_ = convex;
    g.validate();
    return g;
}

double ConvexGauge::operator()(double u) const { return phi_(u); }

double ConvexGauge::inverse(double u) const { return inverse_(u); }

void ConvexGauge::validate() const {
    if (phi_(0.0) != 0.0) {
        throw InputError("gauge " + name_ + ": Phi(0) must be 0");
    }
    double prev = 0.0;
    for (int k = -24; k <= 24; ++k) {
        const double u = std::pow(10.0, 0.25 * k);
        const double v = phi_(u);
        if (!(v > prev) || !std::isfinite(v)) {
            throw InputError("gauge " + name_ + " is not strictly increasing");
        }
        prev = v;
        const double back = phi_(inverse_(u));
        if (std::abs(back - u) > 1e-9 * std::max(1.0, u)) {
            throw InputError("gauge " + name_ + ": inverse does not invert");
        }
    }
}

std::string to_string(Exactness e) {
    switch (e) {
        case Exactness::ExactOnGrid:
            return "exact-on-grid";
        case Exactness::LowerBound:
            return "lower-bound";
        case Exactness::UpperBound:
            return "upper-bound";
    }
    return "unknown";
}

// ---------------------------------------------------------------- 1d

namespace {

struct DpResult {
    double value = 0.0;
    std::vector<std::size_t> indices;
};

// Maximises sum of weight(a, b) over consecutive partition points of the
// index set `points` (endpoints fixed). Ties keep the smallest predecessor.
template <class Weight>
DpResult best_partition(const std::vector<std::size_t>& points, Weight&& weight) {
    const std::size_t n = points.size();
    std::vector<double> best(n, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> prev(n, 0);
    best[0] = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const double cand = best[i] + weight(points[i], points[j]);
            if (cand > best[j]) {
                best[j] = cand;
                prev[j] = i;
            }
        }
    }
    DpResult out;
    out.value = best[n - 1];
    std::vector<std::size_t> chain;
    for (std::size_t j = n - 1;; j = prev[j]) {
        chain.push_back(points[j]);
        if (j == 0) {
            break;
        }
    }
    out.indices.assign(chain.rbegin(), chain.rend());
    return out;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = i;
    }
    return v;
}

std::vector<std::string> describe(const ConvexGauge& g) { return {g.name()}; }

}  // namespace

double partition_variation_sum(const SampledPath& path, const Partition1D& partition,
                               const ConvexGauge& gauge) {
    partition.validate(path.size());
    double sum = 0.0;
    for (std::size_t k = 1; k < partition.indices.size(); ++k) {
        sum += gauge(std::abs(path.value(partition.indices[k]) -
                              path.value(partition.indices[k - 1])));
    }
    return sum;
}

VariationReport phi_variation_exact(const SampledPath& path, const ConvexGauge& gauge) {
    gauge.validate();
    const auto& v = path.values();
    const DpResult dp = best_partition(iota_indices(path.size()), [&](std::size_t a, std::size_t b) {
        return gauge(std::abs(v[b] - v[a]));
    });
    VariationReport r;
    if (gauge.exponent()) {
        r.exponents = {*gauge.exponent()};
    }
    r.gauges = describe(gauge);
    r.witness.indices = dp.indices;
    r.value = partition_variation_sum(path, r.witness, gauge);
    r.exactness = Exactness::ExactOnGrid;
    return r;
}

VariationReport p_variation_exact(const SampledPath& path, double p) {
    if (!(p >= 1.0)) {
        throw InputError("p-variation requires p >= 1");
    }
    return phi_variation_exact(path, ConvexGauge::power(p));
}

// ---------------------------------------------------------------- dyadic

double default_dyadic_constant(double p, double gamma) {
    if (!(p >= 1.0)) {
        throw InputError("dyadic bound requires p >= 1");
    }
    if (p == 1.0) {
        return 1.0;
    }
    const double r = gamma / (p - 1.0);
    if (!(r > 1.0)) {
        throw InputError("dyadic bound requires gamma > p - 1");
    }
    constexpr int kTerms = 4096;
    CompensatedSum s;
    for (int n = kTerms; n >= 1; --n) {
        s += std::pow(static_cast<double>(n), -r);
    }
    // Euler-Maclaurin tail for n > kTerms.
    const double k = kTerms;
    s += std::pow(k, 1.0 - r) / (r - 1.0) - 0.5 * std::pow(k, -r) + r * std::pow(k, -r - 1.0) / 12.0;
    return std::pow(s.value(), p - 1.0);
}

namespace {

DyadicBound dyadic_from_levels(const std::vector<double>& level_sums, double p, double gamma,
                               std::optional<double> c) {
    if (!(p >= 1.0)) {
        throw InputError("dyadic bound requires p >= 1");
    }
    if (!(gamma > p - 1.0)) {
        throw InputError("dyadic bound requires gamma > p - 1");
    }
    DyadicBound out;
    out.constant = c ? *c : default_dyadic_constant(p, gamma);
    if (!(out.constant > 0.0)) {
        throw InputError("dyadic bound constant must be positive");
    }
    CompensatedSum acc;
    for (std::size_t n = 1; n <= level_sums.size(); ++n) {
        acc += std::pow(static_cast<double>(n), gamma) * level_sums[n - 1];
        out.partial_sums.push_back(out.constant * acc.value());
    }
    out.value = out.partial_sums.empty() ? 0.0 : out.partial_sums.back();
    return out;
}

}  // namespace

DyadicBound dyadic_variation_bound(const SampledPath& dyadic_path, int n_max, double p,
                                   double gamma, std::optional<double> c) {
    if (n_max < 1) {
        throw InputError("dyadic bound needs n_max >= 1");
    }
    const std::size_t intervals = dyadic_path.size() - 1;
    if ((intervals & (intervals - 1)) != 0) {
        throw InputError("dyadic bound needs 2^N intervals");
    }
    const auto& xs = dyadic_path.xs();
    const double h = (xs.back() - xs.front()) / static_cast<double>(intervals);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (std::abs((xs[i] - xs[i - 1]) - h) > 1e-9 * std::abs(h)) {
            throw InputError("dyadic bound needs a uniform grid");
        }
    }
    const auto levels_available = static_cast<int>(std::lround(std::log2(static_cast<double>(intervals))));
    if (n_max > levels_available) {
        throw InputError("path grid is coarser than the requested dyadic level");
    }
    std::vector<double> level_sums;
    const auto& v = dyadic_path.values();
    for (int n = 1; n <= n_max; ++n) {
        const std::size_t stride = intervals >> n;
        CompensatedSum s;
        for (std::size_t k = stride; k <= intervals; k += stride) {
            s += std::pow(std::abs(v[k] - v[k - stride]), p);
        }
        level_sums.push_back(s.value());
    }
    return dyadic_from_levels(level_sums, p, gamma, c);
}

DyadicBound dyadic_variation_bound(const Fn1& f, double a, double b, int n_max, double p,
                                   double gamma, std::optional<double> c) {
    if (n_max < 1 || n_max > 30) {
        throw InputError("dyadic bound needs 1 <= n_max <= 30");
    }
    // Levels are evaluated one at a time, so memory stays O(1) in n_max.
    std::vector<double> level_sums;
    for (int n = 1; n <= n_max; ++n) {
        const std::size_t cells = std::size_t{1} << n;
        CompensatedSum s;
        double prev = f(a);
        for (std::size_t k = 1; k <= cells; ++k) {
            const double x = k == cells ? b : a + (b - a) * (static_cast<double>(k) / static_cast<double>(cells));
            const double cur = f(x);
            s += std::pow(std::abs(cur - prev), p);
            prev = cur;
        }
        level_sums.push_back(s.value());
    }
    return dyadic_from_levels(level_sums, p, gamma, c);
}

// ---------------------------------------------------------------- 2d

namespace {

double double_increment(const SampledField& g, std::size_t xa, std::size_t xb, std::size_t ya,
                        std::size_t yb) {
    return g.at(xb, yb) - g.at(xa, yb) - g.at(xb, ya) + g.at(xa, ya);
}

std::vector<std::size_t> from_mask(std::size_t n, std::uint64_t mask) {
    std::vector<std::size_t> v{0};
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (mask & (std::uint64_t{1} << (k - 1))) {
            v.push_back(k);
        }
    }
    v.push_back(n - 1);
    return v;
}

std::vector<std::size_t> from_flags(const std::vector<char>& flags) {
    const std::size_t n = flags.size() + 2;
    std::vector<std::size_t> v{0};
    for (std::size_t k = 0; k < flags.size(); ++k) {
        if (flags[k]) {
            v.push_back(k + 1);
        }
    }
    v.push_back(n - 1);
    return v;
}

double pq_sum_raw(const SampledField& g, const std::vector<std::size_t>& xi,
                  const std::vector<std::size_t>& yj, const ConvexGauge& phi1,
                  const ConvexGauge& psi1) {
    double outer = 0.0;
    for (std::size_t b = 1; b < yj.size(); ++b) {
        double inner = 0.0;
        for (std::size_t a = 1; a < xi.size(); ++a) {
            inner += phi1(std::abs(double_increment(g, xi[a - 1], xi[a], yj[b - 1], yj[b])));
        }
        outer += psi1(inner);
    }
    return outer;
}

VariationReport make_report(const SampledField& field, const ConvexGauge& phi1,
                            const ConvexGauge& psi1, std::vector<std::size_t> xi,
                            std::vector<std::size_t> yj, Exactness e) {
    VariationReport r;
    if (phi1.exponent() && psi1.exponent()) {
        r.exponents = {*phi1.exponent(), *psi1.exponent()};
    }
    r.gauges = {phi1.name(), psi1.name()};
    r.witness.indices = std::move(xi);
    r.witness_y = Partition1D{std::move(yj)};
    r.value = pq_partition_sum(field, r.witness, *r.witness_y, phi1, psi1);
    r.exactness = e;
    return r;
}

}  // namespace

double pq_partition_sum(const SampledField& field, const Partition1D& xpart,
                        const Partition1D& ypart, const ConvexGauge& phi1,
                        const ConvexGauge& psi1) {
    xpart.validate(field.nx());
    ypart.validate(field.ny());
    return pq_sum_raw(field, xpart.indices, ypart.indices, phi1, psi1);
}

VariationReport pq_variation_grid(const SampledField& field, double p, double q,
                                  const PqSearchOptions& options) {
    if (!(p >= 1.0) || !(q >= 1.0)) {
        throw InputError("p,q-variation requires p >= 1 and q >= 1");
    }
    return pq_variation_grid(field, ConvexGauge::power(p), ConvexGauge::power(q), options);
}

VariationReport pq_variation_grid(const SampledField& field, const ConvexGauge& phi1,
                                  const ConvexGauge& psi1, const PqSearchOptions& options) {
    phi1.validate();
    psi1.validate();
    const std::size_t nx = field.nx();
    const std::size_t ny = field.ny();
    const std::size_t ix = nx - 2;  // interior points
    const std::size_t iy = ny - 2;

    // One y-cell: Psi(sup_E sum Phi) by monotonicity of Psi.
    if (iy == 0) {
        const DpResult dp = best_partition(iota_indices(nx), [&](std::size_t a, std::size_t b) {
            return phi1(std::abs(double_increment(field, a, b, 0, 1)));
        });
        return make_report(field, phi1, psi1, dp.indices, {0, 1}, Exactness::ExactOnGrid);
    }
    // One x-cell: the objective is additive over y-cells.
    if (ix == 0) {
        const DpResult dp = best_partition(iota_indices(ny), [&](std::size_t a, std::size_t b) {
            return psi1(phi1(std::abs(double_increment(field, 0, 1, a, b))));
        });
        return make_report(field, phi1, psi1, {0, 1}, dp.indices, Exactness::ExactOnGrid);
    }

    if (ix <= options.exhaustive_budget && iy <= options.exhaustive_budget) {
        const std::uint64_t xmasks = std::uint64_t{1} << ix;
        const std::uint64_t ymasks = std::uint64_t{1} << iy;
        std::vector<std::vector<std::size_t>> xparts(xmasks);
        for (std::uint64_t m = 0; m < xmasks; ++m) {
            xparts[m] = from_mask(nx, m);
        }
        // Per-y-mask winners, reduced in index order for a deterministic witness.
        std::vector<double> best_val(ymasks, -1.0);
        std::vector<std::uint64_t> best_x(ymasks, 0);
        parallel_for(ymasks, [&](std::size_t ym) {
            const auto yp = from_mask(ny, ym);
            for (std::uint64_t xm = 0; xm < xmasks; ++xm) {
                const double v = pq_sum_raw(field, xparts[xm], yp, phi1, psi1);
                if (v > best_val[ym]) {
                    best_val[ym] = v;
                    best_x[ym] = xm;
                }
            }
        });
        std::uint64_t arg = 0;
        for (std::uint64_t ym = 1; ym < ymasks; ++ym) {
            if (best_val[ym] > best_val[arg]) {
                arg = ym;
            }
        }
        return make_report(field, phi1, psi1, xparts[best_x[arg]], from_mask(ny, arg),
                           Exactness::ExactOnGrid);
    }

    // Linear Psi: for each y-partition the x-objective is additive, so a DP is exact.
    const double dp_cost = std::ldexp(static_cast<double>(nx) * nx * ny, static_cast<int>(iy));
    if (psi1.is_linear() && iy <= options.exhaustive_budget && dp_cost <= 4e8) {
        const std::uint64_t ymasks = std::uint64_t{1} << iy;
        std::vector<DpResult> per_mask(ymasks);
        parallel_for(ymasks, [&](std::size_t ym) {
            const auto yp = from_mask(ny, ym);
            per_mask[ym] = best_partition(iota_indices(nx), [&](std::size_t a, std::size_t b) {
                double s = 0.0;
                for (std::size_t k = 1; k < yp.size(); ++k) {
                    s += phi1(std::abs(double_increment(field, a, b, yp[k - 1], yp[k])));
                }
                return s;
            });
        });
        std::uint64_t arg = 0;
        for (std::uint64_t ym = 1; ym < ymasks; ++ym) {
            if (per_mask[ym].value > per_mask[arg].value) {
                arg = ym;
            }
        }
        return make_report(field, phi1, psi1, per_mask[arg].indices, from_mask(ny, arg),
                           Exactness::ExactOnGrid);
    }

    // Local search: single-point add/remove hill climbing from the full grid,
    // then from random starting partitions.
    std::mt19937_64 rng(options.seed);
    std::vector<char> best_fx;
    std::vector<char> best_fy;
    double best = -1.0;
    for (std::size_t attempt = 0; attempt <= options.restarts; ++attempt) {
        std::vector<char> fx(ix, 1);
        std::vector<char> fy(iy, 1);
        if (attempt > 0) {
            for (auto& f : fx) {
                f = static_cast<char>(rng() >> 63);
            }
            for (auto& f : fy) {
                f = static_cast<char>(rng() >> 63);
            }
        }
        double current = pq_sum_raw(field, from_flags(fx), from_flags(fy), phi1, psi1);
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t axis = 0; axis < 2; ++axis) {
                auto& flags = axis == 0 ? fx : fy;
                for (std::size_t k = 0; k < flags.size(); ++k) {
                    flags[k] = static_cast<char>(!flags[k]);
                    const double v = pq_sum_raw(field, from_flags(fx), from_flags(fy), phi1, psi1);
                    if (v > current) {
                        current = v;
                        improved = true;
                    } else {
                        flags[k] = static_cast<char>(!flags[k]);
                    }
                }
            }
        }
        if (current > best) {
            best = current;
            best_fx = fx;
            best_fy = fy;
        }
    }
    return make_report(field, phi1, psi1, from_flags(best_fx), from_flags(best_fy),
                       Exactness::LowerBound);
}

double uniform_axis_variation(const SampledField& field, Axis axis, const ConvexGauge& gauge) {
    double out = 0.0;
    if (axis == Axis::X) {
        for (std::size_t j = 0; j < field.ny(); ++j) {
            out = std::max(out, phi_variation_exact(field.column(j), gauge).value);
        }
    } else {
        for (std::size_t i = 0; i < field.nx(); ++i) {
            out = std::max(out, phi_variation_exact(field.row(i), gauge).value);
        }
    }
    return out;
}

JumpSets detect_large_jumps(const SampledField& field, double epsilon, const ConvexGauge& phi1,
                            const ConvexGauge& psi1) {
    if (!(epsilon > 0.0)) {
        throw InputError("large-jump threshold must be positive");
    }
    JumpSets out;
    for (std::size_t i = 0; i + 1 < field.nx(); ++i) {
        const auto strip = field.sub(i, i + 1, 0, field.ny() - 1);
        if (pq_variation_grid(strip, phi1, psi1).value > epsilon) {
            out.x.push_back(field.xs()[i + 1]);
        }
    }
    for (std::size_t j = 0; j + 1 < field.ny(); ++j) {
        const auto strip = field.sub(0, field.nx() - 1, j, j + 1);
        if (pq_variation_grid(strip, phi1, psi1).value > epsilon) {
            out.y.push_back(field.ys()[j + 1]);
        }
    }
    return out;
}

}  // namespace pqvar
