// SPDX-License-Identifier: MIT

#include "pqvar/young2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "grid_detail.hpp"

namespace pqvar {

namespace {

std::vector<std::size_t> decade_checkpoints(std::size_t n_max) {
    std::vector<std::size_t> out;
    for (std::size_t n = 10; n < n_max; n *= 10) {
        out.push_back(n);
    }
    out.push_back(n_max);
    return out;
}

}  // namespace

SeriesCondition check_series_condition(double p, double q, double delta, std::size_t n_max,
                                       std::optional<double> gamma) {
    if (!(p >= 1.0) || !(q >= 1.0) || !std::isfinite(p) || !std::isfinite(q)) {
        throw InputError("series condition needs p, q >= 1");
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw InputError("delta must be a finite non-negative number");
    }
    if (n_max < 100) {
        throw InputError("series condition needs n_max >= 100");
    }
    SeriesCondition c;
    c.p = p;
    c.q = q;
    c.gamma = gamma;
    c.alpha_lower = 2.0 * (1.0 - 1.0 / p);
    c.alpha_upper = 1.0 / (p * q);

    // Strict inequality; a difference within rounding of zero counts as the
    // boundary, which is infeasible.
    const bool room = (2.0 * q + 1.0) - 2.0 * p * q > 1e-12 * (2.0 * q + 1.0);
    if (delta == 0.0) {
        if (room && p > 1.0) {
            c.delta = 0.5 * (c.alpha_upper / (1.0 - 1.0 / p) - 2.0);
        } else {
            c.delta = 1.0;
        }
    } else {
        c.delta = delta;
    }
    const double lower = (2.0 + c.delta) * (1.0 - 1.0 / p);
    c.feasible = room && lower < c.alpha_upper;

    // Infeasible cases still report partial sums at the midpoint split.
    const double alpha = c.feasible ? 0.5 * (lower + c.alpha_upper)
                                    : 0.5 * (c.alpha_lower + c.alpha_upper);
    if (c.feasible) {
        c.alpha = alpha;
    }
    c.n_exponent = alpha / (2.0 + c.delta) + 1.0 / p;
    c.m_exponent = (1.0 - alpha) + 1.0 / (p * q);

    CompensatedSum sn;
    CompensatedSum sm;
    std::size_t next = 0;
    const auto checkpoints = decade_checkpoints(n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
        const double dn = static_cast<double>(n);
        sn += std::pow(dn, -c.n_exponent);
        sm += std::pow(dn, -c.m_exponent);
        if (n == checkpoints[next]) {
            c.partial_sums.emplace_back(n, sn.value() * sm.value());
            ++next;
        }
    }
    if (c.n_exponent > 1.0 && c.m_exponent > 1.0) {
        c.tail_bound = (1.0 + 1.0 / (c.n_exponent - 1.0)) * (1.0 + 1.0 / (c.m_exponent - 1.0));
    } else {
        c.tail_bound = std::numeric_limits<double>::infinity();
    }
    return c;
}

SeriesCondition check_series_condition(const ConvexGauge& phi, const ConvexGauge& psi,
                                       const ConvexGauge& phi1, const ConvexGauge& psi1,
                                       double alpha, std::size_t n_max) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("split exponent alpha must lie in (0, 1)");
    }
    if (n_max < 100) {
        throw InputError("series condition needs n_max >= 100");
    }
    SeriesCondition c;
    c.p = phi1.exponent().value_or(std::numeric_limits<double>::quiet_NaN());
    c.q = psi1.exponent().value_or(std::numeric_limits<double>::quiet_NaN());
    c.alpha = alpha;
    c.guaranteed = false;

    std::vector<double> rho(n_max + 1);
    std::vector<double> sigma(n_max + 1);
    std::vector<double> inner(n_max + 1);
    for (std::size_t k = 1; k <= n_max; ++k) {
        const double u = 1.0 / static_cast<double>(k);
        rho[k] = std::pow(phi(u), alpha);
        sigma[k] = std::pow(psi(u), 1.0 - alpha);
        inner[k] = psi1(u);
    }
    // Partial sums over the square [1, N]^2, grown one L-shaped shell at a time.
    const auto checkpoints = decade_checkpoints(n_max);
    CompensatedSum total;
    std::size_t next = 0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        const double un = 1.0 / static_cast<double>(n);
        for (std::size_t m = 1; m <= n; ++m) {
            total += rho[n] * sigma[m] * phi1(un * inner[m]);
            if (m < n) {
                total += rho[m] * sigma[n] * phi1(inner[n] / static_cast<double>(m));
            }
        }
        if (n == checkpoints[next]) {
            c.partial_sums.emplace_back(n, total.value());
            ++next;
        }
    }
    // Decade increments of a convergent power-type series shrink geometrically.
    const auto& ps = c.partial_sums;
    if (ps.size() >= 3) {
        const double last = ps[ps.size() - 1].second - ps[ps.size() - 2].second;
        const double prev = ps[ps.size() - 2].second - ps[ps.size() - 3].second;
        c.feasible = std::isfinite(last) && prev > 0.0 && last < 0.9 * prev;
    } else {
        c.feasible = false;
    }
    c.tail_bound = std::numeric_limits<double>::infinity();
    return c;
}

namespace {

// Deterministic ordered reduction of per-row partial sums.
double reduce_rows(std::size_t rows, const std::function<double(std::size_t)>& row_sum) {
    std::vector<double> partial(rows, 0.0);
    parallel_for(rows, [&](std::size_t i) { partial[i] = row_sum(i); });
    CompensatedSum s;
    for (double v : partial) {
        s += v;
    }
    return s.value();
}

std::vector<double> evaluate_grid(const Fn2& f, const std::vector<double>& xs,
                                  const std::vector<double>& ys) {
    std::vector<double> out(xs.size() * ys.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < ys.size(); ++j) {
            out[i * ys.size() + j] = f(xs[i], ys[j]);
        }
    });
    return out;
}

std::vector<double> interior(const std::vector<double>& points, double lo, double hi) {
    std::vector<double> out;
    for (double v : points) {
        if (v > lo && v < hi) {
            out.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void check_domain(const Rect& d) {
    if (!(d.x1 > d.x0) || !(d.y1 > d.y0)) {
        throw InputError("integration rectangle must have x0 < x1 and y0 < y1");
    }
}

IntegralResult integrate_fn(const Fn2& F, const Fn2& G, const Rect& domain,
                            const Young2DOptions& options, Corner corner) {
    check_domain(domain);
    if (options.schedule.empty()) {
        throw InputError("empty refinement schedule");
    }
    const auto hx = interior(options.jumps.x, domain.x0, domain.x1);
    const auto hy = interior(options.jumps.y, domain.y0, domain.y1);
    IntegralResult r;
    for (std::size_t m : options.schedule) {
        if (m < 1) {
            throw InputError("schedule levels need at least one interval");
        }
        const auto xs = merge_sorted_unique(linspace(domain.x0, domain.x1, m + 1), hx);
        const auto ys = merge_sorted_unique(linspace(domain.y0, domain.y1, m + 1), hy);
        const double s = riemann_sum_2d(F, G, xs, ys, corner);
        if (!std::isfinite(s)) {
            throw InputError("non-finite two-parameter Riemann sum");
        }
        r.levels.emplace_back((xs.size() - 1) * (ys.size() - 1), s);
    }
    finalize_verdict(r, options.tol);
    return r;
}

IntegralResult integrate_field(const SampledField& F, const SampledField& G,
                               const Young2DOptions& options, Corner corner) {
    if (F.xs() != G.xs() || F.ys() != G.ys()) {
        throw InputError("integrand and integrator must share a grid");
    }
    const auto fx = detail::grid_indices_of(F.xs(), options.jumps.x);
    const auto fy = detail::grid_indices_of(F.ys(), options.jumps.y);
    const auto lx = detail::sampled_levels(F.nx(), options.schedule);
    const auto ly = detail::sampled_levels(F.ny(), options.schedule);
    IntegralResult r;
    const std::size_t levels = std::max(lx.size(), ly.size());
    for (std::size_t k = 0; k < levels; ++k) {
        // The shorter axis stays at its finest level once exhausted.
        const std::size_t kx = k + lx.size() >= levels ? k + lx.size() - levels : 0;
        const std::size_t ky = k + ly.size() >= levels ? k + ly.size() - levels : 0;
        const auto xi = detail::subsample(F.nx(), lx[kx], fx);
        const auto yj = detail::subsample(F.ny(), ly[ky], fy);
        const double s = riemann_sum_2d(F, G, xi, yj, corner);
        r.levels.emplace_back((xi.size() - 1) * (yj.size() - 1), s);
    }
    finalize_verdict(r, options.tol);
    return r;
}

}  // namespace

double riemann_sum_2d(const Fn2& F, const Fn2& G, const std::vector<double>& xs,
                      const std::vector<double>& ys, Corner corner) {
    if (xs.size() < 2 || ys.size() < 2 || !strictly_increasing(xs) || !strictly_increasing(ys)) {
        throw InputError("two-parameter partitions need >= 2 strictly increasing points per axis");
    }
    const std::size_t ny = ys.size();
    const auto g = evaluate_grid(G, xs, ys);
    return reduce_rows(xs.size() - 1, [&](std::size_t i) {
        CompensatedSum s;
        const std::size_t fi = corner == Corner::LowerLeft ? i : i + 1;
        for (std::size_t j = 0; j + 1 < ny; ++j) {
            const std::size_t fj = corner == Corner::LowerLeft ? j : j + 1;
            const double dd = g[(i + 1) * ny + j + 1] - g[i * ny + j + 1] - g[(i + 1) * ny + j] +
                              g[i * ny + j];
            s += F(xs[fi], ys[fj]) * dd;
        }
        return s.value();
    });
}

double riemann_sum_2d(const SampledField& F, const SampledField& G,
                      const std::vector<std::size_t>& xi, const std::vector<std::size_t>& yj,
                      Corner corner) {
    if (F.xs() != G.xs() || F.ys() != G.ys()) {
        throw InputError("integrand and integrator must share a grid");
    }
    Partition1D{xi}.validate(F.nx());
    Partition1D{yj}.validate(F.ny());
    return reduce_rows(xi.size() - 1, [&](std::size_t a) {
        CompensatedSum s;
        const std::size_t i0 = xi[a];
        const std::size_t i1 = xi[a + 1];
        const std::size_t fi = corner == Corner::LowerLeft ? i0 : i1;
        for (std::size_t b = 0; b + 1 < yj.size(); ++b) {
            const std::size_t j0 = yj[b];
            const std::size_t j1 = yj[b + 1];
            const std::size_t fj = corner == Corner::LowerLeft ? j0 : j1;
            const double dd = G.at(i1, j1) - G.at(i0, j1) - G.at(i1, j0) + G.at(i0, j0);
            s += F.at(fi, fj) * dd;
        }
        return s.value();
    });
}

IntegralResult young_integral_2d(const Fn2& F, const Fn2& G, const Rect& domain,
                                 const Young2DOptions& options) {
    return integrate_fn(F, G, domain, options, Corner::LowerLeft);
}

IntegralResult young_integral_2d_backward(const Fn2& F, const Fn2& G, const Rect& domain,
                                          const Young2DOptions& options) {
    return integrate_fn(F, G, domain, options, Corner::UpperRight);
}

IntegralResult young_integral_2d(const SampledField& F, const SampledField& G,
                                 const Young2DOptions& options) {
    return integrate_field(F, G, options, Corner::LowerLeft);
}

IntegralResult young_integral_2d_backward(const SampledField& F, const SampledField& G,
                                          const Young2DOptions& options) {
    return integrate_field(F, G, options, Corner::UpperRight);
}

namespace {

// Control of the base-grid index interval [a, b] along one axis: the largest
// exact gauge variation over the lines of the other axis.
class AxisControl {
public:
    AxisControl(const SampledField& field, Axis axis, const ConvexGauge& gauge)
        : field_(field), axis_(axis), gauge_(gauge) {
        const std::size_t n = axis == Axis::X ? field.nx() : field.ny();
        const std::size_t lines = axis == Axis::X ? field.ny() : field.nx();
        density_.assign(n, 0.0);
        for (std::size_t k = 1; k < n; ++k) {
            CompensatedSum s;
            for (std::size_t l = 0; l < lines; ++l) {
                s += gauge_(std::abs(value(k, l) - value(k - 1, l)));
            }
            density_[k] = s.value();
        }
    }

    double mass(std::size_t a, std::size_t b) const {
        const std::size_t lines = axis_ == Axis::X ? field_.ny() : field_.nx();
        std::vector<double> best(lines, 0.0);
        parallel_for(lines, [&](std::size_t l) {
            std::vector<double> dp(b - a + 1, 0.0);
            for (std::size_t j = a + 1; j <= b; ++j) {
                double m = 0.0;
                for (std::size_t i = a; i < j; ++i) {
                    m = std::max(m, dp[i - a] + gauge_(std::abs(value(j, l) - value(i, l))));
                }
                dp[j - a] = m;
            }
            best[l] = dp.back();
        });
        return *std::max_element(best.begin(), best.end());
    }

    // Index in (a, b) where the cumulative increment mass first reaches half.
    std::size_t split(std::size_t a, std::size_t b) const {
        double total = 0.0;
        for (std::size_t k = a + 1; k <= b; ++k) {
            total += density_[k];
        }
        double acc = 0.0;
        for (std::size_t k = a + 1; k < b; ++k) {
            acc += density_[k];
            if (acc >= 0.5 * total) {
                return k;
            }
        }
        return a + (b - a) / 2;
    }

private:
    double value(std::size_t k, std::size_t l) const {
        return axis_ == Axis::X ? field_.at(k, l) : field_.at(l, k);
    }

    const SampledField& field_;
    Axis axis_;
    const ConvexGauge& gauge_;
    std::vector<double> density_;
};

std::vector<std::vector<std::size_t>> refine_levels(const AxisControl& control, std::size_t n,
                                                    int levels) {
    std::vector<std::vector<std::size_t>> out{{0, n - 1}};
    const double total = control.mass(0, n - 1);
    for (int p = 1; p <= levels; ++p) {
        const double threshold = std::ldexp(total, -p);
        const auto& prev = out.back();
        std::vector<std::size_t> next{prev.front()};
        for (std::size_t c = 0; c + 1 < prev.size(); ++c) {
            const std::size_t a = prev[c];
            const std::size_t b = prev[c + 1];
            if (b - a >= 2 && control.mass(a, b) > threshold) {
                next.push_back(control.split(a, b));
            }
            next.push_back(b);
        }
        out.push_back(std::move(next));
    }
    return out;
}

std::vector<double> to_points(const std::vector<std::size_t>& idx, const std::vector<double>& grid) {
    std::vector<double> out(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out[k] = grid[idx[k]];
    }
    return out;
}

}  // namespace

RefinementTrace dyadic_refinement_trace(const Fn2& F, const Fn2& G, const Rect& domain, int pmax,
                                        int qmax, const ConvexGauge& phi, const ConvexGauge& psi,
                                        std::size_t base) {
    check_domain(domain);
    if (pmax < 0 || qmax < 0 || pmax > 20 || qmax > 20) {
        throw InputError("refinement depths must lie in [0, 20]");
    }
    if (base < 2) {
        throw InputError("base grid needs at least two cells per axis");
    }
    const auto bx = linspace(domain.x0, domain.x1, base + 1);
    const auto by = linspace(domain.y0, domain.y1, base + 1);
    const SampledField fs(bx, by, evaluate_grid(F, bx, by), "F");

    const AxisControl cx(fs, Axis::X, phi);
    const AxisControl cy(fs, Axis::Y, psi);
    RefinementTrace t;
    for (const auto& idx : refine_levels(cx, bx.size(), pmax)) {
        t.x_partitions.push_back(to_points(idx, bx));
    }
    for (const auto& idx : refine_levels(cy, by.size(), qmax)) {
        t.y_partitions.push_back(to_points(idx, by));
    }
    t.sums.assign(t.x_partitions.size(), std::vector<double>(t.y_partitions.size(), 0.0));
    for (std::size_t p = 0; p < t.x_partitions.size(); ++p) {
        for (std::size_t q = 0; q < t.y_partitions.size(); ++q) {
            t.sums[p][q] = riemann_sum_2d(F, G, t.x_partitions[p], t.y_partitions[q]);
        }
    }
    for (std::size_t p = 0; p + 1 < t.x_partitions.size(); ++p) {
        std::vector<double> row;
        for (std::size_t q = 0; q + 1 < t.y_partitions.size(); ++q) {
            row.push_back(t.sums[p + 1][q + 1] - t.sums[p + 1][q] - t.sums[p][q + 1] + t.sums[p][q]);
        }
        t.mixed_differences.push_back(std::move(row));
    }
    double gap = std::numeric_limits<double>::infinity();
    for (const auto* part : {&t.x_partitions.back(), &t.y_partitions.back()}) {
        for (std::size_t k = 1; k < part->size(); ++k) {
            gap = std::min(gap, (*part)[k] - (*part)[k - 1]);
        }
    }
    t.strip_delta = 0.25 * gap;
    return t;
}

SummationByParts summation_by_parts_2d(const SampledField& g, const SampledField& ltilde,
                                       double boundary_tolerance) {
    if (g.xs() != ltilde.xs() || g.ys() != ltilde.ys()) {
        throw InputError("integrand and local-time field must share a grid");
    }
    const std::size_t ns = g.nx();
    const std::size_t nx = g.ny();
    if (ns < 2 || nx < 2) {
        throw InputError("summation by parts needs at least a 2 x 2 grid");
    }
    for (std::size_t j = 0; j < ns; ++j) {
        if (std::abs(ltilde.at(j, 0)) > boundary_tolerance ||
            std::abs(ltilde.at(j, nx - 1)) > boundary_tolerance) {
            throw InputError("local-time field does not vanish on the x-boundary");
        }
    }
    for (std::size_t i = 0; i < nx; ++i) {
        if (std::abs(ltilde.at(0, i)) > boundary_tolerance) {
            throw InputError("local-time field does not vanish at the initial time");
        }
    }
    const auto& L = ltilde;
    const double lhs = reduce_rows(ns - 1, [&](std::size_t j) {
        CompensatedSum s;
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            s += g.at(j, i) * (L.at(j + 1, i + 1) - L.at(j, i + 1) - L.at(j + 1, i) + L.at(j, i));
        }
        return s.value();
    });
    const double area = reduce_rows(ns - 1, [&](std::size_t jm) {
        const std::size_t j = jm + 1;
        CompensatedSum s;
        for (std::size_t i = 1; i < nx; ++i) {
            s += L.at(j, i) * (g.at(j, i) - g.at(j, i - 1) - g.at(j - 1, i) + g.at(j - 1, i - 1));
        }
        return s.value();
    });
    CompensatedSum edge;
    for (std::size_t i = 1; i < nx; ++i) {
        edge += L.at(ns - 1, i) * (g.at(ns - 1, i) - g.at(ns - 1, i - 1));
    }
    SummationByParts r;
    r.lhs = lhs;
    r.rhs = area - edge.value();
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

std::vector<ApproximationStep> mollified_sequence(const Fn2& F, const Fn2& G,
                                                  const std::vector<int>& orders,
                                                  std::optional<double> x_lower, std::size_t nodes) {
    const Mollifier rho(nodes);
    std::vector<ApproximationStep> out;
    for (int n : orders) {
        out.push_back({"n=" + std::to_string(n), mollify_2d(F, n, rho, x_lower),
                       mollify_2d(G, n, rho, x_lower)});
    }
    return out;
}

DominatedConvergenceTable dominated_convergence_test(const std::vector<ApproximationStep>& sequence,
                                                     const Fn2& F, const Fn2& G,
                                                     const Rect& domain,
                                                     const Young2DOptions& options) {
    check_domain(domain);
    if (sequence.empty()) {
        throw InputError("approximating sequence is empty");
    }
    if (options.schedule.empty()) {
        throw InputError("empty refinement schedule");
    }
    DominatedConvergenceTable t;
    t.limit = young_integral_2d(F, G, domain, options).value;

    const std::size_t m = options.schedule.back();
    const auto xs = merge_sorted_unique(linspace(domain.x0, domain.x1, m + 1),
                                        interior(options.jumps.x, domain.x0, domain.x1));
    const auto ys = merge_sorted_unique(linspace(domain.y0, domain.y1, m + 1),
                                        interior(options.jumps.y, domain.y0, domain.y1));

    // Spot points from the additive recurrence with the plastic-number ratios.
    constexpr std::size_t spots = 1000;
    constexpr double a1 = 0.7548776662466927;
    constexpr double a2 = 0.5698402909980532;
    std::vector<std::pair<double, double>> pts(spots);
    for (std::size_t k = 0; k < spots; ++k) {
        const double u = std::fmod(0.5 + a1 * static_cast<double>(k + 1), 1.0);
        const double v = std::fmod(0.5 + a2 * static_cast<double>(k + 1), 1.0);
        pts[k] = {domain.x0 + u * (domain.x1 - domain.x0), domain.y0 + v * (domain.y1 - domain.y0)};
    }
    std::vector<double> f_ref(spots);
    std::vector<double> g_ref(spots);
    for (std::size_t k = 0; k < spots; ++k) {
        f_ref[k] = F(pts[k].first, pts[k].second);
        g_ref[k] = G(pts[k].first, pts[k].second);
    }
    const auto cx = linspace(domain.x0, domain.x1, 9);
    const auto cy = linspace(domain.y0, domain.y1, 9);

    for (const auto& step : sequence) {
        t.labels.push_back(step.label);
        const double v = riemann_sum_2d(step.F, step.G, xs, ys);
        t.integrals.push_back(v);
        t.gaps.push_back(std::abs(v - t.limit));
        double df = 0.0;
        double dg = 0.0;
        for (std::size_t k = 0; k < spots; ++k) {
            df = std::max(df, std::abs(step.F(pts[k].first, pts[k].second) - f_ref[k]));
            dg = std::max(dg, std::abs(step.G(pts[k].first, pts[k].second) - g_ref[k]));
        }
        t.sup_distance.push_back(df + dg);
        const SampledField gk(cx, cy, evaluate_grid(step.G, cx, cy), step.label);
        t.variation_bounds.push_back(pq_variation_grid(gk, 1.0, 1.0).value);
    }
    if (t.sup_distance.back() > t.sup_distance.front()) {
        std::ostringstream msg;
        msg << "approximating sequence is not uniformly convergent on the spot set: sup distance "
            << t.sup_distance.front() << " -> " << t.sup_distance.back();
        throw InputError(msg.str());
    }
    t.decaying = t.gaps.back() < t.gaps.front() / 10.0 || t.gaps.back() < options.tol;
    t.strictly_decreasing = true;
    for (std::size_t k = 1; k < t.gaps.size(); ++k) {
        t.strictly_decreasing = t.strictly_decreasing && t.gaps[k] < t.gaps[k - 1];
    }
    return t;
}

}  // namespace pqvar
