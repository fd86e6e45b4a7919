// SPDX-License-Identifier: MIT

#include "pqvar/young.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "grid_detail.hpp"

namespace pqvar {

void finalize_verdict(IntegralResult& result, double tol) {
    if (result.levels.empty()) {
        throw InputError("integral has no refinement levels");
    }
    result.value = result.levels.back().second;
    std::vector<double> gaps;
    for (std::size_t k = 1; k < result.levels.size(); ++k) {
        gaps.push_back(std::abs(result.levels[k].second - result.levels[k - 1].second));
    }
    result.gap = gaps.empty() ? 0.0 : gaps.back();
    result.converged = gaps.size() >= 2 && gaps[gaps.size() - 1] < tol && gaps[gaps.size() - 2] < tol;
}

std::vector<std::size_t> dyadic_schedule(int lo, int hi) {
    if (lo < 0 || hi < lo || hi > 40) {
        throw InputError("bad dyadic schedule bounds");
    }
    std::vector<std::size_t> out;
    for (int k = lo; k <= hi; ++k) {
        out.push_back(std::size_t{1} << k);
    }
    return out;
}

double riemann_stieltjes_sum(const Fn1& f, const std::vector<double>& xs,
                             const std::vector<double>& gs) {
    CompensatedSum s;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        s += f(xs[i - 1]) * (gs[i] - gs[i - 1]);
    }
    return s.value();
}

namespace {

void check_exponents(const std::optional<std::pair<double, double>>& pq, bool force) {
    if (!pq) {
        return;
    }
    const auto [p, q] = *pq;
    if (!(p >= 1.0) || !(q >= 1.0)) {
        throw InputError("variation exponents must be >= 1");
    }
    if (!(1.0 / p + 1.0 / q > 1.0) && !force) {
        std::ostringstream msg;
        msg << "Young condition fails: 1/p + 1/q = " << (1.0 / p + 1.0 / q)
            << " <= 1 for p = " << p << ", q = " << q << " (use force to integrate anyway)";
        throw HypothesisError(msg.str());
    }
}

}  // namespace

IntegralResult young_integral_1d(const Fn1& f, const Fn1& g, double a, double b,
                                 const Young1DOptions& options) {
    check_exponents(options.exponents, options.force);
    if (!(b > a)) {
        throw InputError("integration interval must satisfy a < b");
    }
    if (options.schedule.empty()) {
        throw InputError("empty refinement schedule");
    }
    std::vector<double> extra;
    for (double p : options.required_points) {
        if (p > a && p < b) {
            extra.push_back(p);
        }
    }
    std::sort(extra.begin(), extra.end());
    IntegralResult r;
    for (std::size_t m : options.schedule) {
        if (m < 1) {
            throw InputError("schedule levels need at least one interval");
        }
        const std::vector<double> xs = merge_sorted_unique(linspace(a, b, m + 1), extra);
        std::vector<double> gs(xs.size());
        std::transform(xs.begin(), xs.end(), gs.begin(), g);
        const double s = riemann_stieltjes_sum(f, xs, gs);
        if (!std::isfinite(s)) {
            throw InputError("non-finite Riemann sum");
        }
        r.levels.emplace_back(xs.size() - 1, s);
    }
    finalize_verdict(r, options.tol);
    return r;
}

IntegralResult young_integral_1d(const SampledPath& f, const SampledPath& g,
                                 const Young1DOptions& options) {
    check_exponents(options.exponents, options.force);
    if (f.xs() != g.xs()) {
        throw InputError("integrand and integrator must share a grid");
    }
    const auto forced = detail::grid_indices_of(f.xs(), options.required_points);
    IntegralResult r;
    for (std::size_t m : detail::sampled_levels(f.size(), options.schedule)) {
        const auto idx = detail::subsample(f.size(), m, forced);
        CompensatedSum s;
        for (std::size_t k = 1; k < idx.size(); ++k) {
            s += f.value(idx[k - 1]) * (g.value(idx[k]) - g.value(idx[k - 1]));
        }
        r.levels.emplace_back(idx.size() - 1, s.value());
    }
    finalize_verdict(r, options.tol);
    return r;
}

IntegralResult integrate_f_dL(const Fn1& f, const SampledPath& ltilde,
                              const std::optional<SampledPath>& h,
                              const LocalTimeIntegralOptions& options) {
    if (options.asserted_q && !(*options.asserted_q < 2.0) && !options.force) {
        throw HypothesisError("integrand variation exponent must be < 2 against local time");
    }
    const auto& xs = ltilde.xs();
    const auto& ls = ltilde.values();
    double scale = 1.0;
    for (double v : ls) {
        scale = std::max(scale, std::abs(v));
    }
    if (std::abs(ls.front()) > options.support_tolerance * scale ||
        std::abs(ls.back()) > options.support_tolerance * scale) {
        throw InputError("local-time support is not covered by the level grid");
    }
    if (h && h->xs() != xs) {
        throw InputError("jump part must share the local-time grid");
    }

    // Pad with two zero-valued points beyond each end of the support.
    const double lo_step = xs[1] - xs[0];
    const double hi_step = xs[xs.size() - 1] - xs[xs.size() - 2];
    std::vector<double> px{xs.front() - 2.0 * lo_step, xs.front() - lo_step};
    std::vector<double> pl{0.0, 0.0};
    px.insert(px.end(), xs.begin(), xs.end());
    pl.insert(pl.end(), ls.begin(), ls.end());
    px.push_back(xs.back() + hi_step);
    px.push_back(xs.back() + 2.0 * hi_step);
    pl.push_back(0.0);
    pl.push_back(0.0);

    double jump_part = 0.0;
    if (h) {
        CompensatedSum s;
        const auto& hv = h->values();
        for (std::size_t i = 1; i < hv.size(); ++i) {
            const double jump = hv[i] - hv[i - 1];
            if (jump != 0.0) {
                s += f(xs[i]) * jump;
            }
        }
        jump_part = s.value();
    }

    std::vector<double> fv(px.size());
    std::transform(px.begin(), px.end(), fv.begin(), f);
    IntegralResult r;
    std::vector<std::size_t> schedule;
    for (std::size_t m = 4; m < px.size() - 1; m *= 2) {
        schedule.push_back(m);
    }
    for (std::size_t m : detail::sampled_levels(px.size(), schedule)) {
        const auto idx = detail::subsample(px.size(), m, {});
        CompensatedSum s;
        for (std::size_t k = 1; k < idx.size(); ++k) {
            s += fv[idx[k - 1]] * (pl[idx[k]] - pl[idx[k - 1]]);
        }
        s += jump_part;
        r.levels.emplace_back(idx.size() - 1, s.value());
    }
    finalize_verdict(r, options.tol);
    return r;
}

double integration_by_parts_check(const SampledPath& f, const SampledPath& local_time) {
    if (f.xs() != local_time.xs()) {
        throw InputError("integrand and local time must share a grid");
    }
    const auto& fv = f.values();
    const auto& lv = local_time.values();
    CompensatedSum s;
    for (std::size_t k = 1; k < fv.size(); ++k) {
        s += fv[k - 1] * (lv[k] - lv[k - 1]);
        s += lv[k] * (fv[k] - fv[k - 1]);
    }
    return std::abs(s.value());
}

}  // namespace pqvar
