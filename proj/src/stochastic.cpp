// SPDX-License-Identifier: MIT

#include "pqvar/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pqvar/variation.hpp"

namespace pqvar {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t CounterRng::mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix(seed ^ mix(stream))) {}

std::uint64_t CounterRng::next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
}

double CounterRng::uniform() {
    // 53 random bits, shifted off zero.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    if (spare_) {
        const double z = *spare_;
        spare_.reset();
        return z;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
}

void SemimartingaleSpec::validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw InputError("horizon T must be positive and finite");
    }
    if (n_steps < 1) {
        throw InputError("n_steps must be at least 1");
    }
    if (!drift || !volatility) {
        throw InputError("drift and volatility must be set");
    }
    if (!std::isfinite(x0)) {
        throw InputError("x0 must be finite");
    }
}

std::vector<double> brownian_increments(const SemimartingaleSpec& spec) {
    spec.validate();
    CounterRng rng(spec.seed, spec.stream);
    const double sd = std::sqrt(spec.T / static_cast<double>(spec.n_steps));
    std::vector<double> dw(spec.n_steps);
    for (auto& v : dw) {
        v = sd * rng.normal();
    }
    return dw;
}

std::vector<double> coarsen_increments(const std::vector<double>& dw, std::size_t factor) {
    if (factor < 1 || dw.size() % factor != 0) {
        throw InputError("coarsening factor must divide the number of increments");
    }
    std::vector<double> out(dw.size() / factor);
    for (std::size_t k = 0; k < out.size(); ++k) {
        CompensatedSum s;
        for (std::size_t r = 0; r < factor; ++r) {
            s += dw[k * factor + r];
        }
        out[k] = s.value();
    }
    return out;
}

SimulatedPaths simulate(const SemimartingaleSpec& spec) {
    return simulate(spec, brownian_increments(spec));
}

SimulatedPaths simulate(const SemimartingaleSpec& spec, const std::vector<double>& dw) {
    spec.validate();
    const std::size_t n = spec.n_steps;
    if (dw.size() != n) {
        throw InputError("increment count must equal n_steps");
    }
    const double dt = spec.T / static_cast<double>(n);
    std::vector<double> ts(n + 1);
    std::vector<double> x(n + 1);
    std::vector<double> m(n + 1);
    std::vector<double> v(n + 1);
    std::vector<double> qv(n + 1);
    CompensatedSum sx;
    CompensatedSum sm;
    CompensatedSum sv;
    CompensatedSum sq;
    x[0] = spec.x0;
    for (std::size_t k = 0; k <= n; ++k) {
        ts[k] = spec.T * static_cast<double>(k) / static_cast<double>(n);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double b = spec.drift(ts[k], x[k]);
        const double sigma = spec.volatility(ts[k], x[k]);
        if (!std::isfinite(b) || !std::isfinite(sigma)) {
            std::ostringstream msg;
            msg << "non-finite drift or volatility at s = " << ts[k] << ", x = " << x[k];
            throw InputError(msg.str());
        }
        const double dm = sigma * dw[k];
        const double dv = b * dt;
        sm += dm;
        sv += dv;
        sq += sigma * sigma * dt;
        sx += dv;
        sx += dm;
        x[k + 1] = spec.x0 + sx.value();
        m[k + 1] = sm.value();
        v[k + 1] = sv.value();
        qv[k + 1] = sq.value();
    }
    return {SampledPath(ts, std::move(x), "X"), SampledPath(ts, std::move(m), "M"),
            SampledPath(ts, std::move(v), "V"), SampledPath(ts, std::move(qv), "QV")};
}

std::vector<double> level_grid(const SampledPath& X, double spacing,
                               const std::vector<double>& extra) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw InputError("level spacing must be positive");
    }
    const auto [lo, hi] = std::minmax_element(X.values().begin(), X.values().end());
    const auto k0 = static_cast<long long>(std::floor(*lo / spacing)) - 1;
    const auto k1 = static_cast<long long>(std::ceil(*hi / spacing)) + 1;
    std::vector<double> levels;
    levels.reserve(static_cast<std::size_t>(k1 - k0 + 1));
    for (long long k = k0; k <= k1; ++k) {
        levels.push_back(static_cast<double>(k) * spacing);
    }
    std::vector<double> inside;
    for (double e : extra) {
        if (e > levels.front() && e < levels.back()) {
            inside.push_back(e);
        }
    }
    std::sort(inside.begin(), inside.end());
    return merge_sorted_unique(levels, inside);
}

std::vector<std::size_t> time_indices(std::size_t n_samples, std::size_t stride) {
    if (n_samples < 1 || stride < 1) {
        throw InputError("time indices need a positive sample count and stride");
    }
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < n_samples; k += stride) {
        idx.push_back(k);
    }
    if (idx.back() != n_samples - 1) {
        idx.push_back(n_samples - 1);
    }
    return idx;
}

namespace {

void check_levels_and_times(const SimulatedPaths& paths, const std::vector<double>& levels,
                            const std::vector<std::size_t>& time_index) {
    if (levels.size() < 2 || !strictly_increasing(levels)) {
        throw InputError("level grid needs >= 2 strictly increasing points");
    }
    if (time_index.empty()) {
        throw InputError("no time indices requested");
    }
    for (std::size_t r = 0; r < time_index.size(); ++r) {
        if (time_index[r] >= paths.X.size() || (r > 0 && time_index[r] <= time_index[r - 1])) {
            throw InputError("time indices must be strictly increasing sample indices");
        }
    }
}

double max_increment(const SampledPath& X) {
    double r = 0.0;
    for (std::size_t k = 1; k < X.size(); ++k) {
        r = std::max(r, std::abs(X.value(k) - X.value(k - 1)));
    }
    return r;
}

LocalTimeField assemble(const SimulatedPaths& paths, const std::vector<double>& levels,
                        const std::vector<std::size_t>& time_index, std::vector<double> values,
                        double jump_threshold) {
    std::vector<double> times(time_index.size());
    for (std::size_t r = 0; r < time_index.size(); ++r) {
        times[r] = paths.X.x(time_index[r]);
    }
    const double res = max_increment(paths.X);
    SampledField L(times, levels, std::move(values), "L");
    auto parts = decompose_local_time(L, jump_threshold, res);
    return LocalTimeField{times, levels, std::move(L), std::move(parts.Ltilde), std::move(parts.h),
                          kLocalTimeConvention, res};
}

}  // namespace

LocalTimeField local_time_tanaka(const SimulatedPaths& paths, const std::vector<double>& levels,
                                 const std::vector<std::size_t>& time_index,
                                 double jump_threshold) {
    check_levels_and_times(paths, levels, time_index);
    const auto& xv = paths.X.values();
    const auto [lo, hi] = std::minmax_element(xv.begin(), xv.end());
    if (levels.front() > *lo || levels.back() < *hi) {
        throw InputError("level grid does not cover the path range");
    }
    const std::size_t nl = levels.size();
    const double x0 = xv.front();
    // bucket[b] collects increments whose left endpoint exceeds exactly b levels.
    std::vector<CompensatedSum> bucket(nl + 1);
    std::vector<double> out;
    out.reserve(time_index.size() * nl);
    double running_min = x0;
    std::size_t next = 0;
    for (std::size_t k = 0; k < xv.size() && next < time_index.size(); ++k) {
        running_min = std::min(running_min, xv[k]);
        if (k == time_index[next]) {
            CompensatedSum suffix;
            std::vector<double> row(nl);
            for (std::size_t i = nl; i-- > 0;) {
                suffix += bucket[i + 1].value();
                if (levels[i] < running_min) {
                    row[i] = 0.0;  // the indicator sum telescopes exactly
                } else {
                    row[i] = std::max(xv[k] - levels[i], 0.0) - std::max(x0 - levels[i], 0.0) -
                             suffix.value();
                }
            }
            out.insert(out.end(), row.begin(), row.end());
            ++next;
        }
        if (k + 1 < xv.size()) {
            const auto b = static_cast<std::size_t>(
                std::lower_bound(levels.begin(), levels.end(), xv[k]) - levels.begin());
            bucket[b] += xv[k + 1] - xv[k];
        }
    }
    return assemble(paths, levels, time_index, std::move(out), jump_threshold);
}

LocalTimeField local_time_occupation(const SimulatedPaths& paths,
                                     const std::vector<double>& levels,
                                     const std::vector<std::size_t>& time_index, double eps,
                                     double jump_threshold) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw InputError("bandwidth must be positive");
    }
    check_levels_and_times(paths, levels, time_index);
    const auto& xv = paths.X.values();
    const auto& qv = paths.QV.values();
    const std::size_t nl = levels.size();
    std::vector<CompensatedSum> acc(nl);
    std::vector<double> out;
    out.reserve(time_index.size() * nl);
    std::size_t next = 0;
    for (std::size_t k = 0; k < xv.size() && next < time_index.size(); ++k) {
        if (k == time_index[next]) {
            for (std::size_t i = 0; i < nl; ++i) {
                out.push_back(acc[i].value());
            }
            ++next;
        }
        if (k + 1 < xv.size()) {
            const double w = (qv[k + 1] - qv[k]) / (4.0 * eps);
            if (w == 0.0) {
                continue;
            }
            auto first = std::upper_bound(levels.begin(), levels.end(), xv[k] - eps);
            auto last = std::lower_bound(levels.begin(), levels.end(), xv[k] + eps);
            for (auto it = first; it < last; ++it) {
                acc[static_cast<std::size_t>(it - levels.begin())] += w;
            }
        }
    }
    return assemble(paths, levels, time_index, std::move(out), jump_threshold);
}

OccupationCheck occupation_identity_check(const Fn1& phi, const LocalTimeField& field,
                                          const SimulatedPaths& paths,
                                          std::optional<std::size_t> row) {
    const std::size_t r = row.value_or(field.L.nx() - 1);
    if (r >= field.L.nx()) {
        throw InputError("row outside the local-time field");
    }
    const auto& xs = field.levels;
    CompensatedSum lhs;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        lhs += 0.5 * (xs[i] - xs[i - 1]) *
               (phi(xs[i]) * field.L.at(r, i) + phi(xs[i - 1]) * field.L.at(r, i - 1));
    }
    const double t = field.times[r];
    CompensatedSum rhs;
    const auto& xv = paths.X.values();
    const auto& qv = paths.QV.values();
    for (std::size_t k = 0; k + 1 < xv.size() && paths.X.x(k) < t; ++k) {
        rhs += 0.5 * phi(xv[k]) * (qv[k + 1] - qv[k]);
    }
    OccupationCheck c;
    c.lhs = lhs.value();
    c.rhs = rhs.value();
    c.difference = c.lhs - c.rhs;
    c.residual = std::abs(c.difference);
    return c;
}

JumpDecomposition decompose_local_time(const SampledField& L, double jump_threshold,
                                       double resolution) {
    const std::size_t nr = L.nx();
    const std::size_t nc = L.ny();
    auto diff = [&](std::size_t r, std::size_t i) { return L.at(r, i + 1) - L.at(r, i); };

    std::vector<double> mags;
    for (std::size_t i = 0; i + 1 < nc; ++i) {
        const double d = std::abs(diff(nr - 1, i));
        if (d > 0.0) {
            mags.push_back(d);
        }
    }
    double scale = resolution;
    if (!mags.empty()) {
        auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
        std::nth_element(mags.begin(), mid, mags.end());
        scale = std::max(scale, *mid);
    }
    std::vector<std::size_t> flagged;
    if (std::isfinite(jump_threshold)) {
        for (std::size_t i = 0; i + 1 < nc; ++i) {
            if (std::abs(diff(nr - 1, i)) > jump_threshold * scale) {
                flagged.push_back(i);
            }
        }
    }
    std::vector<double> h(nr * nc, 0.0);
    for (std::size_t r = 0; r < nr; ++r) {
        CompensatedSum cum;
        std::size_t f = 0;
        for (std::size_t col = 0; col < nc; ++col) {
            while (f < flagged.size() && flagged[f] + 1 == col) {
                const std::size_t i = flagged[f];
                double base = 0.0;
                int count = 0;
                if (i > 0) {
                    base += diff(r, i - 1);
                    ++count;
                }
                if (i + 2 < nc) {
                    base += diff(r, i + 1);
                    ++count;
                }
                cum += diff(r, i) - (count > 0 ? base / count : 0.0);
                ++f;
            }
            h[r * nc + col] = cum.value();
        }
    }
    std::vector<double> lt(L.values());
    for (std::size_t k = 0; k < lt.size(); ++k) {
        lt[k] -= h[k];
    }
    JumpDecomposition d{SampledField(L.xs(), L.ys(), std::move(lt), "Ltilde"),
                        SampledField(L.xs(), L.ys(), std::move(h), "h"), {}, scale};
    for (std::size_t i : flagged) {
        d.jump_points.push_back(L.ys()[i + 1]);
    }
    return d;
}

std::string to_string(ProbeVerdict v) {
    switch (v) {
        case ProbeVerdict::Stabilizing:
            return "stabilizing";
        case ProbeVerdict::Growing:
            return "growing";
        case ProbeVerdict::Shrinking:
            return "shrinking";
    }
    return "unknown";
}

ExponentProbe pvar_exponent_probe(const std::vector<SampledPath>& slices,
                                  const std::vector<double>& p_list) {
    if (slices.size() < 3) {
        throw InputError("exponent probe needs at least 3 refinement levels");
    }
    ExponentProbe probe;
    for (const auto& s : slices) {
        probe.level_counts.push_back(s.size() - 1);
    }
    for (double p : p_list) {
        ProbeRow row;
        row.p = p;
        for (const auto& s : slices) {
            row.variation.push_back(p_variation_exact(s, p).value);
        }
        const double prev = row.variation[row.variation.size() - 2];
        const double last = row.variation.back();
        if (prev > 0.0) {
            row.relative_change = (last - prev) / prev;
        } else {
            row.relative_change = last > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        }
        if (row.relative_change > 0.1) {
            row.verdict = ProbeVerdict::Growing;
        } else if (row.relative_change < -0.1) {
            row.verdict = ProbeVerdict::Shrinking;
        } else {
            row.verdict = ProbeVerdict::Stabilizing;
        }
        probe.rows.push_back(std::move(row));
    }
    return probe;
}

ExponentProbe pvar_exponent_probe(const SimulatedPaths& paths, const std::vector<double>& p_list,
                                  const std::vector<int>& refinement_exponents) {
    if (refinement_exponents.size() < 3) {
        throw InputError("exponent probe needs at least 3 refinement levels");
    }
    const auto& xv = paths.X.values();
    auto [lo, hi] = std::minmax_element(xv.begin(), xv.end());
    double a = *lo;
    double b = *hi;
    if (!(b > a)) {
        a -= 0.5;
        b += 0.5;
    }
    const std::vector<std::size_t> ends{0, paths.X.size() - 1};
    std::vector<SampledPath> slices;
    for (int e : refinement_exponents) {
        if (e < 1 || e > 24) {
            throw InputError("refinement exponents must lie in [1, 24]");
        }
        const auto levels = linspace(a, b, (std::size_t{1} << e) + 1);
        const auto field =
            local_time_tanaka(paths, levels, ends, std::numeric_limits<double>::infinity());
        slices.push_back(field.final_slice());
    }
    return pvar_exponent_probe(slices, p_list);
}

}  // namespace pqvar
