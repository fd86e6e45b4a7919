// SPDX-License-Identifier: MIT

#include "pqvar/itocheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pqvar/variation.hpp"
#include "pqvar/young.hpp"

namespace pqvar {

double ito_residual(const ItoTerms& t) {
    CompensatedSum s;
    s += t.f_end;
    s += -t.f_start;
    if (t.ds_term) {
        s += -*t.ds_term;
    }
    s += -t.stochastic_integral;
    s += t.local_time_term;
    return std::abs(s.value());
}

double ito_scale(const ItoTerms& t) {
    double s = std::max({1.0, std::abs(t.f_end), std::abs(t.f_start),
                         std::abs(t.stochastic_integral), std::abs(t.local_time_term)});
    if (t.ds_term) {
        s = std::max(s, std::abs(*t.ds_term));
    }
    return s;
}

namespace {

std::vector<SimulatedPaths> coupled_paths(const SemimartingaleSpec& spec,
                                          const std::vector<std::size_t>& schedule) {
    if (schedule.empty()) {
        throw InputError("empty step schedule");
    }
    const std::size_t finest = *std::max_element(schedule.begin(), schedule.end());
    for (std::size_t n : schedule) {
        if (n < 1 || finest % n != 0) {
            throw InputError("every step count must divide the finest one");
        }
    }
    SemimartingaleSpec fine = spec;
    fine.n_steps = finest;
    const auto dw = brownian_increments(fine);
    std::vector<SimulatedPaths> out;
    for (std::size_t n : schedule) {
        SemimartingaleSpec s = spec;
        s.n_steps = n;
        out.push_back(simulate(s, coarsen_increments(dw, finest / n)));
    }
    return out;
}

double spacing_for(const SemimartingaleSpec& spec, std::size_t n, double factor, double exponent) {
    if (!(factor > 0.0) || !(exponent > 0.0)) {
        throw InputError("level factor and exponent must be positive");
    }
    return factor * std::pow(spec.T / static_cast<double>(n), exponent);
}

// Bisects [a, b] while the probed oscillation of any section exceeds tol.
void refine_cell(const std::vector<Fn1>& sections, double a, double b, double tol, int depth,
                 std::vector<double>& out) {
    double osc = 0.0;
    for (const auto& g : sections) {
        const double ga = g(a);
        for (int k = 1; k <= 4; ++k) {
            osc = std::max(osc, std::abs(g(a + (b - a) * k / 4.0) - ga));
        }
    }
    if (osc > tol && depth > 0) {
        const double mid = 0.5 * (a + b);
        if (mid > a && mid < b) {
            refine_cell(sections, a, mid, tol, depth - 1, out);
            out.push_back(mid);
            refine_cell(sections, mid, b, tol, depth - 1, out);
        }
    }
}

std::vector<double> levels_for(const SampledPath& X, double dx,
                               const std::vector<double>& breakpoints,
                               const std::vector<Fn1>& sections, const ItoOptions& o) {
    if (!(o.oscillation_scale > 0.0) || o.max_refinement_depth < 0) {
        throw InputError("oscillation scale must be positive and depth non-negative");
    }
    const auto base = level_grid(X, dx, breakpoints);
    std::vector<double> out{base.front()};
    for (std::size_t i = 1; i < base.size(); ++i) {
        refine_cell(sections, base[i - 1], base[i], o.oscillation_scale * dx,
                    o.max_refinement_depth, out);
        out.push_back(base[i]);
    }
    return out;
}

// x-sections of a time-dependent derivative at three times.
std::vector<Fn1> sections_of(const Fn2& grad, double T) {
    std::vector<Fn1> out;
    for (double s : {T / 3.0, 2.0 * T / 3.0, T}) {
        out.emplace_back([grad, s](double x) { return grad(s, x); });
    }
    return out;
}

double max_abs_increment(const SampledPath& X) {
    double r = 0.0;
    for (std::size_t k = 1; k < X.size(); ++k) {
        r = std::max(r, std::abs(X.value(k) - X.value(k - 1)));
    }
    return r;
}

bool all_zero(const SampledField& f) {
    return std::all_of(f.values().begin(), f.values().end(), [](double v) { return v == 0.0; });
}

double lt_term_1d(const Fn1& grad, const LocalTimeField& field, const ItoOptions& o) {
    const std::size_t last = field.L.nx() - 1;
    LocalTimeIntegralOptions lo;
    lo.asserted_q = o.asserted_q;
    lo.force = o.force;
    std::optional<SampledPath> h;
    if (!all_zero(field.h)) {
        h = field.h.row(last);
    }
    return integrate_f_dL(grad, field.Ltilde.row(last), h, lo).value;
}

SampledField grad_field(const Fn2& grad, const LocalTimeField& field) {
    std::vector<double> g(field.times.size() * field.levels.size());
    for (std::size_t j = 0; j < field.times.size(); ++j) {
        for (std::size_t i = 0; i < field.levels.size(); ++i) {
            g[j * field.levels.size() + i] = grad(field.times[j], field.levels[i]);
        }
    }
    return SampledField(field.times, field.levels, std::move(g), "grad f");
}

// (summation-by-parts value, direct value) of int int g d_{s,x} L.
std::pair<double, double> lt_term_2d(const SampledField& g, const LocalTimeField& field,
                                     std::vector<std::string>& warnings) {
    if (all_zero(field.h)) {
        const auto sbp = summation_by_parts_2d(g, field.Ltilde);
        return {sbp.rhs, sbp.lhs};
    }
    warnings.emplace_back("jump part present; local-time term from direct sums");
    const auto xi = Partition1D::full(g.nx()).indices;
    const auto yj = Partition1D::full(g.ny()).indices;
    const double v = riemann_sum_2d(g, field.Ltilde, xi, yj) + riemann_sum_2d(g, field.h, xi, yj);
    return {v, v};
}

void grid_variation_warning(const Fn1& grad, double a, double b, double q,
                            std::vector<std::string>& warnings) {
    const auto coarse = linspace(a, b, 257);
    const auto fine = linspace(a, b, 1025);
    std::vector<double> vc(coarse.size());
    std::vector<double> vf(fine.size());
    std::transform(coarse.begin(), coarse.end(), vc.begin(), grad);
    std::transform(fine.begin(), fine.end(), vf.begin(), grad);
    const double c = p_variation_exact(SampledPath(coarse, vc), q).value;
    const double f = p_variation_exact(SampledPath(fine, vf), q).value;
    if (f > 1.5 * c + 1e-12) {
        std::ostringstream msg;
        msg << "grid " << q << "-variation of the left derivative grows on refinement (" << c
            << " -> " << f << ")";
        warnings.push_back(msg.str());
    }
}

void singular_start_warning(double x0, const std::vector<double>& breakpoints,
                            std::vector<std::string>& warnings) {
    if (std::find(breakpoints.begin(), breakpoints.end(), x0) != breakpoints.end()) {
        warnings.emplace_back("path starts on a breakpoint of the left derivative");
    }
}

void finish(ItoReport& r) {
    r.terms = r.refinement.back().terms;
    r.residual = r.refinement.back().residual;
    r.scale = ito_scale(r.terms);
}

}  // namespace

ItoReport verify_ito_time_independent(const ScalarFunction& f, const SemimartingaleSpec& spec,
                                      const ItoOptions& options) {
    if (!f.value || !f.left_derivative) {
        throw InputError("function and left derivative must be set");
    }
    ItoReport r;
    r.function = f.name;
    r.form = "time-independent";
    r.seed = spec.seed;
    r.stream = spec.stream;
    singular_start_warning(spec.x0, f.breakpoints, r.warnings);
    const auto all = coupled_paths(spec, options.schedule);
    for (std::size_t lvl = 0; lvl < all.size(); ++lvl) {
        const auto& P = all[lvl];
        const std::size_t n = options.schedule[lvl];
        const double dx = spacing_for(spec, n, options.level_factor, options.level_exponent);
        const auto levels = levels_for(P.X, dx, f.breakpoints, {f.left_derivative}, options);
        const auto field = local_time_tanaka(P, levels, {0, n}, options.jump_threshold);

        const auto& xv = P.X.values();
        ItoTerms t;
        t.f_end = f.value(xv.back());
        t.f_start = f.value(xv.front());
        CompensatedSum stoch;
        for (std::size_t k = 0; k + 1 < xv.size(); ++k) {
            stoch += f.left_derivative(xv[k]) * (xv[k + 1] - xv[k]);
        }
        t.stochastic_integral = stoch.value();
        t.local_time_term = lt_term_1d(f.left_derivative, field, options);

        ItoLevel level{n, ito_residual(t), max_abs_increment(P.X), dx, levels.size(), t};
        r.refinement.push_back(level);

        if (lvl + 1 == all.size()) {
            if (options.asserted_q) {
                grid_variation_warning(f.left_derivative, levels.front(), levels.back(),
                                       *options.asserted_q, r.warnings);
            }
            if (options.second_derivative) {
                CompensatedSum s;
                s += t.f_end;
                s += -t.f_start;
                s += -t.stochastic_integral;
                CompensatedSum abs1;
                CompensatedSum abs3;
                for (std::size_t k = 0; k + 1 < xv.size(); ++k) {
                    const double d = xv[k + 1] - xv[k];
                    s += -0.5 * options.second_derivative(xv[k]) * d * d;
                    abs1 += std::abs(d);
                    abs3 += std::abs(d * d * d);
                }
                r.classical_residual = std::abs(s.value());
                if (options.second_derivative_bound) {
                    double spacing = 0.0;
                    for (std::size_t i = 1; i < levels.size(); ++i) {
                        spacing = std::max(spacing, levels[i] - levels[i - 1]);
                    }
                    const double width = levels.back() - levels.front();
                    double tol = *options.second_derivative_bound * spacing *
                                 (abs1.value() + 2.0 * width);
                    if (options.third_derivative_bound) {
                        tol += *options.third_derivative_bound * abs3.value() / 6.0;
                    }
                    r.classical_tolerance = tol;
                }
            }
        }
    }
    finish(r);
    return r;
}

ItoReport verify_ito_time_dependent(const FieldFunction& f, const SemimartingaleSpec& spec,
                                    const ItoOptions& options) {
    if (!f.value || !f.left_ds || !f.left_dx) {
        throw InputError("function and both left derivatives must be set");
    }
    ItoReport r;
    r.function = f.name;
    r.form = "time-dependent";
    r.seed = spec.seed;
    r.stream = spec.stream;
    if (!(options.gamma >= 1.0)) {
        throw InputError("gamma must be >= 1");
    }
    if (!(options.gamma < 2.0) && !options.force) {
        throw HypothesisError("left x-derivative must have gamma-variation with gamma < 2");
    }
    r.condition = check_series_condition(options.p, options.q, 0.0, 1000, options.gamma);
    if (!r.condition->feasible && !options.force) {
        std::ostringstream msg;
        msg << "series condition fails: 2q + 1 = " << 2.0 * options.q + 1.0
            << " <= 2pq = " << 2.0 * options.p * options.q << " (use force to run anyway)";
        throw HypothesisError(msg.str());
    }
    if (options.slice_stride < 1) {
        throw InputError("slice stride must be >= 1");
    }
    singular_start_warning(spec.x0, f.x_breakpoints, r.warnings);
    const auto all = coupled_paths(spec, options.schedule);
    for (std::size_t lvl = 0; lvl < all.size(); ++lvl) {
        const auto& P = all[lvl];
        const std::size_t n = options.schedule[lvl];
        const double dx = spacing_for(spec, n, options.level_factor, options.field_level_exponent);
        const auto levels = levels_for(P.X, dx, f.x_breakpoints, sections_of(f.left_dx, spec.T), options);
        const auto field = local_time_tanaka(P, levels, time_indices(n + 1, options.slice_stride),
                                             options.jump_threshold);

        const auto& xv = P.X.values();
        const auto& ts = P.X.xs();
        ItoTerms t;
        t.f_end = f.value(ts.back(), xv.back());
        t.f_start = f.value(ts.front(), xv.front());
        CompensatedSum ds;
        CompensatedSum stoch;
        for (std::size_t k = 0; k + 1 < xv.size(); ++k) {
            ds += f.left_ds(ts[k], xv[k]) * (ts[k + 1] - ts[k]);
            stoch += f.left_dx(ts[k], xv[k]) * (xv[k + 1] - xv[k]);
        }
        t.ds_term = ds.value();
        t.stochastic_integral = stoch.value();
        const auto g = grad_field(f.left_dx, field);
        const auto [sbp, direct] = lt_term_2d(g, field, r.warnings);
        t.local_time_term = sbp;
        t.direct_local_time_term = direct;

        ItoLevel level{n, ito_residual(t), max_abs_increment(P.X), dx, levels.size(), t};
        r.refinement.push_back(level);

        if (lvl + 1 == all.size()) {
            // Spot check of the uniform gamma-variation in x on two grids.
            const auto times = linspace(0.0, spec.T, 17);
            double coarse = 0.0;
            double fine = 0.0;
            for (double s : times) {
                const auto xc = linspace(levels.front(), levels.back(), 65);
                const auto xf = linspace(levels.front(), levels.back(), 257);
                std::vector<double> vc(xc.size());
                std::vector<double> vf(xf.size());
                for (std::size_t i = 0; i < xc.size(); ++i) {
                    vc[i] = f.left_dx(s, xc[i]);
                }
                for (std::size_t i = 0; i < xf.size(); ++i) {
                    vf[i] = f.left_dx(s, xf[i]);
                }
                coarse = std::max(coarse, p_variation_exact(SampledPath(xc, vc), options.gamma).value);
                fine = std::max(fine, p_variation_exact(SampledPath(xf, vf), options.gamma).value);
            }
            if (fine > 1.5 * coarse + 1e-12) {
                std::ostringstream msg;
                msg << "grid " << options.gamma
                    << "-variation in x of the left derivative grows on refinement (" << coarse
                    << " -> " << fine << ")";
                r.warnings.push_back(msg.str());
            }
        }
    }
    finish(r);
    return r;
}

namespace {

template <class Fn>
std::vector<ItoReport> run_ensemble(const Fn& one, const SemimartingaleSpec& spec,
                                    std::size_t replicates) {
    std::vector<ItoReport> out(replicates);
    parallel_for(replicates, [&](std::size_t r) {
        SemimartingaleSpec s = spec;
        s.stream = spec.stream + r;
        out[r] = one(s);
    });
    return out;
}

}  // namespace

std::vector<ItoReport> ito_ensemble(const ScalarFunction& f, const SemimartingaleSpec& spec,
                                    std::size_t replicates, const ItoOptions& options) {
    return run_ensemble(
        [&](const SemimartingaleSpec& s) { return verify_ito_time_independent(f, s, options); },
        spec, replicates);
}

std::vector<ItoReport> ito_ensemble(const FieldFunction& f, const SemimartingaleSpec& spec,
                                    std::size_t replicates, const ItoOptions& options) {
    return run_ensemble(
        [&](const SemimartingaleSpec& s) { return verify_ito_time_dependent(f, s, options); },
        spec, replicates);
}

RefinementSummary summarize_refinement(const std::vector<ItoReport>& reports) {
    if (reports.empty()) {
        throw InputError("no reports to summarize");
    }
    RefinementSummary s;
    const std::size_t levels = reports.front().refinement.size();
    std::size_t monotone = 0;
    for (const auto& r : reports) {
        if (r.refinement.size() != levels) {
            throw InputError("reports have different refinement schedules");
        }
        bool ok = true;
        for (std::size_t k = 1; k < levels; ++k) {
            ok = ok && r.refinement[k].residual <= r.refinement[k - 1].residual;
        }
        monotone += ok ? 1 : 0;
    }
    for (std::size_t k = 0; k < levels; ++k) {
        std::vector<double> v;
        for (const auto& r : reports) {
            v.push_back(r.refinement[k].residual);
        }
        std::sort(v.begin(), v.end());
        const std::size_t m = v.size();
        s.median_residual.push_back(m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]));
        s.n_steps.push_back(reports.front().refinement[k].n_steps);
    }
    s.median_nonincreasing = true;
    for (std::size_t k = 1; k < levels; ++k) {
        s.median_nonincreasing =
            s.median_nonincreasing && s.median_residual[k] <= s.median_residual[k - 1];
    }
    s.final_over_first = s.median_residual.front() > 0.0
                             ? s.median_residual.back() / s.median_residual.front()
                             : 0.0;
    s.fraction_monotone = static_cast<double>(monotone) / static_cast<double>(reports.size());
    return s;
}

namespace {

void mark_shrinking(MollifiedRouteTable& t) {
    t.shrinking = true;
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        t.shrinking = t.shrinking && t.rows[k].gap < t.rows[k - 1].gap;
    }
}

void check_orders(const std::vector<int>& orders) {
    if (orders.empty()) {
        throw InputError("empty mollification schedule");
    }
    for (int n : orders) {
        if (n < 1) {
            throw InputError("mollification orders must be >= 1");
        }
    }
}

}  // namespace

MollifiedRouteTable mollified_route_check(const ScalarFunction& f, const SemimartingaleSpec& spec,
                                          const std::vector<int>& orders,
                                          const ItoOptions& options) {
    check_orders(orders);
    const auto P = simulate(spec);
    const std::size_t n = spec.n_steps;
    const double dx = spacing_for(spec, n, options.level_factor, options.level_exponent);
    const auto levels = levels_for(P.X, dx, f.breakpoints, {f.left_derivative}, options);
    const auto field = local_time_tanaka(P, levels, {0, n}, options.jump_threshold);
    const double young = -lt_term_1d(f.left_derivative, field, options);
    const auto& xv = P.X.values();

    const Mollifier rho;
    MollifiedRouteTable t;
    t.function = f.name;
    t.n_steps = n;
    t.scale = std::max(1.0, std::abs(young));
    for (int order : orders) {
        const Fn1 fn = mollify_1d(f.value, order, rho);
        const Fn1 dfn = mollify_1d_derivative(f.value, order, rho);
        MollifiedRow row;
        row.order = order;
        row.young_term = young;
        row.mollified_term = -lt_term_1d(dfn, field, options);
        row.gap = std::abs(row.mollified_term - young);
        CompensatedSum rhs;
        rhs += fn(xv.front());
        for (std::size_t k = 0; k + 1 < xv.size(); ++k) {
            rhs += dfn(xv[k]) * (xv[k + 1] - xv[k]);
        }
        rhs += row.mollified_term;
        rhs += -f.value(xv.back());
        row.rhs_gap = std::abs(rhs.value());
        t.rows.push_back(row);
    }
    mark_shrinking(t);
    return t;
}

MollifiedRouteTable mollified_route_check(const FieldFunction& f, const SemimartingaleSpec& spec,
                                          const std::vector<int>& orders,
                                          const ItoOptions& options) {
    check_orders(orders);
    const auto P = simulate(spec);
    const std::size_t n = spec.n_steps;
    const double dx = spacing_for(spec, n, options.level_factor, options.field_level_exponent);
    const auto levels = levels_for(P.X, dx, f.x_breakpoints, sections_of(f.left_dx, spec.T), options);
    const auto field =
        local_time_tanaka(P, levels, time_indices(n + 1, options.slice_stride), options.jump_threshold);
    std::vector<std::string> warnings;
    const double young = -lt_term_2d(grad_field(f.left_dx, field), field, warnings).first;

    const Mollifier rho;
    MollifiedRouteTable t;
    t.function = f.name;
    t.n_steps = n;
    t.scale = std::max(1.0, std::abs(young));
    for (int order : orders) {
        std::vector<double> g(field.times.size() * field.levels.size());
        parallel_for(field.times.size(), [&](std::size_t j) {
            const double s = field.times[j];
            const Fn1 dfn = mollify_1d_derivative([&f, s](double x) { return f.value(s, x); },
                                                  order, rho);
            for (std::size_t i = 0; i < field.levels.size(); ++i) {
                g[j * field.levels.size() + i] = dfn(field.levels[i]);
            }
        });
        const SampledField gn(field.times, field.levels, std::move(g), "grad f_n");
        MollifiedRow row;
        row.order = order;
        row.young_term = young;
        row.mollified_term = -lt_term_2d(gn, field, warnings).first;
        row.gap = std::abs(row.mollified_term - young);
        t.rows.push_back(row);
    }
    mark_shrinking(t);
    return t;
}

}  // namespace pqvar
