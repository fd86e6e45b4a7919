// SPDX-License-Identifier: MIT
#include "pqvar/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "pqvar/io.hpp"

namespace pqvar::cli {

namespace {

// ---- parameter tables -------------------------------------------------

enum class Kind { Number, Integer, Text, Flag, List };

struct Param {
    std::string name;  // config key; the flag is --name with '_' -> '-'
    Kind kind;
    Json def;
    std::string help;
};

struct Context {
    const Json& cfg;
    std::filesystem::path out_dir;
    std::ostream& out;

    double num(const char* k) const { return number_from(cfg.at(k)); }
    std::size_t count(const char* k) const { return cfg.at(k).get<std::size_t>(); }
    std::uint64_t u64(const char* k) const { return cfg.at(k).get<std::uint64_t>(); }
    std::string text(const char* k) const { return cfg.at(k).get<std::string>(); }
    bool flag(const char* k) const { return cfg.at(k).get<bool>(); }
    std::vector<double> list(const char* k) const {
        std::vector<double> v;
        for (const auto& e : cfg.at(k)) v.push_back(number_from(e));
        return v;
    }
    std::vector<std::size_t> counts(const char* k) const {
        std::vector<std::size_t> v;
        for (double d : list(k)) {
            if (!(d >= 1.0) || d != std::floor(d)) {
                throw InputError(std::string(k) + " entries must be positive integers");
            }
            v.push_back(static_cast<std::size_t>(d));
        }
        return v;
    }
};

struct Command {
    std::string name;
    std::string help;
    std::vector<Param> params;
    std::function<void(Context&)> body;
};

std::string flag_of(const std::string& key) {
    std::string f = "--" + key;
    std::replace(f.begin(), f.end(), '_', '-');
    return f;
}

// Comma-separated numbers, optionally wrapped in brackets: "1,2" or "[1,2]".
std::vector<double> parse_list(std::string s) {
    std::erase(s, ' ');
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) v.push_back(parse_number(tok));
    }
    return v;
}

// Coerces a raw value (from a flag string or a config entry) to the kind.
Json coerce(const Param& p, const Json& raw) {
    const std::string where = "parameter '" + p.name + "'";
    auto from_text = [&](const std::string& s) -> Json {
        switch (p.kind) {
            case Kind::Number: return number(parse_number(s));
            case Kind::Integer: {
                const double d = parse_number(s);
                if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e15)
                    throw InputError(where + " must be a nonnegative integer");
                return static_cast<std::uint64_t>(d);
            }
            case Kind::Text: return s;
            case Kind::Flag:
                if (s == "true" || s == "1") return true;
                if (s == "false" || s == "0") return false;
                throw InputError(where + " must be true or false");
            case Kind::List: {
                Json a = Json::array();
                for (double d : parse_list(s)) a.push_back(number(d));
                return a;
            }
        }
        return nullptr;
    };
    if (raw.is_string()) return from_text(raw.get<std::string>());
    switch (p.kind) {
        case Kind::Number:
            if (raw.is_number()) return number(raw.get<double>());
            break;
        case Kind::Integer:
            if (raw.is_number_unsigned()) return raw;
            if (raw.is_number_integer() && raw.get<std::int64_t>() >= 0) return raw.get<std::uint64_t>();
            if (raw.is_number_float()) return from_text(format_number(raw.get<double>()));
            break;
        case Kind::Flag:
            if (raw.is_boolean()) return raw;
            break;
        case Kind::List:
            if (raw.is_array()) {
                Json a = Json::array();
                for (const auto& e : raw) a.push_back(number(number_from(e)));
                return a;
            }
            if (raw.is_number()) return Json::array({number(raw.get<double>())});
            break;
        case Kind::Text: break;
    }
    throw InputError(where + " has the wrong type: " + raw.dump());
}

void write_json(const Context& ctx, const std::string& file, Json payload) {
    Json doc;
    doc["command"] = ctx.cfg.at("command");
    doc["config"] = ctx.cfg;
    for (auto& [k, v] : payload.items()) doc[k] = v;
    write_file((ctx.out_dir / file).string(), doc.dump(2) + "\n");
}

void write_text(const Context& ctx, const std::string& file, const std::string& content) {
    write_file((ctx.out_dir / file).string(), content);
}

// Plain aligned table for the terminal summary.
void print_table(std::ostream& out, const std::vector<std::string>& head,
                 const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> w(head.size());
    for (std::size_t c = 0; c < head.size(); ++c) w[c] = head[c].size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size() && c < w.size(); ++c) w[c] = std::max(w[c], r[c].size());
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            out << (c ? "  " : "") << std::left << std::setw(static_cast<int>(w[c])) << r[c];
        }
        out << '\n';
    };
    line(head);
    for (const auto& r : rows) line(r);
}

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

// Small-denominator fraction equal to v within 1e-12, if any.
std::string as_fraction(double v) {
    for (int q = 1; q <= 1000; ++q) {
        const double p = std::round(v * q);
        if (std::abs(v - p / q) < 1e-12) {
            return q == 1 ? format_number(p) : format_number(p) + "/" + std::to_string(q);
        }
    }
    return fmt(v);
}

// ---- shared builders --------------------------------------------------

// "c" (constant), "linear(a,b)" = a + b x, "ou(k)" = -k x.
Fn2 coefficient(const std::string& spec) {
    const auto open = spec.find('(');
    if (open == std::string::npos) {
        const double c = parse_number(spec);
        return [c](double, double) { return c; };
    }
    if (spec.back() != ')') throw InputError("malformed coefficient: " + spec);
    const std::string name = spec.substr(0, open);
    const auto args = parse_list(spec.substr(open + 1, spec.size() - open - 2));
    if (name == "linear" && args.size() == 2) {
        const double a = args[0], b = args[1];
        return [a, b](double, double x) { return a + b * x; };
    }
    if (name == "ou" && args.size() == 1) {
        const double k = args[0];
        return [k](double, double x) { return -k * x; };
    }
    throw InputError("unknown coefficient: " + spec + " (use a number, linear(a,b) or ou(k))");
}

std::vector<Param> process_params(std::size_t n_steps, double x0) {
    return {
        {"T", Kind::Number, 1.0, "time horizon"},
        {"n_steps", Kind::Integer, n_steps, "Euler steps"},
        {"x0", Kind::Number, x0, "initial value"},
        {"drift", Kind::Text, "0", "drift b(s,x): number, linear(a,b) or ou(k)"},
        {"volatility", Kind::Text, "1", "volatility sigma(s,x): number or linear(a,b)"},
        {"stream", Kind::Integer, 0, "base stream; replicate r uses stream + r"},
    };
}

SemimartingaleSpec process_spec(const Context& ctx) {
    SemimartingaleSpec s;
    s.T = ctx.num("T");
    s.n_steps = ctx.count("n_steps");
    s.x0 = ctx.num("x0");
    s.drift_name = ctx.text("drift");
    s.volatility_name = ctx.text("volatility");
    s.drift = coefficient(s.drift_name);
    s.volatility = coefficient(s.volatility_name);
    s.seed = ctx.u64("seed");
    s.stream = ctx.u64("stream");
    s.validate();
    return s;
}

// n intervals of [a, b].
std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    if (n < 1 || !(b > a)) throw InputError("grid needs n >= 1 and b > a");
    return linspace(a, b, n + 1);
}

bool is_field_spec(const std::string& spec) {
    try {
        (void)field_test_function(spec);
        return true;
    } catch (const InputError&) {
        return false;
    }
}

std::vector<std::size_t> schedule_of(const Context& ctx) {
    const auto lo = ctx.count("lo");
    const auto hi = ctx.count("hi");
    if (lo > hi || hi > 24) throw InputError("schedule needs lo <= hi <= 24");
    return dyadic_schedule(static_cast<int>(lo), static_cast<int>(hi));
}

ItoOptions ito_options(const Context& ctx) {
    ItoOptions o;
    o.schedule = ctx.counts("schedule");
    o.level_factor = ctx.num("level_factor");
    o.slice_stride = ctx.count("slice_stride");
    o.gamma = ctx.num("gamma");
    o.p = ctx.num("p");
    o.q = ctx.num("q");
    if (ctx.num("asserted_q") > 0.0) o.asserted_q = ctx.num("asserted_q");
    o.force = ctx.flag("force");
    return o;
}

std::vector<Param> ito_params() {
    return {
        {"schedule", Kind::List, Json::array({1024, 4096, 16384}), "step counts, each dividing the last"},
        {"level_factor", Kind::Number, 0.25, "level spacing factor"},
        {"slice_stride", Kind::Integer, 16, "steps per local-time slice (time-dependent form)"},
        {"asserted_q", Kind::Number, 0.0, "asserted variation exponent of grad f (0: none)"},
        {"gamma", Kind::Number, 1.0, "gamma-variation exponent of grad f in x"},
        {"p", Kind::Number, 1.0, "p of the series condition"},
        {"q", Kind::Number, 1.0, "q of the series condition"},
    };
}

struct EnsembleOutcome {
    RefinementSummary summary;
    std::size_t within_tol = 0;
};

// Per-replicate ItoReport files plus one merged summary.
EnsembleOutcome write_ito_ensemble(Context& ctx, const std::string& function, const std::string& form,
                                   const std::string& prefix) {
    SemimartingaleSpec spec = process_spec(ctx);
    const ItoOptions opt = ito_options(ctx);
    const std::size_t reps = ctx.count("seeds");
    if (reps == 0) throw InputError("seeds must be at least 1");
    std::vector<ItoReport> reports;
    if (form == "time-independent") {
        reports = ito_ensemble(scalar_test_function(function), spec, reps, opt);
    } else if (form == "time-dependent") {
        reports = ito_ensemble(field_test_function(function), spec, reps, opt);
    } else {
        throw InputError("form must be time-independent or time-dependent");
    }
    const double tol = ctx.num("tol");
    EnsembleOutcome res;
    std::vector<std::vector<std::string>> rows;
    Json merged = Json::array();
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const auto& rep = reports[r];
        Json payload;
        payload["replicate"] = r;
        payload["report"] = to_json(rep);
        write_json(ctx, prefix + "_" + std::to_string(r) + ".json", std::move(payload));
        const bool ok = rep.residual <= tol * rep.scale;
        res.within_tol += ok ? 1 : 0;
        std::string trail;
        for (const auto& l : rep.refinement) trail += (trail.empty() ? "" : " -> ") + fmt(l.residual);
        rows.push_back({std::to_string(r), std::to_string(rep.stream), trail, ok ? "yes" : "no",
                        std::to_string(rep.warnings.size())});
        Json m;
        m["replicate"] = r;
        m["stream"] = rep.stream;
        m["residual"] = number(rep.residual);
        m["scale"] = number(rep.scale);
        merged.push_back(std::move(m));
    }
    res.summary = summarize_refinement(reports);
    Json payload;
    payload["function"] = function;
    payload["form"] = form;
    payload["replicates"] = merged;
    payload["refinement"] = to_json(res.summary);
    payload["within_tolerance"] = res.within_tol;
    write_json(ctx, prefix + "_summary.json", std::move(payload));

    ctx.out << function << " (" << form << "), " << reps << " replicate(s)\n";
    print_table(ctx.out, {"rep", "stream", "residual by level", "<= tol*scale", "warnings"}, rows);
    std::string med;
    for (double m : res.summary.median_residual) med += (med.empty() ? "" : " -> ") + fmt(m);
    ctx.out << "median residual: " << med << ", final/first " << fmt(res.summary.final_over_first)
            << ", monotone fraction " << fmt(res.summary.fraction_monotone) << '\n';
    return res;
}

// ---- commands ---------------------------------------------------------

void cmd_simulate(Context& ctx) {
    SemimartingaleSpec spec = process_spec(ctx);
    const std::size_t reps = ctx.count("seeds");
    const std::uint64_t base = spec.stream;
    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < reps; ++r) {
        spec.stream = base + r;
        const SimulatedPaths paths = simulate(spec);
        double max_inc = 0.0;
        for (std::size_t k = 1; k < paths.X.size(); ++k)
            max_inc = std::max(max_inc, std::abs(paths.X.value(k) - paths.X.value(k - 1)));
        Json payload;
        payload["replicate"] = r;
        payload["seed"] = spec.seed;
        payload["stream"] = spec.stream;
        payload["X"] = to_json(paths.X);
        payload["M"] = to_json(paths.M);
        payload["V"] = to_json(paths.V);
        payload["QV"] = to_json(paths.QV);
        const std::string tag = std::to_string(r);
        write_json(ctx, "simulate_" + tag + ".json", std::move(payload));
        write_text(ctx, "X_" + tag + ".csv", path_to_csv(paths.X));
        rows.push_back({tag, std::to_string(spec.stream), fmt(paths.X.values().back()),
                        fmt(paths.QV.values().back()), fmt(max_inc)});
    }
    print_table(ctx.out, {"rep", "stream", "X_T", "<M>_T", "max|dX|"}, rows);
}

void cmd_variation(Context& ctx) {
    const std::string input = ctx.text("input");
    const std::string function = ctx.text("function");
    if (input.empty() == function.empty()) throw InputError("give exactly one of --input or --function");
    const double p = ctx.num("p");
    const double q = ctx.num("q");

    std::optional<SampledPath> path;
    std::optional<SampledField> field;
    if (!input.empty()) {
        const std::string text = read_file(input);
        const bool json = input.size() >= 5 && input.substr(input.size() - 5) == ".json";
        if (json) {
            const Json j = Json::parse(text);
            if (j.contains("ys")) field = field_from_json(j); else path = path_from_json(j);
        } else if (text.rfind("x\\y", 0) == 0) {
            field = field_from_csv(text);
        } else {
            path = path_from_csv(text);
        }
    } else {
        const auto grid = uniform_grid(ctx.num("a"), ctx.num("b"), ctx.count("n"));
        if (is_field_spec(function)) field = make_test_function(function, grid, grid);
        else path = make_test_function(function, grid);
    }

    Json payload;
    std::vector<std::vector<std::string>> rows;
    if (path) {
        const VariationReport rep = p_variation_exact(*path, p);
        payload["kind"] = "path";
        payload["report"] = to_json(rep);
        rows.push_back({"p-variation", fmt(p), fmt(rep.value), to_string(rep.exactness)});
        const std::size_t levels = ctx.count("dyadic_levels");
        if (levels > 0) {
            if (function.empty()) throw InputError("dyadic bound needs --function");
            const ScalarFunction f = scalar_test_function(function);
            const DyadicBound b = dyadic_variation_bound(f.value, ctx.num("a"), ctx.num("b"),
                                                         static_cast<int>(levels), p, ctx.num("gamma"));
            payload["dyadic_bound"] = to_json(b);
            rows.push_back({"dyadic bound", fmt(p), fmt(b.value), to_string(b.exactness)});
        }
    } else {
        const VariationReport rep = pq_variation_grid(*field, p, q);
        payload["kind"] = "field";
        payload["report"] = to_json(rep);
        rows.push_back({"p,q-variation", fmt(p) + "," + fmt(q), fmt(rep.value), to_string(rep.exactness)});
    }
    write_json(ctx, "variation.json", std::move(payload));
    print_table(ctx.out, {"quantity", "exponents", "value", "exactness"}, rows);
}

void print_levels(std::ostream& out, const IntegralResult& r, double tol, const std::string& unit) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [n, s] : r.levels) rows.push_back({std::to_string(n), format_number(s)});
    print_table(out, {unit, "sum"}, rows);
    out << "gap " << fmt(r.gap) << ", tol " << fmt(tol) << ": "
        << (r.converged ? "converged" : "not converged") << '\n';
}

void cmd_young1d(Context& ctx) {
    const ScalarFunction f = scalar_test_function(ctx.text("f"));
    const ScalarFunction g = scalar_test_function(ctx.text("g"));
    const double a = ctx.num("a");
    const double b = ctx.num("b");
    Young1DOptions opt;
    opt.schedule = schedule_of(ctx);
    opt.tol = ctx.num("tol");
    opt.force = ctx.flag("force");
    if (ctx.num("p") > 0.0 && ctx.num("q") > 0.0) opt.exponents = std::make_pair(ctx.num("p"), ctx.num("q"));
    for (double x : f.breakpoints)
        if (x > a && x < b) opt.required_points.push_back(x);
    const IntegralResult r = young_integral_1d(f.value, g.value, a, b, opt);
    Json payload;
    payload["result"] = to_json(r);
    write_json(ctx, "young1d.json", std::move(payload));
    ctx.out << "int " << f.name << " d(" << g.name << ") over [" << fmt(a) << ", " << fmt(b) << "]\n";
    print_levels(ctx.out, r, opt.tol, "intervals");
}

void cmd_young2d(Context& ctx) {
    const FieldFunction F = field_test_function(ctx.text("F"));
    const FieldFunction G = field_test_function(ctx.text("G"));
    const Rect dom{ctx.num("x0"), ctx.num("x1"), ctx.num("y0"), ctx.num("y1")};
    Json payload;
    if (ctx.num("p") > 0.0 && ctx.num("q") > 0.0) {
        const SeriesCondition c = check_series_condition(ctx.num("p"), ctx.num("q"));
        payload["condition"] = to_json(c);
        if (!c.feasible && !ctx.flag("force")) {
            throw HypothesisError("series condition 2q+1 > 2pq fails for the asserted (p, q)");
        }
    }
    Young2DOptions opt;
    opt.schedule = schedule_of(ctx);
    opt.tol = ctx.num("tol");
    // The large-jump lines are always detected on a check grid and forced in.
    const double eps = ctx.num("jump_epsilon");
    if (eps > 0.0) {
        const std::size_t m = ctx.count("jump_grid");
        const auto xs = uniform_grid(dom.x0, dom.x1, m);
        const auto ys = uniform_grid(dom.y0, dom.y1, m);
        std::vector<double> v;
        for (double x : xs)
            for (double y : ys) v.push_back(G.value(x, y));
        const SampledField g(xs, ys, v);
        opt.jumps = detect_large_jumps(g, eps, ConvexGauge::power(1.0), ConvexGauge::power(1.0));
    }
    Json jumps;
    jumps["x"] = opt.jumps.x;
    jumps["y"] = opt.jumps.y;
    payload["jumps"] = jumps;
    const IntegralResult fwd = young_integral_2d(F.value, G.value, dom, opt);
    const IntegralResult bwd = young_integral_2d_backward(F.value, G.value, dom, opt);
    payload["forward"] = to_json(fwd);
    payload["backward"] = to_json(bwd);
    const double gap = std::abs(fwd.value - bwd.value);
    payload["forward_backward_gap"] = number(gap);
    const auto orders = ctx.list("orders");
    if (!orders.empty()) {
        std::vector<int> ns;
        for (double o : orders) ns.push_back(static_cast<int>(o));
        const auto seq = mollified_sequence(F.value, G.value, ns, dom.x0, ctx.count("mollifier_nodes"));
        payload["dominated_convergence"] = to_json(dominated_convergence_test(seq, F.value, G.value, dom, opt));
    }
    write_json(ctx, "young2d.json", std::move(payload));
    ctx.out << "int int " << F.name << " d(" << G.name << "), forward (lower-left corner)\n";
    print_levels(ctx.out, fwd, opt.tol, "cells");
    ctx.out << "backward (upper-right) " << format_number(bwd.value) << ", forward/backward gap "
            << fmt(gap) << '\n';
}

void cmd_localtime(Context& ctx) {
    SemimartingaleSpec spec = process_spec(ctx);
    const std::size_t reps = ctx.count("seeds");
    const std::uint64_t base = spec.stream;
    const double spacing = ctx.num("spacing");
    const std::string estimator = ctx.text("estimator");
    if (estimator != "tanaka" && estimator != "occupation")
        throw InputError("estimator must be tanaka or occupation");
    const double eps = ctx.num("eps") > 0.0 ? ctx.num("eps") : spacing;
    const auto probe_p = ctx.list("probe");
    std::vector<std::vector<std::string>> rows;
    Json merged = Json::array();
    CompensatedSum sum, sum2;
    for (std::size_t r = 0; r < reps; ++r) {
        spec.stream = base + r;
        const SimulatedPaths paths = simulate(spec);
        const auto levels = level_grid(paths.X, spacing, {spec.x0});
        const auto times = time_indices(paths.X.size(), ctx.count("stride"));
        const LocalTimeField lt = estimator == "tanaka"
            ? local_time_tanaka(paths, levels, times, ctx.num("jump_threshold"))
            : local_time_occupation(paths, levels, times, eps, ctx.num("jump_threshold"));
        const OccupationCheck occ = occupation_identity_check([](double) { return 1.0; }, lt, paths);
        const double at_x0 = lt.final_slice().interpolate(spec.x0);
        sum.add(at_x0);
        sum2.add(at_x0 * at_x0);
        std::size_t jumps = 0;
        for (double h : lt.h.values()) jumps += h != 0.0 ? 1 : 0;
        Json payload;
        payload["replicate"] = r;
        payload["seed"] = spec.seed;
        payload["stream"] = spec.stream;
        payload["local_time"] = to_json(lt);
        payload["occupation_check"] = to_json(occ);
        payload["L_T_at_x0"] = number(at_x0);
        if (!probe_p.empty()) payload["probe"] = to_json(pvar_exponent_probe(paths, probe_p));
        const std::string tag = std::to_string(r);
        write_json(ctx, "localtime_" + tag + ".json", std::move(payload));
        write_text(ctx, "L_" + tag + ".csv", field_to_csv(lt.L));
        Json m;
        m["replicate"] = r;
        m["stream"] = spec.stream;
        m["L_T_at_x0"] = number(at_x0);
        m["occupation_difference"] = number(occ.difference);
        merged.push_back(std::move(m));
        rows.push_back({tag, std::to_string(spec.stream), fmt(at_x0), fmt(occ.lhs), fmt(occ.rhs),
                        std::to_string(jumps)});
    }
    const double n = static_cast<double>(reps);
    const double mean = sum.value() / n;
    const double var = reps > 1 ? std::max(0.0, (sum2.value() - n * mean * mean) / (n - 1.0)) : 0.0;
    Json payload;
    payload["convention"] = kLocalTimeConvention;
    payload["replicates"] = merged;
    payload["mean_L_T_at_x0"] = number(mean);
    payload["standard_error"] = number(std::sqrt(var / n));
    write_json(ctx, "localtime_summary.json", std::move(payload));
    print_table(ctx.out, {"rep", "stream", "L(T,x0)", "int L dx", "<M>_T/2", "jump cells"}, rows);
    ctx.out << "mean L(T,x0) " << fmt(mean) << " +- " << fmt(std::sqrt(var / n)) << " (convention "
            << kLocalTimeConvention << ")\n";
}

void cmd_ito_check(Context& ctx) {
    const std::string function = ctx.text("function");
    const std::string form = ctx.text("form");
    write_ito_ensemble(ctx, function, form, "ito");
    const auto orders = ctx.list("mollify_orders");
    if (!orders.empty()) {
        std::vector<int> ns;
        for (double o : orders) ns.push_back(static_cast<int>(o));
        const SemimartingaleSpec spec = process_spec(ctx);
        const ItoOptions opt = ito_options(ctx);
        const MollifiedRouteTable t = form == "time-independent"
            ? mollified_route_check(scalar_test_function(function), spec, ns, opt)
            : mollified_route_check(field_test_function(function), spec, ns, opt);
        Json payload;
        payload["mollified_route"] = to_json(t);
        write_json(ctx, "ito_mollified.json", std::move(payload));
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : t.rows)
            rows.push_back({std::to_string(r.order), fmt(r.mollified_term), fmt(r.young_term), fmt(r.gap)});
        print_table(ctx.out, {"n", "mollified term", "young term", "gap"}, rows);
    }
}

void cmd_condition_check(Context& ctx) {
    const double gamma = ctx.num("gamma");
    const SeriesCondition c = check_series_condition(ctx.num("p"), ctx.num("q"), ctx.num("delta"), 1000,
                                                     gamma > 0.0 ? std::optional<double>(gamma) : std::nullopt);
    Json payload;
    payload["condition"] = to_json(c);
    write_json(ctx, "condition.json", std::move(payload));
    ctx.out << "p = " << fmt(c.p) << ", q = " << fmt(c.q) << ": 2q+1 = " << fmt(2 * c.q + 1)
            << ", 2pq = " << fmt(2 * c.p * c.q) << '\n';
    ctx.out << "alpha interval (" << as_fraction(c.alpha_lower) << ", " << as_fraction(c.alpha_upper)
            << ") = (" << format_number(c.alpha_lower) << ", " << format_number(c.alpha_upper) << ")\n";
    if (c.feasible) {
        ctx.out << "feasible: alpha = " << fmt(*c.alpha) << ", delta = " << fmt(c.delta)
                << ", series bound " << fmt(c.tail_bound) << '\n';
    } else if (ctx.flag("force")) {
        ctx.out << "infeasible (reported only, --force given)\n";
    } else {
        ctx.out << "infeasible\n";
        throw HypothesisError("series condition 2q+1 > 2pq fails");
    }
}

// Points where x sin(1/x + 1) reaches +-x and where it vanishes.
std::vector<double> dichotomy_grid(std::size_t k) {
    std::vector<double> xs{1.0};
    for (std::size_t i = 1; i <= k; ++i) {
        const double ip = static_cast<double>(i) * std::numbers::pi;
        xs.push_back(1.0 / (ip + std::numbers::pi / 2 - 1.0));
        xs.push_back(1.0 / (ip - 1.0));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

void example_dichotomy(Context& ctx) {
    const FieldFunction G = field_test_function("xysin");
    auto field_at = [&](std::size_t k) {
        const auto xs = dichotomy_grid(k);
        const std::vector<double> ys{0.0, 1.0};
        std::vector<double> v;
        for (double x : xs)
            for (double y : ys) v.push_back(G.value(x, y));
        return SampledField(xs, ys, v);
    };
    Json growth = Json::array();
    std::vector<std::vector<std::string>> rows;
    double partial = 0.0;
    for (std::size_t k = 1; k <= 10; ++k) {
        partial += 1.0 / (static_cast<double>(k) * std::numbers::pi + std::numbers::pi / 2 - 1.0);
        const VariationReport r = pq_variation_grid(field_at(k), 1.0, 1.0);
        Json row;
        row["k"] = k;
        row["variation_1_1"] = number(r.value);
        row["partial_sum"] = number(partial);
        row["exactness"] = to_string(r.exactness);
        growth.push_back(std::move(row));
        rows.push_back({std::to_string(k), fmt(r.value), fmt(partial)});
    }
    ctx.out << "1,1-variation against the divergent partial sums\n";
    print_table(ctx.out, {"k", "1,1-variation", "partial sum"}, rows);
    Json stable = Json::array();
    rows.clear();
    double prev = 0.0;
    for (std::size_t k : {160u, 320u, 640u}) {
        const VariationReport r = pq_variation_grid(field_at(k), 1.5, 1.0);
        Json row;
        row["k"] = k;
        row["variation_1.5_1"] = number(r.value);
        row["relative_change"] = prev > 0.0 ? number((r.value - prev) / prev) : Json(nullptr);
        stable.push_back(std::move(row));
        rows.push_back({std::to_string(k), fmt(r.value), prev > 0.0 ? fmt((r.value - prev) / prev) : "-"});
        prev = r.value;
    }
    ctx.out << "1.5,1-variation under refinement\n";
    print_table(ctx.out, {"k", "1.5,1-variation", "relative change"}, rows);
    Json payload;
    payload["growth"] = growth;
    payload["stabilization"] = stable;
    write_json(ctx, "dichotomy.json", std::move(payload));
}

void example_mollifier(Context& ctx) {
    const std::vector<std::pair<std::string, std::string>> pairs{
        {"xysin", "xy"}, {"x3t3cos", "xy"}, {"xy", "xysin"}};
    Young2DOptions opt;
    opt.schedule = dyadic_schedule(2, 6);
    opt.tol = ctx.num("tol");
    const Rect dom{};
    Json tables = Json::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& [fs, gs] : pairs) {
        const FieldFunction F = field_test_function(fs);
        const FieldFunction G = field_test_function(gs);
        const auto seq = mollified_sequence(F.value, G.value, {8, 32, 128}, 0.0, 32);
        const DominatedConvergenceTable t = dominated_convergence_test(seq, F.value, G.value, dom, opt);
        Json j;
        j["F"] = fs;
        j["G"] = gs;
        j["table"] = to_json(t);
        tables.push_back(std::move(j));
        std::string gaps;
        for (double g : t.gaps) gaps += (gaps.empty() ? "" : " -> ") + fmt(g);
        rows.push_back({fs, gs, gaps, t.strictly_decreasing ? "yes" : "no"});
    }
    Json payload;
    payload["tables"] = tables;
    write_json(ctx, "mollifier.json", std::move(payload));
    print_table(ctx.out, {"F", "G", "gaps for n = 8, 32, 128", "strictly decreasing"}, rows);
}

void example_convention(Context& ctx) {
    // Brownian motion from 0; L(1, 0) has mean sqrt(2/pi)/2 under this convention.
    SemimartingaleSpec spec = process_spec(ctx);
    const std::size_t reps = ctx.count("seeds");
    std::vector<double> vals(reps), diffs(reps);
    parallel_for(reps, [&](std::size_t r) {
        SemimartingaleSpec s = spec;
        s.stream = spec.stream + r;
        const SimulatedPaths paths = simulate(s);
        const auto levels = level_grid(paths.X, 0.01, {0.0});
        const auto times = time_indices(paths.X.size(), paths.X.size() - 1);
        const LocalTimeField lt = local_time_tanaka(paths, levels, times);
        vals[r] = lt.final_slice().interpolate(0.0);
        diffs[r] = occupation_identity_check([](double) { return 1.0; }, lt, paths).difference;
    });
    auto mean_se = [](const std::vector<double>& v) {
        CompensatedSum s;
        for (double x : v) s.add(x);
        const double n = static_cast<double>(v.size());
        const double m = s.value() / n;
        CompensatedSum d;
        for (double x : v) d.add((x - m) * (x - m));
        return std::make_pair(m, v.size() > 1 ? std::sqrt(d.value() / (n - 1.0) / n) : 0.0);
    };
    const auto [m, se] = mean_se(vals);
    const auto [dm, dse] = mean_se(diffs);
    const double target = 0.5 * std::sqrt(2.0 / std::numbers::pi);
    Json payload;
    payload["convention"] = kLocalTimeConvention;
    Json all = Json::array();
    for (double v : vals) all.push_back(number(v));
    payload["L_1_0_values"] = std::move(all);
    payload["mean"] = number(m);
    payload["standard_error"] = number(se);
    payload["target"] = number(target);
    payload["occupation_mean_difference"] = number(dm);
    payload["occupation_standard_error"] = number(dse);
    write_json(ctx, "convention.json", std::move(payload));
    print_table(ctx.out, {"quantity", "mean", "std err", "target"},
                {{"L(1,0)", fmt(m), fmt(se), fmt(target)},
                 {"int L dx - t/2", fmt(dm), fmt(dse), "0"}});
}

void cmd_examples(Context& ctx) {
    const std::string name = ctx.text("name");
    if (name == "tanaka") {
        const auto res = write_ito_ensemble(ctx, "ramp(0.1)", "time-independent", "ito");
        ctx.out << res.summary.n_steps.size() << " levels, " << ctx.count("seeds") << " ItoReports written\n";
    } else if (name == "oscillating") {
        write_ito_ensemble(ctx, "x3cos", "time-independent", "ito");
    } else if (name == "oscillating-time") {
        write_ito_ensemble(ctx, "x3t3cos", "time-dependent", "ito");
    } else if (name == "dichotomy") {
        example_dichotomy(ctx);
    } else if (name == "mollifier") {
        example_mollifier(ctx);
    } else if (name == "convention") {
        example_convention(ctx);
    } else {
        throw InputError("unknown example '" + name +
                         "' (tanaka, oscillating, oscillating-time, dichotomy, mollifier, convention)");
    }
}

std::vector<Param> join(std::vector<Param> a, const std::vector<Param>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<Param> common_params(double tol, std::size_t seeds) {
    return {
        {"out", Kind::Text, "out", "output directory"},
        {"seed", Kind::Integer, 1, "random seed"},
        {"seeds", Kind::Integer, seeds, "number of replicates"},
        {"force", Kind::Flag, false, "proceed even if a hypothesis check fails"},
        {"tol", Kind::Number, tol, "tolerance"},
    };
}

std::vector<Command> commands() {
    std::vector<Command> c;
    c.push_back({"simulate", "simulate X = M + V on a uniform time grid",
                 join(common_params(1e-3, 1), process_params(1024, 0.0)), cmd_simulate});
    c.push_back({"variation", "p-variation of a path or p,q-variation of a field",
                 join(common_params(1e-3, 1),
                      {{"input", Kind::Text, "", "CSV or JSON path/field file"},
                       {"function", Kind::Text, "", "test function spec (instead of --input)"},
                       {"a", Kind::Number, 0.0, "grid start"},
                       {"b", Kind::Number, 1.0, "grid end"},
                       {"n", Kind::Integer, 64, "grid intervals per axis"},
                       {"p", Kind::Number, 2.0, "exponent p"},
                       {"q", Kind::Number, 1.0, "exponent q (fields)"},
                       {"dyadic_levels", Kind::Integer, 0, "also report the dyadic bound up to this level"},
                       {"gamma", Kind::Number, 2.0, "dyadic bound weight exponent"}}),
                 cmd_variation});
    c.push_back({"young1d", "left-point Riemann-Stieltjes refinement of int f dg",
                 join(common_params(1e-3, 1),
                      {{"f", Kind::Text, "identity", "integrand spec"},
                       {"g", Kind::Text, "polynomial(0,0,1)", "integrator spec"},
                       {"a", Kind::Number, 0.0, "interval start"},
                       {"b", Kind::Number, 1.0, "interval end"},
                       {"lo", Kind::Integer, 4, "coarsest level 2^lo"},
                       {"hi", Kind::Integer, 12, "finest level 2^hi"},
                       {"p", Kind::Number, 0.0, "asserted exponent of f (0: none)"},
                       {"q", Kind::Number, 0.0, "asserted exponent of g (0: none)"}}),
                 cmd_young1d});
    c.push_back({"young2d", "two-parameter Riemann sums of int int F dG",
                 join(common_params(1e-3, 1),
                      {{"F", Kind::Text, "xy", "integrand field spec"},
                       {"G", Kind::Text, "xy", "integrator field spec"},
                       {"x0", Kind::Number, 0.0, "x start"},
                       {"x1", Kind::Number, 1.0, "x end"},
                       {"y0", Kind::Number, 0.0, "y start"},
                       {"y1", Kind::Number, 1.0, "y end"},
                       {"lo", Kind::Integer, 2, "coarsest level 2^lo cells per axis"},
                       {"hi", Kind::Integer, 10, "finest level"},
                       {"p", Kind::Number, 0.0, "asserted p (0: unchecked)"},
                       {"q", Kind::Number, 0.0, "asserted q (0: unchecked)"},
                       {"jump_epsilon", Kind::Number, 0.5, "large-jump threshold (0: skip)"},
                       {"jump_grid", Kind::Integer, 32, "cells per axis of the jump check grid"},
                       {"orders", Kind::List, Json::array(), "mollifier orders for a dominated-convergence table"},
                       {"mollifier_nodes", Kind::Integer, 32, "mollifier quadrature nodes"}}),
                 cmd_young2d});
    c.push_back({"localtime", "local-time field of simulated paths",
                 join(join(common_params(1e-3, 1), process_params(4096, 0.0)),
                      {{"spacing", Kind::Number, 0.02, "level spacing"},
                       {"stride", Kind::Integer, 64, "steps per time slice"},
                       {"estimator", Kind::Text, "tanaka", "tanaka or occupation"},
                       {"eps", Kind::Number, 0.0, "occupation window (0: spacing)"},
                       {"jump_threshold", Kind::Number, 25.0, "jump detection threshold"},
                       {"probe", Kind::List, Json::array(), "p values for the variation-exponent probe"}}),
                 cmd_localtime});
    c.push_back({"ito-check", "generalized Ito formula residuals under refinement",
                 join(join(join(common_params(1e-2, 1), process_params(16384, 0.2)), ito_params()),
                      {{"function", Kind::Text, "x3cos", "scalar spec, or field spec for time-dependent"},
                       {"form", Kind::Text, "time-independent", "time-independent or time-dependent"},
                       {"mollify_orders", Kind::List, Json::array(), "orders for the mollified-route table"}}),
                 cmd_ito_check});
    c.push_back({"condition-check", "feasibility of the two-parameter series condition",
                 join(common_params(1e-3, 1),
                      {{"p", Kind::Number, 1.0, "exponent p"},
                       {"q", Kind::Number, 1.0, "exponent q"},
                       {"delta", Kind::Number, 0.0, "local-time margin (0: automatic)"},
                       {"gamma", Kind::Number, 0.0, "gamma of the integrand (0: not asserted)"}}),
                 cmd_condition_check});
    c.push_back({"examples", "named worked examples",
                 join(join(join(common_params(1e-2, 10), process_params(16384, 0.2)), ito_params()),
                      {{"name", Kind::Text, "tanaka",
                        "tanaka, oscillating, oscillating-time, dichotomy, mollifier or convention"}}),
                 cmd_examples});
    return c;
}

Json effective_config(const Command& cmd, const std::map<std::string, std::string>& flags,
                      const std::string& config_path) {
    Json cfg;
    cfg["command"] = cmd.name;
    for (const auto& p : cmd.params) cfg[p.name] = p.def;
    if (!config_path.empty()) {
        Json file;
        try {
            file = Json::parse(read_file(config_path));
        } catch (const Json::parse_error& e) {
            throw InputError("malformed config '" + config_path + "': " + e.what());
        }
        if (!file.is_object()) throw InputError("config must be a JSON object");
        for (const auto& [k, v] : file.items()) {
            if (k == "command") {
                if (v != cmd.name) throw InputError("config is for command " + v.dump());
                continue;
            }
            const auto it = std::find_if(cmd.params.begin(), cmd.params.end(),
                                         [&](const Param& p) { return p.name == k; });
            if (it == cmd.params.end()) throw InputError("unknown config key '" + k + "'");
            cfg[k] = coerce(*it, v);
        }
    }
    for (const auto& p : cmd.params) {
        const auto it = flags.find(p.name);
        if (it != flags.end()) cfg[p.name] = coerce(p, it->second);
    }
    return cfg;
}

}  // namespace

std::vector<std::string> command_names() {
    std::vector<std::string> n;
    for (const auto& c : commands()) n.push_back(c.name);
    return n;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const std::vector<Command> cmds = commands();
    if (!args.empty() && !args[0].empty() && args[0][0] != '-' &&
        std::none_of(cmds.begin(), cmds.end(), [&](const Command& c) { return c.name == args[0]; })) {
        err << "error: unknown command '" << args[0] << "'\n";
        return kExitInput;
    }
    CLI::App app{"p,q-variation integration toolkit", "pqvar"};
    app.require_subcommand(1);
    // Raw flag storage per command; only flags actually given override.
    std::vector<std::map<std::string, std::string>> raw(cmds.size());
    std::vector<std::map<std::string, bool>> bools(cmds.size());
    std::vector<std::string> config(cmds.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        CLI::App* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
        sub->add_option("--config", config[i], "JSON config file");
        for (const auto& p : cmds[i].params) {
            if (p.kind == Kind::Flag) {
                sub->add_flag(flag_of(p.name), bools[i][p.name], p.help);
            } else {
                const std::string def = p.def.is_string() ? p.def.get<std::string>() : p.def.dump();
                sub->add_option(flag_of(p.name), raw[i][p.name],
                                def.empty() ? p.help : p.help + " (default " + def + ")");
            }
        }
        subs.push_back(sub);
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    try {
        for (std::size_t i = 0; i < cmds.size(); ++i) {
            if (!subs[i]->parsed()) continue;
            std::map<std::string, std::string> given;
            for (const auto& p : cmds[i].params) {
                if (subs[i]->count(flag_of(p.name)) == 0) continue;
                given[p.name] = p.kind == Kind::Flag ? (bools[i][p.name] ? "true" : "false") : raw[i][p.name];
            }
            const Json cfg = effective_config(cmds[i], given, config[i]);
            const std::filesystem::path dir = cfg.at("out").get<std::string>();
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw InputError("cannot create output directory '" + dir.string() + "'");
            Context ctx{cfg, dir, out};
            cmds[i].body(ctx);
            return kExitOk;
        }
    } catch (const HypothesisError& e) {
        err << "refused: " << e.what() << '\n';
        return kExitHypothesis;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const Json::exception& e) {
        err << "input error: " << e.what() << '\n';
        return kExitInput;
    }
    err << "error: no command given\n";
    return kExitInput;
}

}  // namespace pqvar::cli
