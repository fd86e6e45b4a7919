// SPDX-License-Identifier: MIT
#include "pqvar/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

namespace pqvar {

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back(line);
        start = end + 1;
    }
    return out;
}

Json numbers(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

Json matrix(const std::vector<std::vector<double>>& m) {
    Json a = Json::array();
    for (const auto& row : m) a.push_back(numbers(row));
    return a;
}

Json field_values(const SampledField& f) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < f.nx(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < f.ny(); ++j) row.push_back(number(f.at(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> numbers_from(const Json& j, const char* what) {
    if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(number_from(v));
    return out;
}

Json optional_number(const std::optional<double>& v) {
    return v ? number(*v) : Json(nullptr);
}

Json levels_json(const std::vector<std::pair<std::size_t, double>>& levels) {
    Json a = Json::array();
    for (const auto& [n, s] : levels) a.push_back(Json::array({n, number(s)}));
    return a;
}

Json terms_json(const ItoTerms& t) {
    Json j;
    j["f_end"] = number(t.f_end);
    j["f_start"] = number(t.f_start);
    j["ds_term"] = optional_number(t.ds_term);
    j["stochastic_integral"] = number(t.stochastic_integral);
    j["local_time_term"] = number(t.local_time_term);
    j["direct_local_time_term"] = optional_number(t.direct_local_time_term);
    return j;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_number(const std::string& s) {
    if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
    std::string_view sv(s);
    while (!sv.empty() && sv.front() == ' ') sv.remove_prefix(1);
    while (!sv.empty() && sv.back() == ' ') sv.remove_suffix(1);
    if (!sv.empty() && sv.front() == '+') sv.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (sv.empty() || res.ec != std::errc() || res.ptr != sv.data() + sv.size())
        throw InputError("not a number: '" + s + "'");
    return v;
}

Json number(double v) {
    if (std::isfinite(v)) return Json(v);
    return Json(format_number(v));
}

double number_from(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_number(j.get<std::string>());
    throw InputError("expected a number, got " + j.dump());
}

// ---- CSV --------------------------------------------------------------

std::string path_to_csv(const SampledPath& path) {
    std::string out = "x,value\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        out += format_number(path.x(i));
        out += ',';
        out += format_number(path.value(i));
        out += '\n';
    }
    return out;
}

SampledPath path_from_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw InputError("path CSV is empty");
    std::vector<double> xs, vs;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto cells = split_line(lines[k]);
        if (cells.size() != 2)
            throw InputError("path CSV row " + std::to_string(k + 1) + " needs 2 columns");
        xs.push_back(parse_number(std::string(cells[0])));
        vs.push_back(parse_number(std::string(cells[1])));
    }
    return SampledPath(std::move(xs), std::move(vs));
}

std::string field_to_csv(const SampledField& field) {
    std::string out = "x\\y";
    for (double y : field.ys()) {
        out += ',';
        out += format_number(y);
    }
    out += '\n';
    for (std::size_t i = 0; i < field.nx(); ++i) {
        out += format_number(field.xs()[i]);
        for (std::size_t j = 0; j < field.ny(); ++j) {
            out += ',';
            out += format_number(field.at(i, j));
        }
        out += '\n';
    }
    return out;
}

SampledField field_from_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.size() < 2) throw InputError("field CSV needs a header and at least one row");
    const auto header = split_line(lines[0]);
    if (header.size() < 2) throw InputError("field CSV header needs at least one y value");
    std::vector<double> ys;
    for (std::size_t j = 1; j < header.size(); ++j) ys.push_back(parse_number(std::string(header[j])));
    std::vector<double> xs, values;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto cells = split_line(lines[k]);
        if (cells.size() != header.size())
            throw InputError("field CSV row " + std::to_string(k + 1) + " is not rectangular");
        xs.push_back(parse_number(std::string(cells[0])));
        for (std::size_t j = 1; j < cells.size(); ++j)
            values.push_back(parse_number(std::string(cells[j])));
    }
    return SampledField(std::move(xs), std::move(ys), std::move(values));
}

// ---- envelopes --------------------------------------------------------

Json to_json(const SampledPath& path, const Json& meta) {
    Json j;
    j["xs"] = numbers(path.xs());
    j["values"] = numbers(path.values());
    j["meta"] = meta;
    return j;
}

Json to_json(const SampledField& field, const Json& meta) {
    Json j;
    j["xs"] = numbers(field.xs());
    j["ys"] = numbers(field.ys());
    j["values"] = field_values(field);
    j["meta"] = meta;
    return j;
}

SampledPath path_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("xs") || !j.contains("values"))
        throw InputError("path JSON needs 'xs' and 'values'");
    return SampledPath(numbers_from(j["xs"], "xs"), numbers_from(j["values"], "values"));
}

SampledField field_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("xs") || !j.contains("ys") || !j.contains("values"))
        throw InputError("field JSON needs 'xs', 'ys' and 'values'");
    auto xs = numbers_from(j["xs"], "xs");
    auto ys = numbers_from(j["ys"], "ys");
    const Json& rows = j["values"];
    if (!rows.is_array() || rows.size() != xs.size())
        throw InputError("field JSON 'values' must have one row per x");
    std::vector<double> values;
    values.reserve(xs.size() * ys.size());
    for (const auto& row : rows) {
        auto r = numbers_from(row, "values row");
        if (r.size() != ys.size()) throw InputError("field JSON row length differs from ys");
        values.insert(values.end(), r.begin(), r.end());
    }
    return SampledField(std::move(xs), std::move(ys), std::move(values));
}

// ---- reports ----------------------------------------------------------

Json to_json(const VariationReport& r) {
    Json j;
    j["exponents"] = numbers(r.exponents);
    j["gauges"] = r.gauges;
    j["value"] = number(r.value);
    Json w;
    w["xindices"] = r.witness.indices;
    if (r.witness_y) w["yindices"] = r.witness_y->indices;
    j["witness"] = std::move(w);
    j["exactness"] = to_string(r.exactness);
    return j;
}

Json to_json(const DyadicBound& b) {
    Json j;
    j["value"] = number(b.value);
    j["constant"] = number(b.constant);
    j["partial_sums"] = numbers(b.partial_sums);
    j["exactness"] = to_string(b.exactness);
    return j;
}

Json to_json(const IntegralResult& r) {
    Json j;
    j["value"] = number(r.value);
    j["levels"] = levels_json(r.levels);
    j["gap"] = number(r.gap);
    j["verdict"] = r.converged ? "converged" : "not converged";
    return j;
}

Json to_json(const SeriesCondition& c) {
    Json j;
    j["p"] = number(c.p);
    j["q"] = number(c.q);
    j["gamma"] = optional_number(c.gamma);
    j["delta"] = number(c.delta);
    j["feasible"] = c.feasible;
    j["guaranteed"] = c.guaranteed;
    j["alpha_interval"] = Json::array({number(c.alpha_lower), number(c.alpha_upper)});
    j["alpha"] = optional_number(c.alpha);
    j["n_exponent"] = number(c.n_exponent);
    j["m_exponent"] = number(c.m_exponent);
    j["partial_sums"] = levels_json(c.partial_sums);
    j["tail_bound"] = number(c.tail_bound);
    return j;
}

Json to_json(const RefinementTrace& t) {
    Json j;
    j["x_partitions"] = matrix(t.x_partitions);
    j["y_partitions"] = matrix(t.y_partitions);
    j["sums"] = matrix(t.sums);
    j["mixed_differences"] = matrix(t.mixed_differences);
    j["strip_delta"] = number(t.strip_delta);
    return j;
}

Json to_json(const SummationByParts& s) {
    Json j;
    j["lhs"] = number(s.lhs);
    j["rhs"] = number(s.rhs);
    j["residual"] = number(s.residual);
    return j;
}

Json to_json(const DominatedConvergenceTable& t) {
    Json rows = Json::array();
    for (std::size_t k = 0; k < t.labels.size(); ++k) {
        Json row;
        row["label"] = t.labels[k];
        row["integral"] = number(t.integrals[k]);
        row["gap"] = number(t.gaps[k]);
        row["sup_distance"] = number(t.sup_distance[k]);
        row["variation_bound"] = number(t.variation_bounds[k]);
        rows.push_back(std::move(row));
    }
    Json j;
    j["limit"] = number(t.limit);
    j["rows"] = std::move(rows);
    j["decaying"] = t.decaying;
    j["strictly_decreasing"] = t.strictly_decreasing;
    return j;
}

Json to_json(const LocalTimeField& f) {
    Json j;
    j["convention"] = f.convention;
    j["resolution"] = number(f.resolution);
    j["times"] = numbers(f.times);
    j["levels"] = numbers(f.levels);
    j["L"] = field_values(f.L);
    j["Ltilde"] = field_values(f.Ltilde);
    j["h"] = field_values(f.h);
    return j;
}

Json to_json(const OccupationCheck& c) {
    Json j;
    j["lhs"] = number(c.lhs);
    j["rhs"] = number(c.rhs);
    j["difference"] = number(c.difference);
    j["residual"] = number(c.residual);
    return j;
}

Json to_json(const ExponentProbe& p) {
    Json rows = Json::array();
    for (const auto& r : p.rows) {
        Json row;
        row["p"] = number(r.p);
        row["variation"] = numbers(r.variation);
        row["relative_change"] = number(r.relative_change);
        row["verdict"] = to_string(r.verdict);
        rows.push_back(std::move(row));
    }
    Json j;
    j["level_counts"] = p.level_counts;
    j["rows"] = std::move(rows);
    return j;
}

Json to_json(const ItoReport& r) {
    Json j;
    j["function"] = r.function;
    j["form"] = r.form;
    j["convention"] = r.convention;
    j["seed"] = r.seed;
    j["stream"] = r.stream;
    j["terms"] = terms_json(r.terms);
    j["residual"] = number(r.residual);
    j["scale"] = number(r.scale);
    Json levels = Json::array();
    for (const auto& l : r.refinement) {
        Json lj;
        lj["n_steps"] = l.n_steps;
        lj["residual"] = number(l.residual);
        lj["max_increment"] = number(l.max_increment);
        lj["level_spacing"] = number(l.level_spacing);
        lj["level_count"] = l.level_count;
        lj["terms"] = terms_json(l.terms);
        levels.push_back(std::move(lj));
    }
    j["refinement"] = std::move(levels);
    j["warnings"] = r.warnings;
    j["classical_residual"] = optional_number(r.classical_residual);
    j["classical_tolerance"] = optional_number(r.classical_tolerance);
    j["condition"] = r.condition ? to_json(*r.condition) : Json(nullptr);
    return j;
}

Json to_json(const RefinementSummary& s) {
    Json j;
    j["n_steps"] = s.n_steps;
    j["median_residual"] = numbers(s.median_residual);
    j["median_nonincreasing"] = s.median_nonincreasing;
    j["final_over_first"] = number(s.final_over_first);
    j["fraction_monotone"] = number(s.fraction_monotone);
    return j;
}

Json to_json(const MollifiedRouteTable& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows) {
        Json row;
        row["order"] = r.order;
        row["mollified_term"] = number(r.mollified_term);
        row["young_term"] = number(r.young_term);
        row["gap"] = number(r.gap);
        row["rhs_gap"] = optional_number(r.rhs_gap);
        rows.push_back(std::move(row));
    }
    Json j;
    j["function"] = t.function;
    j["n_steps"] = t.n_steps;
    j["rows"] = std::move(rows);
    j["shrinking"] = t.shrinking;
    j["scale"] = number(t.scale);
    return j;
}

// ---- files ------------------------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << content;
    if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace pqvar
