// SPDX-License-Identifier: MIT
/**
 * @file io.hpp
 * @brief CSV and JSON serialization of paths, fields and reports.
 *
 * Numbers are written in shortest round-trip form, and JSON objects keep
 * insertion order, so identical inputs give byte-identical files.
 * Non-finite numbers are written as the strings "inf", "-inf" and "nan".
 */

#pragma once

#include <string>

#include "json.hpp"
#include "pqvar/itocheck.hpp"
#include "pqvar/pathcore.hpp"
#include "pqvar/stochastic.hpp"
#include "pqvar/variation.hpp"
#include "pqvar/young.hpp"
#include "pqvar/young2d.hpp"

namespace pqvar {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to exactly v.
std::string format_number(double v);
/// Strict parse of a full string as a double (accepts inf/nan spellings).
double parse_number(const std::string& s);

Json number(double v);
double number_from(const Json& j);

/// Path CSV: header `x,value`, one row per sample.
std::string path_to_csv(const SampledPath& path);
SampledPath path_from_csv(const std::string& text);

/// Field CSV: first row `x\y,y_0,...`, then `x_i,v_i0,...`.
std::string field_to_csv(const SampledField& field);
SampledField field_from_csv(const std::string& text);

/// Envelopes {xs, values, meta} and {xs, ys, values: [[...]], meta}.
Json to_json(const SampledPath& path, const Json& meta = Json::object());
Json to_json(const SampledField& field, const Json& meta = Json::object());
SampledPath path_from_json(const Json& j);
SampledField field_from_json(const Json& j);

Json to_json(const VariationReport& r);
Json to_json(const DyadicBound& b);
Json to_json(const IntegralResult& r);
Json to_json(const SeriesCondition& c);
Json to_json(const RefinementTrace& t);
Json to_json(const SummationByParts& s);
Json to_json(const DominatedConvergenceTable& t);
Json to_json(const LocalTimeField& f);
Json to_json(const OccupationCheck& c);
Json to_json(const ExponentProbe& p);
Json to_json(const ItoReport& r);
Json to_json(const RefinementSummary& s);
Json to_json(const MollifiedRouteTable& t);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_file(const std::string& path);
/// Writes a whole file; throws InputError on failure.
void write_file(const std::string& path, const std::string& content);

}  // namespace pqvar
