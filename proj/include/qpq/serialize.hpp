#pragma once

#include <string>

#include "json.hpp"
#include "qpq/attacks.hpp"
#include "qpq/planner.hpp"
#include "qpq/protocol.hpp"
#include "qpq/series.hpp"
#include "qpq/tables.hpp"

namespace qpq {

// Canonical documents: fixed field order, snake_case keys, bit strings as
// '0'/'1' text, absent optionals as null.
using Json = nlohmann::ordered_json;

Json to_json(const SessionConfig& config);
Json to_json(const QueryExchange& query);
Json to_json(const SessionReport& report);
Json to_json(const PlanResult& plan);
Json to_json(const AttackReport& report);
Json to_json(const Table& table);
Json to_json(const Series& series);

// Only the fields both endpoints observe on the wire.
Json public_view(const SessionReport& report);

// Two-space indented JSON with a trailing newline.
std::string dump(const Json& doc);

// "field,value" lines, nested objects flattened with dots.
std::string to_csv(const Json& doc);

// Header of column names then one line per row, numbers at full precision.
std::string series_csv(const Series& series);

std::string format_number(double value);

}  // namespace qpq
