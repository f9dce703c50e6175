#include "qpq/serialize.hpp"

#include <cstdio>
#include <sstream>

namespace qpq {

namespace {

template <class T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

void flatten(const Json& doc, const std::string& prefix, std::ostringstream& out) {
  if (doc.is_object()) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
    return;
  }
  if (doc.is_array() && !doc.empty() && (doc.front().is_object() || doc.front().is_array())) {
    for (std::size_t i = 0; i < doc.size(); ++i) flatten(doc[i], prefix + "." + std::to_string(i), out);
    return;
  }
  out << prefix << ',';
  if (doc.is_string()) {
    out << doc.get<std::string>();
  } else if (doc.is_number_float()) {
    out << format_number(doc.get<double>());
  } else if (doc.is_array()) {
    std::string cell;
    for (const auto& v : doc) {
      if (!cell.empty()) cell += ' ';
      cell += v.is_number_float() ? format_number(v.get<double>()) : v.dump();
    }
    out << cell;
  } else if (!doc.is_null()) {
    out << doc.dump();
  }
  out << '\n';
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Json to_json(const SessionConfig& c) {
  Json j;
  j["n"] = c.database_size;
  j["k"] = c.substrings;
  j["theta"] = c.theta;
  j["loss"] = c.loss;
  j["flip_probability"] = c.flip_probability;
  j["photon_batch"] = c.photon_batch;
  j["seeds"] = Json{{"source", c.seeds.source}, {"channel", c.seeds.channel}, {"measurement", c.seeds.measurement}};
  j["max_restarts"] = c.max_restarts;
  j["error_threshold"] = c.error_threshold;
  j["check_fraction"] = c.check_fraction;
  return j;
}

Json to_json(const QueryExchange& q) {
  Json j;
  j["target"] = opt(q.target);
  j["known_index"] = opt(q.known_index);
  j["shift"] = q.shift;
  j["ciphertext"] = bits_to_string(q.ciphertext);
  j["retrieved_bit"] = q.retrieved_bit ? Json(static_cast<int>(*q.retrieved_bit)) : Json(nullptr);
  return j;
}

Json to_json(const SessionReport& r) {
  Json j;
  j["config"] = to_json(r.config);
  j["item"] = opt(r.item);
  j["photons_sent"] = r.photons_sent;
  j["photons_received"] = r.photons_received;
  j["conclusive_count"] = opt(r.conclusive_count);
  j["known_final_count"] = r.known_final_count;
  j["restarted"] = r.restarted;
  j["error_rate"] = opt(r.error_rate);
  j["query"] = r.query ? to_json(*r.query) : Json(nullptr);
  j["success"] = r.success;
  j["failure"] = r.failure;
  return j;
}

Json public_view(const SessionReport& r) {
  Json j;
  j["n"] = r.config.database_size;
  j["k"] = r.config.substrings;
  j["theta"] = r.config.theta;
  j["loss"] = r.config.loss;
  j["photons_sent"] = r.photons_sent;
  j["photons_received"] = r.photons_received;
  j["known_final_count"] = r.known_final_count;
  j["restarted"] = r.restarted;
  j["shift"] = r.query ? Json(r.query->shift) : Json(nullptr);
  j["ciphertext"] = r.query ? Json(bits_to_string(r.query->ciphertext)) : Json(nullptr);
  j["success"] = r.success;
  return j;
}

Json to_json(const PlanResult& p) {
  Json j;
  j["n"] = p.database_size;
  j["k"] = p.substrings;
  j["theta"] = p.theta;
  j["p"] = p.p;
  j["n_bar"] = p.n_bar;
  j["p0"] = p.p_fail;
  return j;
}

Json to_json(const AttackReport& r) {
  Json j;
  j["kind"] = attack_name(r.kind);
  j["theta"] = r.theta;
  j["k"] = r.substrings;
  j["n"] = r.database_size;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["analytic"] = r.analytic;
  j["estimate"] = opt(r.estimate);
  j["sigma"] = opt(r.sigma);
  j["per_bit_analytic"] = opt(r.per_bit_analytic);
  j["per_bit_estimate"] = opt(r.per_bit_estimate);
  j["per_bit_sigma"] = opt(r.per_bit_sigma);
  j["wrong_identifications"] = r.wrong_identifications;
  j["conclusive_bit0"] = r.conclusive_bit0;
  j["conclusive_bit1"] = r.conclusive_bit1;
  return j;
}

Json to_json(const Table& t) {
  Json j;
  j["table"] = table_name(t.id);
  j["caption"] = t.caption;
  j["n"] = t.columns;
  Json rows = Json::object();
  for (const auto& r : t.rows) {
    Json row;
    row["values"] = r.values;
    Json printed = Json::array();
    for (double v : r.values) printed.push_back(format_cell(v, r.style));
    row["printed"] = printed;
    rows[r.quantity] = row;
  }
  j["rows"] = rows;
  return j;
}

Json to_json(const Series& s) {
  Json j;
  j["name"] = s.name;
  j["columns"] = s.columns;
  j["rows"] = s.rows;
  return j;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string to_csv(const Json& doc) {
  std::ostringstream out;
  out << "field,value\n";
  flatten(doc, "", out);
  return out.str();
}

std::string series_csv(const Series& s) {
  std::ostringstream out;
  for (std::size_t c = 0; c < s.columns.size(); ++c) out << (c ? "," : "") << s.columns[c];
  out << '\n';
  for (const auto& row : s.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
  return out.str();
}

}  // namespace qpq
