// Thin binding layer. Structured results cross as JSON text and are decoded
// in flexqpq/__init__.py.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "qpq/attacks.hpp"
#include "qpq/errors.hpp"
#include "qpq/planner.hpp"
#include "qpq/protocol.hpp"
#include "qpq/serialize.hpp"
#include "qpq/tables.hpp"
#include "qpq/wire.hpp"

namespace py = pybind11;
using namespace qpq;

namespace {

Json message_to_json(const wire::Message& msg) {
  Json fields = Json::object();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, wire::Hello>) {
          fields["theta"] = m.theta;
          fields["database_size"] = m.database_size;
          fields["substrings"] = m.substrings;
          fields["loss"] = m.loss;
        } else if constexpr (std::is_same_v<T, wire::PhotonBatchRequest>) {
          fields["count"] = m.count;
        } else if constexpr (std::is_same_v<T, wire::MeasureSubmit>) {
          fields["bases"] = bits_to_string(m.bases);
        } else if constexpr (std::is_same_v<T, wire::OutcomeBatch>) {
          fields["received"] = bits_to_string(m.received);
          fields["outcomes"] = bits_to_string(m.outcomes);
        } else if constexpr (std::is_same_v<T, wire::Declaration>) {
          fields["letters"] = bits_to_string(m.letters);
        } else if constexpr (std::is_same_v<T, wire::SiftAck>) {
          fields["known_count"] = m.known_count;
        } else if constexpr (std::is_same_v<T, wire::Shift>) {
          fields["shift"] = m.shift;
        } else if constexpr (std::is_same_v<T, wire::Ciphertext>) {
          fields["bits"] = bits_to_string(m.bits);
        } else {
          fields["code"] = static_cast<int>(m.code);
          fields["message"] = m.message;
        }
      },
      msg);
  Json out;
  out["type"] = wire::type_name(wire::type_of(msg));
  out["fields"] = fields;
  return out;
}

wire::Message message_from_json(const std::string& type, const Json& f) {
  auto bits = [&](const char* key) { return bits_from_string(f.at(key).get<std::string>()); };
  if (type == "HELLO")
    return wire::Hello{f.at("theta").get<double>(), f.at("database_size").get<std::uint32_t>(),
                       f.at("substrings").get<std::uint32_t>(), f.value("loss", 0.0)};
  if (type == "PHOTON_BATCH_REQ") return wire::PhotonBatchRequest{f.at("count").get<std::uint32_t>()};
  if (type == "MEASURE_SUBMIT") return wire::MeasureSubmit{bits("bases")};
  if (type == "OUTCOME_BATCH") return wire::OutcomeBatch{bits("received"), bits("outcomes")};
  if (type == "DECLARATION") return wire::Declaration{bits("letters")};
  if (type == "SIFT_ACK") return wire::SiftAck{f.at("known_count").get<std::uint32_t>()};
  if (type == "SHIFT") return wire::Shift{f.at("shift").get<std::uint32_t>()};
  if (type == "CIPHERTEXT") return wire::Ciphertext{bits("bits")};
  if (type == "ERROR")
    return wire::Error{static_cast<wire::ErrorCode>(f.at("code").get<int>()), f.value("message", std::string{})};
  throw DomainError("unknown message type: " + type);
}

std::string run_session_json(std::size_t n, std::size_t k, double theta, double loss, std::uint64_t seed,
                             std::size_t item, std::optional<std::string> database, double flip, int max_restarts,
                             double check_fraction, double error_threshold, std::size_t photon_batch) {
  SessionConfig c;
  c.database_size = n;
  c.substrings = k;
  c.theta = theta;
  c.loss = loss;
  c.flip_probability = flip;
  c.max_restarts = max_restarts;
  c.check_fraction = check_fraction;
  c.error_threshold = error_threshold;
  c.photon_batch = photon_batch;
  c.seeds = seeds_from(seed);
  c.validate();
  const Bits db = database ? parse_database(*database, n) : random_database(n, seed);
  const auto out = run_session(c, db, item);
  Json doc;
  doc["config"] = to_json(c);
  doc["report"] = to_json(out.report);
  doc["database"] = bits_to_string(db);
  doc["expected_bit"] = static_cast<int>(db.at(item));
  return dump(doc);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Flexible quantum private query core";

  py::register_exception<PlanningError>(m, "PlanningError", PyExc_ValueError);
  py::register_exception<wire::DecodeError>(m, "DecodeError", PyExc_ValueError);

  m.def("conclusive_probability", &conclusive_probability, py::arg("theta"));
  m.def("expected_known_bits", &expected_known_bits, py::arg("n"), py::arg("p"), py::arg("k"));
  m.def("failure_probability", &failure_probability, py::arg("n"), py::arg("p"), py::arg("k"));
  m.def("solve_theta", &solve_theta, py::arg("n"), py::arg("k"), py::arg("n_bar"));

  m.def(
      "plan_json",
      [](std::size_t n, double n_bar, std::optional<int> k, double theta_min, double theta_max) {
        if (k) {
          const double theta = solve_theta(static_cast<double>(n), *k, n_bar);
          return dump(to_json(make_plan(n, *k, theta)));
        }
        return dump(to_json(plan_min_k(n, n_bar, theta_min, theta_max)));
      },
      py::arg("n"), py::arg("n_bar"), py::arg("k") = std::nullopt, py::arg("theta_min") = 0.2,
      py::arg("theta_max") = std::numbers::pi / 4);

  m.def("run_session_json", &run_session_json, py::arg("n"), py::arg("k"), py::arg("theta"), py::arg("loss") = 0.0,
        py::arg("seed") = 1, py::arg("item") = 0, py::arg("database") = std::nullopt, py::arg("flip") = 0.0,
        py::arg("max_restarts") = 20, py::arg("check_fraction") = 0.0, py::arg("error_threshold") = 0.15,
        py::arg("photon_batch") = kDefaultPhotonBatch);

  m.def(
      "attack_json",
      [](const std::string& kind, double theta, int k, std::size_t n, std::uint64_t trials, std::uint64_t seed,
         bool want_conclusive) {
        const auto parsed = parse_attack_kind(kind);
        AttackReport r;
        if (parsed == AttackKind::BobConclusiveness) {
          r = bob_conclusiveness_attack(theta, want_conclusive, trials, seed);
        } else if (parsed == AttackKind::IndividualUsd || parsed == AttackKind::HonestProjective) {
          r = alice_individual_attack(parsed, n, theta, k, trials, seed);
        } else {
          r.kind = parsed;
          r.theta = theta;
          r.substrings = k;
          r.database_size = n;
          r.analytic = parsed == AttackKind::Helstrom ? helstrom_guess(theta, k) : joint_usd_bound(theta, k);
        }
        return dump(to_json(r));
      },
      py::arg("kind"), py::arg("theta"), py::arg("k") = 1, py::arg("n") = 0, py::arg("trials") = 0,
      py::arg("seed") = 1, py::arg("want_conclusive") = true);

  m.def("helstrom_guess", &helstrom_guess, py::arg("theta"), py::arg("k"));
  m.def("helstrom_guess_numeric", &helstrom_guess_numeric, py::arg("theta"), py::arg("k"));
  m.def("joint_usd_bound", &joint_usd_bound, py::arg("theta"), py::arg("k"));

  m.def(
      "table_json", [](const std::string& which) { return dump(to_json(generate_table(parse_table_id(which)))); },
      py::arg("which"));
  m.def(
      "table_mismatches",
      [](const std::string& which) {
        py::list out;
        for (const auto& mm : check_table(generate_table(parse_table_id(which))))
          out.append(py::make_tuple(mm.quantity, mm.column, mm.printed, mm.computed));
        return out;
      },
      py::arg("which"));
  m.def(
      "figure_json",
      [](const std::string& which, int theta_steps, int max_k) {
        FigureGrid grid;
        grid.theta_steps = theta_steps;
        grid.max_k = max_k;
        return dump(to_json(fig_data(parse_figure_id(which), grid)));
      },
      py::arg("which"), py::arg("theta_steps") = 90, py::arg("max_k") = 8);

  m.def(
      "encode_frame",
      [](const std::string& type, const std::string& fields_json) {
        const auto frame = wire::encode_frame(message_from_json(type, Json::parse(fields_json)));
        return py::bytes(reinterpret_cast<const char*>(frame.data()), frame.size());
      },
      py::arg("type"), py::arg("fields_json"));
  m.def(
      "decode_frame",
      [](const py::bytes& data) {
        const std::string raw = data;
        const std::span<const std::uint8_t> view(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
        return dump(message_to_json(wire::decode_frame(view)));
      },
      py::arg("data"));
}
