// qpq: plan parameters, run sessions (in-process or over TCP), run attack
// models and regenerate the published tables and figure series.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qpq/attacks.hpp"
#include "qpq/bits.hpp"
#include "qpq/endpoints.hpp"
#include "qpq/errors.hpp"
#include "qpq/planner.hpp"
#include "qpq/protocol.hpp"
#include "qpq/serialize.hpp"
#include "qpq/tables.hpp"
#include "qpq/transport.hpp"

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kInfeasible = 2, kProtocolAbort = 3, kCheckFailed = 4 };

struct Output {
  std::string format = "json";
  std::string dir = "out";
  bool quiet = false;
};

void add_output_flags(CLI::App* cmd, Output& out, const std::string& default_format) {
  out.format = default_format;
  cmd->add_option("--format", out.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", out.dir, "Output directory");
  cmd->add_flag("--quiet", out.quiet, "Do not echo output to stdout");
}

std::string params_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Writes <dir>/<stem>-<hash>.<ext> and echoes the content.
void emit(const Output& out, const std::string& stem, const std::string& params, const std::string& content,
          const std::string& ext) {
  std::filesystem::create_directories(out.dir);
  const auto path = std::filesystem::path(out.dir) / (stem + "-" + params_hash(params) + "." + ext);
  std::ofstream(path, std::ios::binary) << content;
  if (!out.quiet) std::cout << content;
}

void emit_doc(const Output& out, const std::string& stem, const qpq::Json& doc) {
  const std::string params = doc.contains("params") ? doc["params"].dump() : doc.dump();
  if (out.format == "csv") {
    emit(out, stem, params, qpq::to_csv(doc), "csv");
  } else {
    emit(out, stem, params, qpq::dump(doc), "json");
  }
}

struct SessionFlags {
  std::size_t n = 0;
  std::size_t k = 1;
  double theta = 0.0;
  double loss = 0.0;
  double flip = 0.0;
  std::uint64_t seed = 1;
  int max_restarts = 20;
  double check_fraction = 0.0;
  double error_threshold = 0.15;
  std::size_t batch = qpq::kDefaultPhotonBatch;
  std::string database;
  std::string database_format = "auto";

  qpq::SessionConfig config() const {
    qpq::SessionConfig c;
    c.database_size = n;
    c.substrings = k;
    c.theta = theta;
    c.loss = loss;
    c.flip_probability = flip;
    c.seeds = qpq::seeds_from(seed);
    c.max_restarts = max_restarts;
    c.check_fraction = check_fraction;
    c.error_threshold = error_threshold;
    c.photon_batch = batch;
    return c;
  }

  qpq::Bits load() const {
    if (database.empty()) return qpq::random_database(n, seed);
    const auto fmt = database_format == "binary" ? qpq::DatabaseFormat::Binary
                     : database_format == "hex"  ? qpq::DatabaseFormat::Hex
                                                 : qpq::DatabaseFormat::Auto;
    return qpq::load_database(database, n, fmt);
  }
};

void add_session_flags(CLI::App* cmd, SessionFlags& f) {
  cmd->add_option("--N", f.n, "Database size")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--k", f.k, "Substring count")->check(CLI::PositiveNumber);
  cmd->add_option("--theta", f.theta, "Carrier angle in radians, in (0, pi/2)")->required();
  cmd->add_option("--loss", f.loss, "Channel loss probability in [0, 1)");
  cmd->add_option("--flip", f.flip, "Channel bit-flip probability");
  cmd->add_option("--seed", f.seed, "Session seed");
  cmd->add_option("--max-restarts", f.max_restarts, "Restart limit");
  cmd->add_option("--check-fraction", f.check_fraction, "Fraction of known bits compared publicly");
  cmd->add_option("--error-threshold", f.error_threshold, "Largest acceptable error rate");
  cmd->add_option("--batch", f.batch, "Photons per batch");
  cmd->add_option("--database", f.database, "Database file (binary digits or hex)");
  cmd->add_option("--database-format", f.database_format, "Database encoding")
      ->check(CLI::IsMember({"auto", "binary", "hex"}));
}

qpq::Json session_doc(const std::string& command, std::uint64_t seed, const qpq::SessionReport& report,
                      std::optional<int> expected_bit) {
  qpq::Json doc;
  doc["command"] = command;
  doc["seed"] = seed;
  doc["params"] = qpq::to_json(report.config);
  doc["params"]["item"] = report.item ? qpq::Json(*report.item) : qpq::Json(nullptr);
  doc["report"] = qpq::to_json(report);
  doc["expected_bit"] = expected_bit ? qpq::Json(*expected_bit) : qpq::Json(nullptr);
  return doc;
}

int cmd_plan(std::size_t n, double n_bar, std::optional<int> k, double theta_min, double theta_max, const Output& out) {
  const qpq::PlanResult plan = k ? qpq::make_plan(n, *k, qpq::solve_theta(static_cast<double>(n), *k, n_bar))
                                 : qpq::plan_min_k(n, n_bar, theta_min, theta_max);
  qpq::Json doc;
  doc["command"] = "plan";
  doc["params"] = {{"n", n}, {"n_bar", n_bar}, {"k", k ? qpq::Json(*k) : qpq::Json(nullptr)},
                   {"theta_min", theta_min}, {"theta_max", theta_max}};
  doc["plan"] = qpq::to_json(plan);
  emit_doc(out, "plan", doc);
  return kOk;
}

int cmd_run(const SessionFlags& f, std::size_t item, const Output& out) {
  const qpq::Bits db = f.load();
  const auto outcome = qpq::run_session(f.config(), db, item);
  emit_doc(out, "run", session_doc("run", f.seed, outcome.report, db.at(item)));
  return outcome.report.success ? kOk : kProtocolAbort;
}

int cmd_serve(const SessionFlags& f, const std::string& address, int sessions, const Output& out) {
  const auto [host, port] = qpq::parse_address(address);
  const qpq::Bits db = f.load();
  qpq::TcpListener listener(host, port);
  std::cerr << "listening on " << host << ':' << listener.port() << std::endl;
  int status = kOk;
  for (int s = 0; s < sessions; ++s) {
    auto stream = listener.accept();
    const auto result = qpq::run_bob_endpoint(f.config(), db, *stream);
    qpq::Json doc = session_doc("serve", f.seed, result.report, std::nullopt);
    doc["aborted"] = result.aborted;
    doc["diagnostic"] = result.diagnostic;
    doc["params"]["session"] = s;
    emit_doc(out, "serve", doc);
    if (!result.report.success) status = kProtocolAbort;
  }
  return status;
}

int cmd_query(const std::string& address, std::size_t item, std::uint64_t seed, std::size_t batch, const Output& out) {
  const auto [host, port] = qpq::parse_address(address);
  auto stream = qpq::connect_tcp(host, port);
  const auto result = qpq::run_alice_endpoint(item, qpq::seeds_from(seed).measurement, *stream, {}, batch);
  qpq::Json doc = session_doc("query", seed, result.report, std::nullopt);
  doc["aborted"] = result.aborted;
  doc["diagnostic"] = result.diagnostic;
  emit_doc(out, "query", doc);
  return result.report.success ? kOk : kProtocolAbort;
}

struct AttackFlags {
  std::string kind = "usd";
  double theta = std::numbers::pi / 4;
  int k = 1;
  std::size_t n = 50000;
  std::uint64_t trials = qpq::kDefaultAttackTrials;
  std::uint64_t seed = 1;
  std::string want = "conclusive";
};

int cmd_attack(const AttackFlags& f, const Output& out) {
  const qpq::AttackKind kind = qpq::parse_attack_kind(f.kind);
  qpq::AttackReport r;
  switch (kind) {
    case qpq::AttackKind::IndividualUsd:
    case qpq::AttackKind::HonestProjective:
      r = qpq::alice_individual_attack(kind, f.n, f.theta, f.k, f.trials, f.seed);
      break;
    case qpq::AttackKind::Helstrom:
      r.kind = kind;
      r.theta = f.theta;
      r.substrings = f.k;
      r.database_size = f.n;
      r.analytic = qpq::helstrom_guess(f.theta, f.k);
      r.estimate = qpq::helstrom_guess_numeric(f.theta, f.k);
      break;
    case qpq::AttackKind::JointUsd:
      r.kind = kind;
      r.theta = f.theta;
      r.substrings = f.k;
      r.database_size = f.n;
      r.analytic = qpq::joint_usd_bound(f.theta, f.k);
      r.estimate = static_cast<double>(f.n) * r.analytic;
      r.per_bit_analytic = std::pow(1.0 - std::cos(f.theta), f.k);
      break;
    case qpq::AttackKind::BobConclusiveness:
      r = qpq::bob_conclusiveness_attack(f.theta, f.want == "conclusive", f.trials, f.seed);
      break;
  }
  qpq::Json doc;
  doc["command"] = "attack";
  doc["params"] = {{"kind", f.kind}, {"theta", f.theta}, {"k", f.k}, {"n", f.n},
                   {"trials", f.trials}, {"seed", f.seed}, {"want", f.want}};
  doc["report"] = qpq::to_json(r);
  emit_doc(out, "attack", doc);
  return kOk;
}

int cmd_tables(const std::string& which, bool check, const Output& out) {
  std::vector<qpq::TableId> ids;
  if (which == "all") {
    ids = {qpq::TableId::T1, qpq::TableId::T2, qpq::TableId::T3, qpq::TableId::T4};
  } else {
    ids = {qpq::parse_table_id(which)};
  }
  int status = kOk;
  for (auto id : ids) {
    const qpq::Table t = qpq::generate_table(id);
    const std::string name = qpq::table_name(id);
    if (out.format == "csv") {
      emit(out, "tables-" + name, name, qpq::table_csv(t), "csv");
    } else {
      emit(out, "tables-" + name, name, qpq::dump(qpq::to_json(t)), "json");
    }
    if (check) {
      for (const auto& m : qpq::check_table(t)) {
        std::cerr << "mismatch " << name << ' ' << m.quantity << " N=" << m.column << ": printed " << m.printed
                  << ", computed " << qpq::format_number(m.computed) << '\n';
        status = kCheckFailed;
      }
    }
  }
  if (check && status == kOk) std::cerr << "all table cells match the published values\n";
  return status;
}

int cmd_figures(const std::string& which, const qpq::FigureGrid& grid, const Output& out) {
  std::vector<qpq::FigureId> ids;
  if (which == "all") {
    ids = {qpq::FigureId::F1, qpq::FigureId::F2, qpq::FigureId::F3, qpq::FigureId::F4, qpq::FigureId::F5};
  } else {
    ids = {qpq::parse_figure_id(which)};
  }
  for (auto id : ids) {
    const qpq::Series s = qpq::fig_data(id, grid);
    const std::string params = s.name + "/" + std::to_string(grid.theta_steps) + "/" + std::to_string(grid.max_k);
    if (out.format == "csv") {
      emit(out, "figures-" + s.name, params, qpq::series_csv(s), "csv");
    } else {
      emit(out, "figures-" + s.name, params, qpq::dump(qpq::to_json(s)), "json");
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flexible QKD-based quantum private query simulator"};
  app.require_subcommand(1);

  Output plan_out, run_out, serve_out, query_out, attack_out, tables_out, figures_out;

  auto* plan = app.add_subcommand("plan", "Choose theta and k for a target number of known bits");
  std::size_t plan_n = 0;
  double plan_nbar = 3.0, plan_theta_min = 0.2, plan_theta_max = std::numbers::pi / 4;
  std::optional<int> plan_k;
  bool plan_no_cap = false;
  plan->add_option("--N", plan_n, "Database size")->required()->check(CLI::PositiveNumber);
  plan->add_option("--nbar", plan_nbar, "Target expected number of known bits")->required();
  plan->add_option("--k", plan_k, "Fix the substring count and solve for theta");
  plan->add_option("--theta-min", plan_theta_min, "Smallest acceptable theta");
  plan->add_option("--theta-max", plan_theta_max, "Largest acceptable theta (default pi/4)");
  plan->add_flag("--no-cap", plan_no_cap, "Allow theta up to pi/2");
  add_output_flags(plan, plan_out, "json");

  SessionFlags run_flags;
  std::size_t run_item = 0;
  auto* run = app.add_subcommand("run", "Run one in-process session");
  add_session_flags(run, run_flags);
  run->add_option("--item", run_item, "Index Alice retrieves")->required();
  add_output_flags(run, run_out, "json");

  SessionFlags serve_flags;
  std::string serve_address = "127.0.0.1:7341";
  int serve_sessions = 1;
  auto* serve = app.add_subcommand("serve", "Run Bob's endpoint on a TCP address");
  add_session_flags(serve, serve_flags);
  serve->add_option("--address", serve_address, "host:port to listen on");
  serve->add_option("--sessions", serve_sessions, "Number of sessions to serve")->check(CLI::PositiveNumber);
  add_output_flags(serve, serve_out, "json");

  std::string query_address = "127.0.0.1:7341";
  std::size_t query_item = 0;
  std::uint64_t query_seed = 1;
  std::size_t query_batch = qpq::kDefaultPhotonBatch;
  auto* query = app.add_subcommand("query", "Run Alice's endpoint against a server");
  query->add_option("--address", query_address, "host:port of Bob's endpoint");
  query->add_option("--item", query_item, "Index Alice retrieves")->required();
  query->add_option("--seed", query_seed, "Session seed (Alice derives her measurement stream from it)");
  query->add_option("--batch", query_batch, "Photons per batch request");
  add_output_flags(query, query_out, "json");

  AttackFlags attack_flags;
  auto* attack = app.add_subcommand("attack", "Evaluate a dishonest-party model");
  attack->add_option("--kind", attack_flags.kind, "usd | honest | helstrom | joint-usd | bob")
      ->check(CLI::IsMember({"usd", "honest", "helstrom", "joint-usd", "bob"}));
  attack->add_option("--theta", attack_flags.theta, "Carrier angle");
  attack->add_option("--k", attack_flags.k, "Substring count");
  attack->add_option("--N", attack_flags.n, "Database size");
  attack->add_option("--trials", attack_flags.trials, "Monte Carlo trials (raw bits or photons)");
  attack->add_option("--seed", attack_flags.seed, "Monte Carlo seed");
  attack->add_option("--want", attack_flags.want, "Bob's goal")->check(CLI::IsMember({"conclusive", "inconclusive"}));
  add_output_flags(attack, attack_out, "json");

  std::string tables_which = "all";
  bool tables_check = false;
  auto* tables = app.add_subcommand("tables", "Regenerate the published tables");
  tables->add_option("--which", tables_which, "T1 | T2 | T3 | T4 | all");
  tables->add_flag("--check", tables_check, "Compare with the printed values; exit 4 on mismatch");
  add_output_flags(tables, tables_out, "csv");

  std::string figures_which = "all";
  qpq::FigureGrid grid;
  auto* figures = app.add_subcommand("figures", "Emit figure data series");
  figures->add_option("--which", figures_which, "F1 | F2 | F3 | F4 | F5 | all");
  figures->add_option("--theta-steps", grid.theta_steps, "Theta grid divisions of (0, pi/2)")->check(CLI::PositiveNumber);
  figures->add_option("--max-k", grid.max_k, "Largest k for F4")->check(CLI::Range(1, qpq::kMaxParitySubstrings));
  add_output_flags(figures, figures_out, "csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (plan->parsed()) {
      return cmd_plan(plan_n, plan_nbar, plan_k, plan_theta_min, plan_no_cap ? std::numbers::pi / 2 : plan_theta_max,
                      plan_out);
    }
    if (run->parsed()) return cmd_run(run_flags, run_item, run_out);
    if (serve->parsed()) return cmd_serve(serve_flags, serve_address, serve_sessions, serve_out);
    if (query->parsed()) return cmd_query(query_address, query_item, query_seed, query_batch, query_out);
    if (attack->parsed()) return cmd_attack(attack_flags, attack_out);
    if (tables->parsed()) return cmd_tables(tables_which, tables_check, tables_out);
    if (figures->parsed()) return cmd_figures(figures_which, grid, figures_out);
  } catch (const qpq::PlanningError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const qpq::TransportError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kProtocolAbort;
  } catch (const qpq::ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kProtocolAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
