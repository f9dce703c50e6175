#include "qpq/tables.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "qpq/errors.hpp"
#include "qpq/planner.hpp"

namespace qpq {

namespace {

const std::vector<double> kLargeSizes = {1e3, 5e3, 1e4, 5e4, 1e5, 1e6};
const std::vector<double> kT2Sizes = {12, 50, 100, 200, 500, 1000, 5000};
const std::vector<double> kT3Sizes = {20, 50, 100, 200, 500, 1000, 5000};

constexpr double kT1Conclusive = 0.15;
// The printed k choices are the largest k keeping P0 within this budget.
constexpr double kT1RestartBudget = 0.1;
constexpr double kT4ThetaFloor = 0.2;

// One unit in the last digit of a printed decimal string, or the leading power
// of ten in scientific form.
double printed_unit(const std::string& printed) {
  const auto e = printed.find_first_of("eE");
  if (e != std::string::npos) return std::pow(10.0, std::stod(printed.substr(e + 1)));
  const auto dot = printed.find('.');
  if (dot == std::string::npos) return 1.0;
  return std::pow(10.0, -static_cast<double>(printed.size() - dot - 1));
}

std::vector<PrintedCell> cells(const std::vector<double>& sizes, const std::string& quantity,
                               const std::vector<std::string>& printed) {
  std::vector<PrintedCell> out;
  for (std::size_t i = 0; i < sizes.size(); ++i) out.push_back({quantity, sizes[i], printed[i]});
  return out;
}

void append(std::vector<PrintedCell>& to, std::vector<PrintedCell> from) {
  to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

std::string table_name(TableId id) {
  switch (id) {
    case TableId::T1: return "T1";
    case TableId::T2: return "T2";
    case TableId::T3: return "T3";
    case TableId::T4: return "T4";
  }
  return "?";
}

TableId parse_table_id(const std::string& name) {
  if (name == "T1") return TableId::T1;
  if (name == "T2") return TableId::T2;
  if (name == "T3") return TableId::T3;
  if (name == "T4") return TableId::T4;
  throw DomainError("unknown table " + name);
}

const TableRow& Table::row(const std::string& quantity) const {
  for (const auto& r : rows) {
    if (r.quantity == quantity) return r;
  }
  throw DomainError("table has no row " + quantity);
}

Table generate_table(TableId id) {
  Table t;
  t.id = id;
  switch (id) {
    case TableId::T1: {
      t.caption = "choice of k with P0 and n_bar for p = 0.15";
      t.columns = kLargeSizes;
      TableRow k{"k", CellStyle::Integer, {}}, nbar{"n_bar", CellStyle::Fixed2, {}}, p0{"P0", CellStyle::Probability, {}};
      for (double n : t.columns) {
        const PlanResult r =
            plan_max_k_within_restart_budget(static_cast<std::size_t>(n), kT1Conclusive, kT1RestartBudget);
        k.values.push_back(r.substrings);
        nbar.values.push_back(r.n_bar);
        p0.values.push_back(r.p_fail);
      }
      t.rows = {k, nbar, p0};
      break;
    }
    case TableId::T2:
    case TableId::T3: {
      const double target = id == TableId::T2 ? 3.0 : 5.0;
      t.caption = id == TableId::T2 ? "theta for k = 1 and n_bar = 3" : "theta for k = 1 and n_bar = 5";
      t.columns = id == TableId::T2 ? kT2Sizes : kT3Sizes;
      TableRow p{"p", CellStyle::Probability, {}}, p0{"P0", CellStyle::Probability, {}}, theta{"theta", CellStyle::Fixed3, {}};
      for (double n : t.columns) {
        const double th = solve_theta(n, 1, target);
        const PlanResult r = make_plan(static_cast<std::size_t>(n), 1, th);
        p.values.push_back(r.p);
        p0.values.push_back(r.p_fail);
        theta.values.push_back(r.theta);
      }
      t.rows = {p, p0, theta};
      break;
    }
    case TableId::T4: {
      t.caption = "theta > 0.2 and k giving n_bar = 3";
      t.columns = kLargeSizes;
      TableRow k{"k", CellStyle::Integer, {}}, theta{"theta", CellStyle::Fixed3, {}}, p0{"P0", CellStyle::Probability, {}};
      for (double n : t.columns) {
        const PlanResult r = plan_min_k(static_cast<std::size_t>(n), 3.0, kT4ThetaFloor);
        k.values.push_back(r.substrings);
        theta.values.push_back(r.theta);
        p0.values.push_back(r.p_fail);
      }
      t.rows = {k, theta, p0};
      break;
    }
  }
  return t;
}

std::string format_cell(double value, CellStyle style) {
  char buf[64];
  switch (style) {
    case CellStyle::Integer: std::snprintf(buf, sizeof buf, "%.0f", value); break;
    case CellStyle::Fixed2: std::snprintf(buf, sizeof buf, "%.2f", value); break;
    case CellStyle::Fixed3: std::snprintf(buf, sizeof buf, "%.3f", value); break;
    case CellStyle::Probability:
      if (value != 0.0 && std::abs(value) < 1e-3) {
        int exponent = static_cast<int>(std::floor(std::log10(std::abs(value))));
        long mantissa = std::lround(value / std::pow(10.0, exponent));
        if (mantissa == 10) {
          mantissa = 1;
          ++exponent;
        }
        std::snprintf(buf, sizeof buf, "%lde%d", mantissa, exponent);
      } else {
        std::snprintf(buf, sizeof buf, "%.3g", value);
      }
      break;
  }
  return buf;
}

std::string table_csv(const Table& table) {
  std::ostringstream out;
  out << "quantity";
  for (double n : table.columns) out << ',' << format_cell(n, CellStyle::Integer);
  out << '\n';
  for (const auto& r : table.rows) {
    out << r.quantity;
    for (double v : r.values) out << ',' << format_cell(v, r.style);
    out << '\n';
  }
  return out.str();
}

std::vector<PrintedCell> published_cells(TableId id) {
  std::vector<PrintedCell> out;
  switch (id) {
    case TableId::T1:
      append(out, cells(kLargeSizes, "k", {"3", "4", "4", "5", "5", "6"}));
      append(out, cells(kLargeSizes, "n_bar", {"3.38", "2.53", "5.06", "3.79", "7.59", "11.39"}));
      append(out, cells(kLargeSizes, "P0", {"0.034", "0.080", "0.006", "0.022", "5e-4", "1e-5"}));
      break;
    case TableId::T2:
      append(out, cells(kT2Sizes, "p", {"0.25", "0.06", "0.03", "0.015", "0.006", "0.003", "6e-4"}));
      append(out, cells(kT2Sizes, "P0", {"0.032", "0.045", "0.048", "0.049", "0.049", "0.050", "0.050"}));
      append(out, cells(kT2Sizes, "theta", {"0.785", "0.354", "0.247", "0.174", "0.110", "0.078", "0.035"}));
      break;
    case TableId::T3:
      append(out, cells(kT3Sizes, "p", {"0.25", "0.1", "0.05", "0.025", "0.01", "0.005", "0.001"}));
      append(out, cells(kT3Sizes, "P0", {"0.003", "0.005", "0.005", "0.006", "0.006", "0.006", "0.006"}));
      append(out, cells(kT3Sizes, "theta", {"0.785", "0.464", "0.322", "0.226", "0.142", "0.100", "0.045"}));
      break;
    case TableId::T4:
      append(out, cells(kLargeSizes, "k", {"2", "2", "3", "3", "3", "4"}));
      append(out, cells(kLargeSizes, "theta", {"0.337", "0.223", "0.375", "0.284", "0.252", "0.293"}));
      break;
  }
  return out;
}

std::vector<CheckMismatch> check_table(const Table& table) {
  std::vector<CheckMismatch> mismatches;
  for (const auto& cell : published_cells(table.id)) {
    const TableRow& r = table.row(cell.quantity);
    std::size_t col = 0;
    while (col < table.columns.size() && table.columns[col] != cell.column) ++col;
    if (col == table.columns.size()) throw DomainError("published cell refers to a missing column");
    const double computed = r.values[col];
    const double expected = std::stod(cell.printed);
    // The printed tables mix rounding and truncation, so either is accepted.
    const double unit = printed_unit(cell.printed) * (1.0 + 1e-9);
    const bool rounded = std::abs(computed - expected) <= 0.5 * unit;
    const bool truncated = computed >= expected && computed - expected < unit;
    if (!rounded && !truncated) {
      mismatches.push_back({table.id, cell.quantity, cell.column, cell.printed, computed});
    }
  }
  return mismatches;
}

Series flexibility_curves(double n_bar, int max_k, double n_min, double n_max, int points_per_decade) {
  Series s{"F1", {"k", "N", "theta", "n_bar"}, {}};
  const double lo = std::log10(n_min), hi = std::log10(n_max);
  const int steps = static_cast<int>(std::lround((hi - lo) * points_per_decade));
  for (int k = 1; k <= max_k; ++k) {
    for (int i = 0; i <= steps; ++i) {
      const double n = std::round(std::pow(10.0, lo + (hi - lo) * i / std::max(steps, 1)));
      if (n_bar >= n) continue;
      double theta = 0.0;
      try {
        theta = solve_theta(n, k, n_bar);
      } catch (const PlanningError&) {
        continue;
      }
      const double p = std::pow(std::sin(theta), 2) / 2.0;
      s.rows.push_back({static_cast<double>(k), n, theta, n * std::pow(p, k)});
    }
  }
  return s;
}

Series fixed_size_landscape(double n, const std::vector<double>& targets, int max_k) {
  Series s{"F2", {"target", "k", "theta", "n_bar", "P0"}, {}};
  for (double target : targets) {
    for (int k = 1; k <= max_k; ++k) {
      double theta = 0.0;
      try {
        theta = solve_theta(n, k, target);
      } catch (const PlanningError&) {
        continue;
      }
      const double p = std::pow(std::sin(theta), 2) / 2.0;
      s.rows.push_back({target, static_cast<double>(k), theta, n * std::pow(p, k), failure_probability(n, p, k)});
    }
  }
  return s;
}

}  // namespace qpq
