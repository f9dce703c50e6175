#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qpq/series.hpp"

namespace qpq {

enum class TableId { T1, T2, T3, T4 };

std::string table_name(TableId id);
TableId parse_table_id(const std::string& name);

// How a row is printed: integer, fixed decimals, or the probability style
// (fixed below 1, one significant digit in scientific form below 1e-3).
enum class CellStyle { Integer, Fixed2, Fixed3, Probability };

struct TableRow {
  std::string quantity;  // "k", "n_bar", "p", "P0", "theta"
  CellStyle style = CellStyle::Fixed3;
  std::vector<double> values;  // full precision, one per column
};

struct Table {
  TableId id = TableId::T1;
  std::string caption;
  std::vector<double> columns;  // database sizes N
  std::vector<TableRow> rows;

  const TableRow& row(const std::string& quantity) const;
};

// Recomputes every cell from the closed-form planner.
Table generate_table(TableId id);

std::string format_cell(double value, CellStyle style);

// One header row "quantity,N1,N2,...", then one row per quantity at printed
// precision.
std::string table_csv(const Table& table);

struct PrintedCell {
  std::string quantity;
  double column = 0.0;
  std::string printed;
};

// Values as printed in the published tables.
std::vector<PrintedCell> published_cells(TableId id);

struct CheckMismatch {
  TableId table;
  std::string quantity;
  double column;
  std::string printed;
  double computed;
};

// Compares computed cells with the printed ones at the printed precision
// (half a unit in the last printed digit).
std::vector<CheckMismatch> check_table(const Table& table);

// Theta(N) curves reaching n_bar for k = 1..max_k over a log grid of N.
Series flexibility_curves(double n_bar = 3.0, int max_k = 6, double n_min = 10.0, double n_max = 1e6,
                          int points_per_decade = 10);

// Theta(k) for several targets at fixed N.
Series fixed_size_landscape(double n = 1e4, const std::vector<double>& targets = {1, 2, 3, 5, 10, 20, 50, 100},
                            int max_k = 8);

}  // namespace qpq
