#pragma once

#include <string>
#include <vector>

namespace qpq {

// Plot-ready numeric data: named columns, one row per point.
struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

}  // namespace qpq
