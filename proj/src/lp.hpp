#pragma once

// Small revised-simplex LP solver for problems in standard form
//   minimize c^T x  subject to  A x = b, x >= 0
// with sparse columns and few rows. The basis inverse is kept dense and
// refactored periodically.

#include <cstddef>
#include <utility>
#include <vector>

namespace lagot::detail {

struct LpColumn {
  double cost = 0.0;
  std::vector<std::pair<int, double>> entries;  // (row, coefficient)
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// Rows with negative right-hand side are negated internally.
LpResult solve_lp(int rows, const std::vector<LpColumn>& columns,
                  std::vector<double> rhs, std::size_t max_iterations = 0);

}  // namespace lagot::detail
