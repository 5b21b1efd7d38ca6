#pragma once
// Zero-sum matrix games. The row player maximizes payoff[i][j], the column
// player minimizes it.

#include <cstddef>
#include <vector>

namespace kgcoop {

using PayoffMatrix = std::vector<std::vector<double>>;

struct MinimaxSolution {
  double value = 0.0;
  std::vector<double> row_strategy;
  std::vector<double> column_strategy;
  // max_i (A y)_i - min_j (x^T A)_j for the returned pair; 0 at equilibrium.
  double gap = 0.0;
  bool exact = false;  // found by the simplex solver
};

struct MinimaxOptions {
  double tolerance = 1e-6;
  std::size_t max_iterations = 2'000'000;
};

// Linear program solved with the simplex method. Falls back to fictitious
// play only if the simplex answer misses the tolerance. Fictitious play stops
// once gap <= tolerance or after max_iterations, so check `gap`. Throws Error
// on empty, ragged or non-finite input.
MinimaxSolution solve_minimax(const PayoffMatrix& payoff, const MinimaxOptions& options = {});

MinimaxSolution fictitious_play(const PayoffMatrix& payoff, const MinimaxOptions& options = {});

// Exploitability gap of a strategy pair (see MinimaxSolution::gap).
double equilibrium_gap(const PayoffMatrix& payoff, const std::vector<double>& row_strategy,
                       const std::vector<double>& column_strategy);

}  // namespace kgcoop
