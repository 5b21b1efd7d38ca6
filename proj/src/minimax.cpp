#include "kgcoop/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kgcoop/error.hpp"

namespace kgcoop {

namespace {

constexpr double kPivotTol = 1e-12;

void validate(const PayoffMatrix& a) {
  if (a.empty() || a.front().empty()) throw Error("solve_minimax: empty payoff matrix");
  for (const auto& row : a) {
    if (row.size() != a.front().size()) throw Error("solve_minimax: ragged payoff matrix");
    for (double x : row) {
      if (!std::isfinite(x)) throw Error("solve_minimax: non-finite payoff");
    }
  }
}

// Tableau simplex with Bland's rule on the column player's LP after shifting
// payoffs positive: max sum(w) s.t. A' w <= 1, w >= 0. Then y = w / sum(w),
// value = 1 / sum(w) - shift, and the row strategy is read off the slack
// columns of the objective row.
MinimaxSolution simplex(const PayoffMatrix& a) {
  const std::size_t rows = a.size();
  const std::size_t cols = a.front().size();
  double lowest = a[0][0];
  for (const auto& row : a) lowest = std::min(lowest, *std::min_element(row.begin(), row.end()));
  const double shift = 1.0 - lowest;

  const std::size_t width = cols + rows + 1;  // w, slacks, rhs
  std::vector<std::vector<double>> t(rows + 1, std::vector<double>(width, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t[i][j] = a[i][j] + shift;
    t[i][cols + i] = 1.0;
    t[i][width - 1] = 1.0;
    basis[i] = cols + i;
  }
  auto& objective = t[rows];
  for (std::size_t j = 0; j < cols; ++j) objective[j] = -1.0;

  while (true) {
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (objective[j] < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;
    std::size_t leave = rows;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
      if (t[i][enter] <= kPivotTol) continue;
      const double ratio = t[i][width - 1] / t[i][enter];
      if (ratio < best - kPivotTol ||
          (ratio <= best + kPivotTol && leave < rows && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    // Bounded: every column has a positive entry since A' > 0.
    if (leave == rows) throw Error("solve_minimax: unbounded program");
    const double pivot = t[leave][enter];
    for (double& x : t[leave]) x /= pivot;
    for (std::size_t i = 0; i <= rows; ++i) {
      if (i == leave) continue;
      const double f = t[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  const double total = objective[width - 1];
  MinimaxSolution s;
  s.column_strategy.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (basis[i] < cols) s.column_strategy[basis[i]] = std::max(0.0, t[i][width - 1]) / total;
  }
  s.row_strategy.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    s.row_strategy[i] = std::max(0.0, objective[cols + i]) / total;
  }
  s.value = 1.0 / total - shift;
  s.gap = equilibrium_gap(a, s.row_strategy, s.column_strategy);
  s.exact = true;
  return s;
}

}  // namespace

double equilibrium_gap(const PayoffMatrix& a, const std::vector<double>& x,
                       const std::vector<double>& y) {
  const std::size_t rows = a.size();
  const std::size_t cols = a.front().size();
  double best_row = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < cols; ++j) v += a[i][j] * y[j];
    best_row = std::max(best_row, v);
  }
  double best_col = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cols; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < rows; ++i) v += x[i] * a[i][j];
    best_col = std::min(best_col, v);
  }
  return best_row - best_col;
}

MinimaxSolution fictitious_play(const PayoffMatrix& a, const MinimaxOptions& options) {
  validate(a);
  const std::size_t rows = a.size();
  const std::size_t cols = a.front().size();
  // Cumulative payoffs of each pure strategy against the opponent's history.
  std::vector<double> row_payoff(rows, 0.0), col_payoff(cols, 0.0);
  std::vector<double> row_counts(rows, 0.0), col_counts(cols, 0.0);
  std::size_t r = 0, c = 0;
  MinimaxSolution best;
  best.gap = std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= options.max_iterations; ++t) {
    row_counts[r] += 1.0;
    col_counts[c] += 1.0;
    for (std::size_t j = 0; j < cols; ++j) col_payoff[j] += a[r][j];
    for (std::size_t i = 0; i < rows; ++i) row_payoff[i] += a[i][c];
    r = static_cast<std::size_t>(std::max_element(row_payoff.begin(), row_payoff.end()) -
                                 row_payoff.begin());
    c = static_cast<std::size_t>(std::min_element(col_payoff.begin(), col_payoff.end()) -
                                 col_payoff.begin());
    const double n = static_cast<double>(t);
    const double upper = row_payoff[r] / n;
    const double lower = col_payoff[c] / n;
    if (upper - lower < best.gap) {
      best.gap = upper - lower;
      best.value = 0.5 * (upper + lower);
      best.row_strategy = row_counts;
      best.column_strategy = col_counts;
      for (double& p : best.row_strategy) p /= n;
      for (double& p : best.column_strategy) p /= n;
    }
    if (best.gap <= options.tolerance) break;
  }
  return best;
}

MinimaxSolution solve_minimax(const PayoffMatrix& payoff, const MinimaxOptions& options) {
  validate(payoff);
  MinimaxSolution s = simplex(payoff);
  if (s.gap <= options.tolerance) return s;
  // Numerical trouble only; fictitious play is the slow but safe fallback.
  MinimaxSolution fp = fictitious_play(payoff, options);
  return fp.gap < s.gap ? fp : s;
}

}  // namespace kgcoop
