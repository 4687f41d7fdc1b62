#include <cmath>
#include <limits>

#include "blindmatch/error.hpp"
#include "blindmatch/lap.hpp"

namespace blindmatch {

double LapSolution::dual_objective() const {
  double s = 0.0;
  for (double x : u) s += x;
  for (double x : v) s += x;
  return s;
}

namespace detail {

void require_square_finite(const Matrix& cost) {
  if (!cost.is_square() || cost.rows() == 0)
    throw Error(ErrorCode::kInvalidArgument, "LAP cost matrix must be square and non-empty");
  for (double c : cost.values())
    if (!std::isfinite(c)) throw Error(ErrorCode::kNonFinite, "LAP cost matrix has non-finite entries");
}

}  // namespace detail

void LapWorkspace::solve_jv(const Matrix& cost, LapSolution& out, double tie_tol) {
  detail::require_square_finite(cost);
  const int n = static_cast<int>(cost.rows());
  const auto un = static_cast<std::size_t>(n);
  // With tie_tol = 0 these are the plain comparisons.
  auto lt = [tie_tol](double a, double b) { return a < b - tie_tol; };
  auto le = [tie_tol](double a, double b) { return a <= b + tie_tol; };
  auto c = [&](int i, int j) { return cost.data()[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j)]; };

  out.assignment.assign(un, 0);
  out.u.assign(un, 0.0);
  out.v.assign(un, 0.0);
  out.epsilon = 0.0;
  if (n == 1) {
    out.v[0] = cost(0, 0);
    out.objective = cost(0, 0);
    return;
  }

  auto& x = col_of_row_;
  auto& y = row_of_col_;
  auto& v = out.v;
  x.assign(un, -1);
  y.assign(un, -1);
  matches_.assign(un, 0);
  free_rows_.clear();

  // Column reduction, last column first.
  for (int j = n - 1; j >= 0; --j) {
    double min = c(0, j);
    int imin = 0;
    for (int i = 1; i < n; ++i)
      if (lt(c(i, j), min)) {
        min = c(i, j);
        imin = i;
      }
    v[static_cast<std::size_t>(j)] = min;
    auto& m = matches_[static_cast<std::size_t>(imin)];
    if (++m == 1) {
      x[static_cast<std::size_t>(imin)] = j;
      y[static_cast<std::size_t>(j)] = imin;
    } else if (lt(min, v[static_cast<std::size_t>(x[static_cast<std::size_t>(imin)])])) {
      const int j1 = x[static_cast<std::size_t>(imin)];
      x[static_cast<std::size_t>(imin)] = j;
      y[static_cast<std::size_t>(j)] = imin;
      y[static_cast<std::size_t>(j1)] = -1;
    } else {
      y[static_cast<std::size_t>(j)] = -1;
    }
  }

  // Reduction transfer from rows that own exactly one column.
  for (int i = 0; i < n; ++i) {
    const int m = matches_[static_cast<std::size_t>(i)];
    if (m == 0) {
      free_rows_.push_back(i);
    } else if (m == 1) {
      const int j1 = x[static_cast<std::size_t>(i)];
      double min = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j)
        if (j != j1) min = std::min(min, c(i, j) - v[static_cast<std::size_t>(j)]);
      v[static_cast<std::size_t>(j1)] = c(i, j1) - min;
    }
  }

  // Shortest augmenting path from every free row (Dijkstra on reduced costs).
  auto& d = dist_;
  auto& pred = pred_;
  auto& collist = col_list_;
  d.assign(un, 0.0);
  pred.assign(un, 0);
  collist.assign(un, 0);
  for (const int f : free_rows_) {
    for (int j = 0; j < n; ++j) {
      d[static_cast<std::size_t>(j)] = c(f, j) - v[static_cast<std::size_t>(j)];
      pred[static_cast<std::size_t>(j)] = f;
      collist[static_cast<std::size_t>(j)] = j;
    }
    // collist[0, low) scanned, [low, up) at the current minimum, [up, n) pending.
    int low = 0;
    int up = 0;
    int last = 0;
    int endofpath = -1;
    double min = 0.0;
    while (endofpath < 0) {
      if (up == low) {
        last = low;
        min = d[static_cast<std::size_t>(collist[static_cast<std::size_t>(up++)])];
        for (int k = up; k < n; ++k) {
          const int j = collist[static_cast<std::size_t>(k)];
          const double h = d[static_cast<std::size_t>(j)];
          if (le(h, min)) {
            if (lt(h, min)) {
              up = low;
              min = h;
            }
            collist[static_cast<std::size_t>(k)] = collist[static_cast<std::size_t>(up)];
            collist[static_cast<std::size_t>(up++)] = j;
          }
        }
        // Prefer the lowest-indexed unassigned column at the minimum.
        for (int k = low; k < up; ++k) {
          const int j = collist[static_cast<std::size_t>(k)];
          if (y[static_cast<std::size_t>(j)] < 0 && (endofpath < 0 || j < endofpath)) endofpath = j;
        }
        if (endofpath >= 0) break;
      }
      const int j1 = collist[static_cast<std::size_t>(low++)];
      const int i = y[static_cast<std::size_t>(j1)];
      const double h0 = c(i, j1) - v[static_cast<std::size_t>(j1)] - min;
      for (int k = up; k < n; ++k) {
        const int j = collist[static_cast<std::size_t>(k)];
        const double h = c(i, j) - v[static_cast<std::size_t>(j)] - h0;
        if (lt(h, d[static_cast<std::size_t>(j)])) {
          pred[static_cast<std::size_t>(j)] = i;
          if (le(h, min)) {
            if (y[static_cast<std::size_t>(j)] < 0) {
              endofpath = j;
              break;
            }
            collist[static_cast<std::size_t>(k)] = collist[static_cast<std::size_t>(up)];
            collist[static_cast<std::size_t>(up++)] = j;
          }
          d[static_cast<std::size_t>(j)] = h;
        }
      }
    }
    // Columns finalized before the last minimum search move their prices.
    for (int k = 0; k < last; ++k) {
      const int j = collist[static_cast<std::size_t>(k)];
      v[static_cast<std::size_t>(j)] += d[static_cast<std::size_t>(j)] - min;
    }
    // Flip the alternating path.
    int i;
    do {
      i = pred[static_cast<std::size_t>(endofpath)];
      y[static_cast<std::size_t>(endofpath)] = i;
      std::swap(endofpath, x[static_cast<std::size_t>(i)]);
    } while (i != f);
  }

  out.objective = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = x[static_cast<std::size_t>(i)];
    out.assignment[static_cast<std::size_t>(i)] = j;
    out.u[static_cast<std::size_t>(i)] = c(i, j) - v[static_cast<std::size_t>(j)];
    out.objective += c(i, j);
  }
}

LapSolution solve_lap_jv(const Matrix& cost, double tie_tol) {
  LapWorkspace ws;
  LapSolution out;
  ws.solve_jv(cost, out, tie_tol);
  return out;
}

}  // namespace blindmatch
