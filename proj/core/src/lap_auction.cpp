#include <algorithm>
#include <cmath>
#include <limits>

#include "blindmatch/error.hpp"
#include "blindmatch/lap.hpp"

namespace blindmatch {
namespace detail {
void require_square_finite(const Matrix& cost);
}  // namespace detail

// Cost-form forward-reverse auction. Invariant (epsilon-CS):
//   C(i,j) - u[i] - v[j] >= -eps for all (i,j), == 0 on assigned pairs.
// A forward bid by row i lowers v of its best column; a reverse bid by column
// j lowers u of its best row. Stints alternate whenever the number of assigned
// pairs grows.
void LapWorkspace::solve_auction(const Matrix& cost, double epsilon, LapSolution& out,
                                 const AuctionOptions& options) {
  detail::require_square_finite(cost);
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "auction epsilon must be positive");
  const int n = static_cast<int>(cost.rows());
  const auto un = static_cast<std::size_t>(n);
  const double* cdata = cost.data();
  auto c = [&](int i, int j) { return cdata[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j)]; };

  double max_abs = 0.0;
  for (double x : cost.values()) max_abs = std::max(max_abs, std::abs(x));
  // Below this, eps is lost in rounding of the costs and bids stop making progress.
  const double eps_floor = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + max_abs);
  const double target = std::max(epsilon, eps_floor);

  auto& v = price_;   // column duals
  auto& u = profit_;  // row duals
  auto& x = col_of_row_;
  auto& y = row_of_col_;
  v.assign(un, 0.0);
  u.assign(un, 0.0);

  double eps = std::max(target, options.initial_fraction * max_abs);
  for (;;) {
    x.assign(un, -1);
    y.assign(un, -1);
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) best = std::min(best, c(i, j) - v[static_cast<std::size_t>(j)]);
      u[static_cast<std::size_t>(i)] = best;
    }
    int assigned = 0;
    long bids = 0;
    bool forward = true;
    while (assigned < n) {
      const int start = assigned;
      while (assigned == start) {
        ++bids;
        if (forward) {
          int i = 0;
          while (x[static_cast<std::size_t>(i)] >= 0) ++i;
          double r1 = std::numeric_limits<double>::infinity();
          double r2 = std::numeric_limits<double>::infinity();
          int j1 = -1;
          for (int j = 0; j < n; ++j) {
            const double r = c(i, j) - v[static_cast<std::size_t>(j)];
            if (r < r1) {
              r2 = r1;
              r1 = r;
              j1 = j;
            } else if (r < r2) {
              r2 = r;
            }
          }
          if (n == 1) r2 = r1;
          v[static_cast<std::size_t>(j1)] = c(i, j1) - r2 - eps;
          u[static_cast<std::size_t>(i)] = r2 + eps;
          const int prev = y[static_cast<std::size_t>(j1)];
          if (prev >= 0) x[static_cast<std::size_t>(prev)] = -1; else ++assigned;
          x[static_cast<std::size_t>(i)] = j1;
          y[static_cast<std::size_t>(j1)] = i;
        } else {
          int j = 0;
          while (y[static_cast<std::size_t>(j)] >= 0) ++j;
          double s1 = std::numeric_limits<double>::infinity();
          double s2 = std::numeric_limits<double>::infinity();
          int i1 = -1;
          for (int i = 0; i < n; ++i) {
            const double s = c(i, j) - u[static_cast<std::size_t>(i)];
            if (s < s1) {
              s2 = s1;
              s1 = s;
              i1 = i;
            } else if (s < s2) {
              s2 = s;
            }
          }
          if (n == 1) s2 = s1;
          u[static_cast<std::size_t>(i1)] = c(i1, j) - s2 - eps;
          v[static_cast<std::size_t>(j)] = s2 + eps;
          const int prev = x[static_cast<std::size_t>(i1)];
          if (prev >= 0) y[static_cast<std::size_t>(prev)] = -1; else ++assigned;
          y[static_cast<std::size_t>(j)] = i1;
          x[static_cast<std::size_t>(i1)] = j;
        }
      }
      forward = !forward;
    }
    if (options.on_phase) options.on_phase(AuctionTrace{eps, bids});
    if (eps <= target) break;
    eps = std::max(target, eps * options.scaling);
  }

  out.assignment.assign(x.begin(), x.end());
  out.v.assign(v.begin(), v.end());
  out.u.assign(un, 0.0);
  out.epsilon = target;
  out.objective = 0.0;
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) best = std::min(best, c(i, j) - v[static_cast<std::size_t>(j)]);
    out.u[static_cast<std::size_t>(i)] = best;
    out.objective += c(i, x[static_cast<std::size_t>(i)]);
  }
}

LapSolution solve_lap_auction(const Matrix& cost, double epsilon, const AuctionOptions& options) {
  LapWorkspace ws;
  LapSolution out;
  ws.solve_auction(cost, epsilon, out, options);
  return out;
}

}  // namespace blindmatch
