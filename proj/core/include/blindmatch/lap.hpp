#pragma once

#include <functional>
#include <vector>

#include "blindmatch/matrix.hpp"
#include "blindmatch/permutation.hpp"

namespace blindmatch {

// Solution of min_P sum_i C(i, P(i)) with a dual certificate:
//   C(i,j) - u[i] - v[j] >= -epsilon             (dual feasibility)
//   C(i,a[i]) - u[i] - v[a[i]] <= epsilon        (complementary slackness)
// so sum(u) + sum(v) is a lower bound on the optimum and `objective` is within
// N * epsilon of it.
struct LapSolution {
  Permutation assignment;  // row i -> column assignment[i]
  std::vector<double> u;
  std::vector<double> v;
  double objective = 0.0;
  double epsilon = 0.0;  // 0 for the exact solver

  double dual_objective() const;
};

// Exact Jonker-Volgenant: column reduction, reduction transfer, then shortest
// augmenting paths. Ties between equal reduced costs go to the lowest column.
LapSolution solve_lap_jv(const Matrix& cost, double tie_tol = 0.0);

// Progress of the auction, reported once per epsilon-scaling phase.
struct AuctionTrace {
  double epsilon = 0.0;
  long bids = 0;
};

struct AuctionOptions {
  // First phase epsilon as a fraction of max|C|; phases shrink by `scaling`
  // until the requested epsilon is reached.
  double initial_fraction = 0.25;
  double scaling = 0.2;
  std::function<void(const AuctionTrace&)> on_phase;
};

// Forward-reverse auction with epsilon scaling. Column duals are the (negated)
// prices; row duals are u[i] = min_j (C(i,j) - v[j]), which makes the dual
// exactly feasible and the slack on the assignment at most epsilon.
LapSolution solve_lap_auction(const Matrix& cost, double epsilon, const AuctionOptions& options = {});

// Same kernels with caller-owned scratch space; used on the hot path of the
// QAP solver, which solves N^2 + 1 LAPs per sweep.
class LapWorkspace {
 public:
  // Values closer than tie_tol compare equal and ties go to the lower index,
  // which keeps the chosen duals stable under rounding noise in the input.
  void solve_jv(const Matrix& cost, LapSolution& out, double tie_tol = 0.0);
  void solve_auction(const Matrix& cost, double epsilon, LapSolution& out,
                     const AuctionOptions& options = {});

 private:
  std::vector<int> col_of_row_, row_of_col_, free_rows_, col_list_, pred_, matches_;
  std::vector<double> dist_, price_, profit_;
};

}  // namespace blindmatch
