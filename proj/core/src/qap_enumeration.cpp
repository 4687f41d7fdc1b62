#include <algorithm>
#include <chrono>
#include <limits>

#include "blindmatch/error.hpp"
#include "blindmatch/qap.hpp"

namespace blindmatch {
namespace {

struct Enumerator {
  const Matrix& c1;
  const Matrix& c2;
  std::size_t n;
  bool prune;
  Permutation current;
  std::vector<char> used;
  Permutation best;
  double best_cost = std::numeric_limits<double>::infinity();

  // Cost added by placing row m on column j given rows 0..m-1.
  double increment(std::size_t m, std::size_t j) const {
    double s = c1(m, m) * c2(j, j);
    for (std::size_t k = 0; k < m; ++k) {
      const auto pk = static_cast<std::size_t>(current[k]);
      s += c1(m, k) * c2(j, pk) + c1(k, m) * c2(pk, j);
    }
    return s;
  }

  void descend(std::size_t m, double partial) {
    if (m == n) {
      if (partial < best_cost) {
        best_cost = partial;
        best = current;
      }
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      const double next = partial + increment(m, j);
      if (prune && next >= best_cost) continue;
      used[j] = 1;
      current[m] = static_cast<int>(j);
      descend(m + 1, next);
      used[j] = 0;
    }
  }
};

}  // namespace

QapSolveReport solve_enumeration(const FactorizedQap& qap) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = qap.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty QAP");
  if (n > kMaxEnumerationSize)
    throw Error(ErrorCode::kTooLarge, "enumeration supports N <= " + std::to_string(kMaxEnumerationSize) +
                                          ", got " + std::to_string(n));
  const bool nonneg = std::ranges::all_of(qap.c1.values(), [](double x) { return x >= 0.0; }) &&
                      std::ranges::all_of(qap.c2.values(), [](double x) { return x >= 0.0; });

  Enumerator e{qap.c1, qap.c2, n, nonneg, Permutation(n, -1), std::vector<char>(n, 0), {}};
  e.descend(0, 0.0);

  QapSolveReport r;
  r.solver = "enumeration";
  r.primal_perm = e.best;
  r.qap_primal = qap.objective(e.best);
  r.qap_dual = r.qap_primal;
  r.primal_cost = qap.to_distortion(r.qap_primal);
  r.dual_bound = r.primal_cost;
  r.iterations = 1;
  r.converged = true;
  r.stop_reason = StopReason::kExact;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.history.push_back({1, r.qap_dual, r.qap_primal, r.wall_time});
  return r;
}

}  // namespace blindmatch
