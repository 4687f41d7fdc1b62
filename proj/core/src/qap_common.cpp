#include <cmath>
#include <string>

#include "blindmatch/error.hpp"
#include "blindmatch/qap.hpp"

namespace blindmatch {

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::kExact: return "exact";
    case StopReason::kGapClosed: return "gap_closed";
    case StopReason::kStalled: return "stalled";
    case StopReason::kIterationLimit: return "iteration_limit";
    case StopReason::kTimeLimit: return "time_limit";
    case StopReason::kHeuristic: return "heuristic";
  }
  return "unknown";
}

std::string_view to_string(LapBackend backend) noexcept {
  return backend == LapBackend::kAuction ? "auction" : "jv";
}

LapBackend parse_lap_backend(std::string_view name) {
  if (name == "jv" || name == "jonker_volgenant") return LapBackend::kJonkerVolgenant;
  if (name == "auction") return LapBackend::kAuction;
  throw Error(ErrorCode::kInvalidConfig, "unknown LAP backend '" + std::string(name) + "'");
}

void HahnGrantConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!finite_nonneg(tol_abs) || !finite_nonneg(tol_rel) || !finite_nonneg(tol_gap))
    fail("tolerances must be finite and >= 0");
  if (!(auction_eps0 > 0.0) || !std::isfinite(auction_eps0)) fail("auction_eps0 must be > 0");
  if (!(auction_decay > 0.0 && auction_decay <= 1.0)) fail("auction_decay must be in (0, 1]");
  if (!(auction_eps_min > 0.0)) fail("auction_eps_min must be > 0");
  if (max_iters < 1) fail("max_iters must be >= 1");
  if (!(time_limit > 0.0)) fail("time_limit must be > 0");
  if (primal_heuristic_seeds < 0) fail("primal_heuristic_seeds must be >= 0");
}

Matrix sinkhorn_normalize(Matrix m, const std::vector<double>& row_sums,
                          const std::vector<double>& col_sums, int rounds) {
  const std::size_t n = m.rows();
  const std::size_t p = m.cols();
  for (int r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < p; ++j) s += m(i, j);
      if (s > 0.0)
        for (std::size_t j = 0; j < p; ++j) m(i, j) *= row_sums[i] / s;
    }
    std::vector<double> cs(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j) cs[j] += m(i, j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p; ++j)
        if (cs[j] > 0.0) m(i, j) *= col_sums[j] / cs[j];
  }
  return m;
}

QapSolveReport report_for_permutation(const FactorizedQap& qap, Permutation perm, std::string solver,
                                      double wall_time) {
  require_permutation(perm, qap.size());
  QapSolveReport r;
  r.solver = std::move(solver);
  r.qap_primal = qap.objective(perm);
  r.primal_cost = qap.to_distortion(r.qap_primal);
  r.qap_dual = 0.0;  // trivial bound: the factors are nonnegative
  r.dual_bound = qap.to_distortion(0.0);
  r.primal_perm = std::move(perm);
  r.converged = false;
  r.stop_reason = StopReason::kHeuristic;
  r.wall_time = wall_time;
  return r;
}

}  // namespace blindmatch
