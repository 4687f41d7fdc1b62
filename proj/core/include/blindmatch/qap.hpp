#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blindmatch/kernels.hpp"
#include "blindmatch/lap.hpp"
#include "blindmatch/matrix.hpp"
#include "blindmatch/permutation.hpp"

namespace blindmatch {

struct HistoryEntry {
  int iteration = 0;
  double qap_dual = 0.0;
  double qap_primal = 0.0;
  double elapsed = 0.0;  // seconds since the solve started
};

enum class StopReason { kExact, kGapClosed, kStalled, kIterationLimit, kTimeLimit, kHeuristic };
std::string_view to_string(StopReason reason) noexcept;

// `qap_*` values are in the shifted, scaled units of the FactorizedQap;
// `primal_cost` and `dual_bound` are mapped back to distortion units.
struct QapSolveReport {
  std::string solver;
  Permutation primal_perm;
  double primal_cost = 0.0;
  double dual_bound = 0.0;
  double qap_primal = 0.0;
  double qap_dual = 0.0;
  int iterations = 0;
  bool converged = false;  // true iff the duality gap is certified closed
  StopReason stop_reason = StopReason::kHeuristic;
  double wall_time = 0.0;
  std::vector<HistoryEntry> history;

  double gap() const { return qap_primal - qap_dual; }
};

// ---------------------------------------------------------------------------
// Exact enumeration

inline constexpr std::size_t kMaxEnumerationSize = 12;

// Depth-first over all N! permutations in lexicographic order with partial-cost
// pruning (valid because the factors are nonnegative). Ties resolve to the
// lexicographically smallest permutation.
QapSolveReport solve_enumeration(const FactorizedQap& qap);

// ---------------------------------------------------------------------------
// Factorized Hahn-Grant dual ascent

enum class LapBackend { kJonkerVolgenant, kAuction };
std::string_view to_string(LapBackend backend) noexcept;
LapBackend parse_lap_backend(std::string_view name);

class HahnGrantState;

struct HahnGrantConfig {
  LapBackend lap = LapBackend::kJonkerVolgenant;
  // Stop when the bound improves by less than tol_abs (or tol_rel relative)
  // over one iteration, or when primal - dual < tol_gap.
  double tol_abs = 1e-6;
  double tol_rel = 1e-6;
  double tol_gap = 1e-6;
  // Auction relaxation for iteration t (1-based): max(eps_min, eps0 * decay^(t-1)),
  // in the units of the scaled factors.
  double auction_eps0 = 0.1;
  double auction_decay = 0.9;
  double auction_eps_min = 1e-9;
  int max_iters = 10000;
  double time_limit = 3600.0;  // seconds, checked once per iteration
  int primal_heuristic_seeds = 100;
  std::uint64_t seed = 0;
  // Skips the FAQ + 2-opt start when set.
  std::optional<Permutation> initial_perm;
  // Called after every leader LAP; the state exposes the leader it was solved
  // on, the accumulated bound and the dual tensors.
  std::function<void(const HahnGrantState&)> on_iteration;

  void validate() const;
};

// Dual-ascent state for C_ijkl = c1(i,k) c2(j,l) kept in O(N^3): the tensor is
// never formed; only the accumulated LAP duals U(i,j,k) and V(i,j,l) are.
// Pair terms of the QAP start out as U = -p1, V = -p2 with the bound at
// -pair_constant.
class HahnGrantState {
 public:
  explicit HahnGrantState(const FactorizedQap& qap);

  std::size_t size() const { return n_; }
  int iteration() const { return iteration_; }
  double bound() const { return bound_; }
  // Leader matrix as it was when the latest leader LAP was solved.
  const Matrix& leader_solved() const { return leader_snapshot_; }
  const Matrix& leader() const { return leader_; }
  double u(std::size_t i, std::size_t j, std::size_t k) const { return u_[index(i, j, k)]; }
  double v(std::size_t i, std::size_t j, std::size_t l) const { return v_[index(i, j, l)]; }

  // C_ijkl + C_klij as carried by the dual tensors, for i != k and j != l:
  //   2 c1(i,k) c2(j,l) - U(i,j,k) - V(i,j,l) - U(k,l,i) - V(k,l,j)
  double pair_cost(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;
  // min over all i != k, j != l of pair_cost; O(N^4), for verification.
  double min_pair_cost() const;

 private:
  friend class HahnGrantSolver;
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return (i * n_ + j) * n_ + k; }

  const FactorizedQap* qap_;
  std::size_t n_;
  int iteration_ = 0;
  double bound_ = 0.0;
  Matrix leader_;
  Matrix leader_snapshot_;
  std::vector<double> u_;
  std::vector<double> v_;
};

QapSolveReport solve_factorized_hahn_grant(const FactorizedQap& qap, const HahnGrantConfig& cfg = {});

// ---------------------------------------------------------------------------
// Unfactorized reference (O(N^4) memory, small N only)

inline constexpr std::size_t kMaxReferenceSize = 8;

// Dense nonnegative 4-index cost tensor, C(i,j,k,l) at ((i*N + j)*N + k)*N + l.
// Summed over a permutation it exceeds the objective of interest by offset.
struct CostTensor {
  std::size_t n = 0;
  std::vector<double> values;
  double offset = 0.0;

  double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return values[((i * n + j) * n + k) * n + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return values[((i * n + j) * n + k) * n + l];
  }
};

CostTensor expand_tensor(const FactorizedQap& qap);

struct ReferenceIteration {
  double bound = 0.0;  // after the leader LAP of this iteration
  Matrix leader;       // the matrix that LAP was solved on
};

struct ReferenceResult {
  double bound = 0.0;
  bool converged = false;
  std::vector<ReferenceIteration> trace;
};

// Classical in-place Hahn-Grant on the full tensor with exact (JV) LAPs.
ReferenceResult solve_hahn_grant_reference(CostTensor c, int max_iters, double tol_abs = 1e-9);

// ---------------------------------------------------------------------------
// Primal heuristics

struct FaqOptions {
  int max_iters = 30;
  double rel_tol = 1e-6;
  int sinkhorn_rounds = 10;
};

// Frank-Wolfe on the doubly stochastic relaxation from a given start, projected
// to the nearest permutation (max <S, P>) at the end.
Permutation faq_from(const FactorizedQap& qap, const Matrix& start, const FaqOptions& options = {});

// Best over seeds: seed 0 starts at the barycenter 11^T/N, the others at
// Sinkhorn-normalized uniform random matrices.
Permutation solve_faq(const FactorizedQap& qap, int n_seeds, std::uint64_t seed = 0,
                      const FaqOptions& options = {});

// Best-improvement pairwise swaps until no swap lowers the cost.
// Requires symmetric factors (guaranteed by FactorizedQap construction).
Permutation solve_2opt(const FactorizedQap& qap, Permutation init);

// FAQ from each seed followed by 2-opt; best result.
Permutation primal_heuristic(const FactorizedQap& qap, int n_seeds = 100, std::uint64_t seed = 0,
                             const FaqOptions& options = {});

// ---------------------------------------------------------------------------
// Entropic Gromov-Wasserstein baseline

struct EntropicGwOptions {
  std::optional<double> eps_entropy;  // default 0.05 * median |linearized cost|
  int outer_iters = 50;
  int sinkhorn_iters = 500;
  double sinkhorn_tol = 1e-9;  // max marginal violation
};

struct EntropicGwResult {
  Matrix coupling;  // marginals 1/N
  Permutation perm;
  double transport_objective = 0.0;
  double eps_entropy = 0.0;
  bool sinkhorn_converged = true;
  int outer_iterations = 0;
};

EntropicGwResult solve_entropic_gw(const SimilarityMatrix& x, const SimilarityMatrix& y,
                                   const DistortionSpec& spec, const EntropicGwOptions& options = {});

// sum_{ijkl} l(X_ik, Y_jl) T_ij T_kl through the f/h decomposition, O(N^3).
double transport_objective(const SimilarityMatrix& x, const SimilarityMatrix& y,
                           const DistortionSpec& spec, const Matrix& coupling);

// The same sum by direct quadruple loop, O(N^4). Reference only.
double relaxed_qap_objective_direct(const SimilarityMatrix& x, const SimilarityMatrix& y,
                                    const DistortionSpec& spec, const Matrix& s);

// Rescales a positive matrix towards row sums r and column sums c (Sinkhorn).
Matrix sinkhorn_normalize(Matrix m, const std::vector<double>& row_sums,
                          const std::vector<double>& col_sums, int rounds);

// Report wrapper for a plain permutation produced by a heuristic.
QapSolveReport report_for_permutation(const FactorizedQap& qap, Permutation perm, std::string solver,
                                      double wall_time = 0.0);

}  // namespace blindmatch
