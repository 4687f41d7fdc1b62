#include <chrono>
#include <cmath>
#include <limits>

#include "blindmatch/error.hpp"
#include "blindmatch/qap.hpp"
#include "qap_detail.hpp"

namespace blindmatch {

using detail::snap;

HahnGrantState::HahnGrantState(const FactorizedQap& qap)
    : qap_(&qap),
      n_(qap.size()),
      leader_(n_, n_, 0.0),
      leader_snapshot_(n_, n_, 0.0),
      u_(n_ * n_ * n_, 0.0),
      v_(n_ * n_ * n_, 0.0) {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) leader_(i, j) = qap.c1(i, i) * qap.c2(j, j) + qap.pair_term(i, j, i, j);
  if (!qap.has_pair_terms()) return;
  // Pair terms enter as initial duals; the bound starts below zero by their total.
  bound_ = -qap.pair_constant;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = 0; k < n_; ++k) {
        if (k == i) continue;
        u_[index(i, j, k)] = -qap.p1(i, k);
      }
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t l = 0; l < n_; ++l) {
        if (l == j) continue;
        v_[index(i, j, l)] = -qap.p2(j, l);
      }
}

double HahnGrantState::pair_cost(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
  return 2.0 * qap_->c1(i, k) * qap_->c2(j, l) - u_[index(i, j, k)] - v_[index(i, j, l)] -
         u_[index(k, l, i)] - v_[index(k, l, j)];
}

double HahnGrantState::min_pair_cost() const {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = 0; k < n_; ++k) {
        if (k == i) continue;
        for (std::size_t l = 0; l < n_; ++l)
          if (l != j) lo = std::min(lo, pair_cost(i, j, k, l));
      }
  return lo;
}

class HahnGrantSolver {
 public:
  using Clock = std::chrono::steady_clock;

  HahnGrantSolver(const FactorizedQap& qap, const HahnGrantConfig& cfg)
      : qap_(qap), cfg_(cfg), state_(qap), n_(qap.size()), start_(Clock::now()) {}

  QapSolveReport run() {
    QapSolveReport report;
    report.solver = cfg_.lap == LapBackend::kAuction ? "hahn_grant_auction" : "hahn_grant";

    if (cfg_.initial_perm) {
      require_permutation(*cfg_.initial_perm, n_);
      offer(*cfg_.initial_perm);
    } else if (cfg_.primal_heuristic_seeds > 0) {
      offer(primal_heuristic(qap_, cfg_.primal_heuristic_seeds, cfg_.seed));
    } else {
      offer(identity_permutation(n_));
    }

    double previous = -std::numeric_limits<double>::infinity();
    while (true) {
      ++state_.iteration_;
      const int t = state_.iteration_;
      epsilon_ = std::max(cfg_.auction_eps_min, cfg_.auction_eps0 * std::pow(cfg_.auction_decay, t - 1));
      harvest_leader();
      report.history.push_back({t, state_.bound_, best_cost_, elapsed()});
      if (cfg_.on_iteration) cfg_.on_iteration(state_);

      const double gain = state_.bound_ - previous;
      previous = state_.bound_;
      if (best_cost_ - state_.bound_ < cfg_.tol_gap) {
        report.stop_reason = StopReason::kGapClosed;
        break;
      }
      if (t >= 2 && (gain < cfg_.tol_abs || gain < cfg_.tol_rel * std::abs(state_.bound_))) {
        report.stop_reason = StopReason::kStalled;
        break;
      }
      if (t >= cfg_.max_iters) {
        report.stop_reason = StopReason::kIterationLimit;
        break;
      }
      if (elapsed() >= cfg_.time_limit) {
        report.stop_reason = StopReason::kTimeLimit;
        break;
      }
      redistribute();
      sweep();
    }

    report.primal_perm = best_;
    report.qap_primal = qap_.objective(best_);
    report.qap_dual = std::min(state_.bound_, report.qap_primal);
    report.primal_cost = qap_.to_distortion(report.qap_primal);
    report.dual_bound = qap_.to_distortion(report.qap_dual);
    report.iterations = state_.iteration_;
    report.converged = report.qap_primal - state_.bound_ <= cfg_.tol_gap;
    report.wall_time = elapsed();
    return report;
  }

 private:
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  void offer(const Permutation& perm) {
    const double cost = qap_.objective(perm);
    if (cost < best_cost_) {
      best_cost_ = cost;
      best_ = perm;
    }
  }

  // Solves the LAP and returns the dual sum. An auction dual can be worse
  // than the zero dual (feasible because all costs are nonnegative); the
  // zero dual replaces it then.
  double solve(const Matrix& cost) {
    if (cfg_.lap == LapBackend::kJonkerVolgenant) {
      work_.solve_jv(cost, lap_, detail::kTieTol);
      return lap_.dual_objective();
    }
    work_.solve_auction(cost, epsilon_, lap_);
    double total = lap_.dual_objective();
    if (!(total >= 0.0)) {
      std::fill(lap_.u.begin(), lap_.u.end(), 0.0);
      std::fill(lap_.v.begin(), lap_.v.end(), 0.0);
      total = 0.0;
    }
    return total;
  }

  void harvest_leader() {
    state_.leader_snapshot_ = state_.leader_;
    state_.bound_ += solve(state_.leader_);
    offer(lap_.assignment);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) state_.leader_(i, j) = snap(state_.leader_(i, j) - lap_.u[i] - lap_.v[j]);
  }

  // Spreads each leader over the rows of its own subproblem.
  void redistribute() {
    if (n_ < 2) return;
    const double share = 1.0 / static_cast<double>(n_ - 1);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        const double d = state_.leader_(i, j) * share;
        state_.leader_(i, j) = 0.0;
        for (std::size_t k = 0; k < n_; ++k)
          if (k != i) state_.u_[state_.index(i, j, k)] -= d;
      }
  }

  void sweep() {
    if (n_ < 2) return;
    const std::size_t m = n_ - 1;
    if (sub_.rows() != m) sub_ = Matrix(m, m, 0.0);
    Permutation perm(n_);
    const auto& c1 = qap_.c1;
    const auto& c2 = qap_.c2;
    auto& U = state_.u_;
    auto& V = state_.v_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (elapsed() >= cfg_.time_limit) return;
      for (std::size_t j = 0; j < n_; ++j) {
        const double* uij = &U[state_.index(i, j, 0)];
        const double* vij = &V[state_.index(i, j, 0)];
        for (std::size_t kk = 0; kk < m; ++kk) {
          const std::size_t k = kk < i ? kk : kk + 1;
          const double a = 2.0 * c1(i, k);
          const double uk = uij[k];
          double* row = sub_.row(kk).data();
          for (std::size_t ll = 0; ll < m; ++ll) {
            const std::size_t l = ll < j ? ll : ll + 1;
            const std::size_t kl = state_.index(k, l, 0);
            row[ll] = snap(a * c2(j, l) - uk - vij[l] - U[kl + i] - V[kl + j]);
          }
        }
        const double total = solve(sub_);

        perm[i] = static_cast<int>(j);
        for (std::size_t kk = 0; kk < m; ++kk) {
          const std::size_t k = kk < i ? kk : kk + 1;
          const auto ll = static_cast<std::size_t>(lap_.assignment[kk]);
          perm[k] = static_cast<int>(ll < j ? ll : ll + 1);
        }
        offer(perm);

        state_.leader_(i, j) = total;
        double* uw = &U[state_.index(i, j, 0)];
        double* vw = &V[state_.index(i, j, 0)];
        for (std::size_t kk = 0; kk < m; ++kk) uw[kk < i ? kk : kk + 1] += lap_.u[kk];
        for (std::size_t ll = 0; ll < m; ++ll) vw[ll < j ? ll : ll + 1] += lap_.v[ll];
      }
    }
  }

  const FactorizedQap& qap_;
  const HahnGrantConfig& cfg_;
  HahnGrantState state_;
  std::size_t n_;
  Clock::time_point start_;
  double epsilon_ = 0.0;
  LapWorkspace work_;
  LapSolution lap_;
  Matrix sub_;
  Permutation best_;
  double best_cost_ = std::numeric_limits<double>::infinity();
};

QapSolveReport solve_factorized_hahn_grant(const FactorizedQap& qap, const HahnGrantConfig& cfg) {
  cfg.validate();
  if (qap.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty QAP");
  if (qap.c2.rows() != qap.size()) throw Error(ErrorCode::kSizeMismatch, "QAP factors differ in size");
  for (double x : qap.c1.values())
    if (!(x >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "QAP factors must be nonnegative");
  for (double x : qap.c2.values())
    if (!(x >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "QAP factors must be nonnegative");
  if (qap.has_pair_terms() && (qap.p1.rows() != qap.size() || qap.p2.rows() != qap.size()))
    throw Error(ErrorCode::kSizeMismatch, "QAP pair terms differ in size");
  HahnGrantSolver solver(qap, cfg);
  return solver.run();
}

}  // namespace blindmatch
