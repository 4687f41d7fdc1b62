#include <algorithm>
#include <cmath>
#include <limits>

#include "blindmatch/error.hpp"
#include "blindmatch/qap.hpp"

namespace blindmatch {
namespace {

void require_square_pair(const FactorizedQap& qap) {
  if (qap.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty QAP");
  if (!qap.c1.is_square() || qap.c2.rows() != qap.size() || !qap.c2.is_square())
    throw Error(ErrorCode::kSizeMismatch, "QAP factors differ in size");
}

Matrix start_matrix(std::size_t n, std::uint64_t seed, std::uint64_t index, int rounds) {
  if (index == 0) return Matrix(n, n, 1.0 / static_cast<double>(n));
  Rng rng = Rng(seed).fork(index);
  Matrix m(n, n);
  for (auto& x : m.values()) x = rng.uniform() + 1e-12;
  const std::vector<double> ones(n, 1.0);
  return sinkhorn_normalize(std::move(m), ones, ones, rounds);
}

Permutation nearest_permutation(const Matrix& s) {
  Matrix neg(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.size(); ++i) neg.data()[i] = -s.data()[i];
  return solve_lap_jv(neg).assignment;
}

}  // namespace

Permutation faq_from(const FactorizedQap& qap, const Matrix& start, const FaqOptions& options) {
  require_square_pair(qap);
  const std::size_t n = qap.size();
  if (start.rows() != n || start.cols() != n)
    throw Error(ErrorCode::kSizeMismatch, "FAQ start matrix has the wrong shape");
  Matrix s = start;
  double f = qap.relaxed_objective(s);
  LapWorkspace work;
  LapSolution lap;
  for (int it = 0; it < options.max_iters; ++it) {
    Matrix grad = multiply(multiply(qap.c1, s), qap.c2);
    for (auto& g : grad.values()) g *= 2.0;
    work.solve_jv(grad, lap);

    Matrix r = s;
    for (auto& x : r.values()) x = -x;
    for (std::size_t i = 0; i < n; ++i) r(i, static_cast<std::size_t>(lap.assignment[i])) += 1.0;

    const double b = frobenius_inner(grad, r);
    const double a = frobenius_inner(qap.c1, multiply(multiply(r, qap.c2), r.transposed()));
    double t;
    if (a > 0.0)
      t = std::clamp(-b / (2.0 * a), 0.0, 1.0);
    else
      t = a + b < 0.0 ? 1.0 : 0.0;
    if (t == 0.0) break;

    for (std::size_t i = 0; i < s.size(); ++i) s.data()[i] += t * r.data()[i];
    const double f_next = f + t * b + t * t * a;
    const double change = std::abs(f_next - f);
    f = f_next;
    if (change < options.rel_tol * std::max(std::abs(f), 1e-12)) break;
  }
  return nearest_permutation(s);
}

Permutation solve_faq(const FactorizedQap& qap, int n_seeds, std::uint64_t seed, const FaqOptions& options) {
  require_square_pair(qap);
  if (n_seeds < 1) throw Error(ErrorCode::kInvalidArgument, "n_seeds must be >= 1");
  Permutation best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_seeds; ++s) {
    Permutation p = faq_from(qap, start_matrix(qap.size(), seed, static_cast<std::uint64_t>(s),
                                               options.sinkhorn_rounds),
                             options);
    const double cost = qap.objective(p);
    if (cost < best_cost) {
      best_cost = cost;
      best = std::move(p);
    }
  }
  return best;
}

Permutation solve_2opt(const FactorizedQap& qap, Permutation perm) {
  require_square_pair(qap);
  const std::size_t n = qap.size();
  require_permutation(perm, n);
  const Matrix& c1 = qap.c1;
  const Matrix& c2 = qap.c2;
  double cost = qap.objective(perm);
  while (true) {
    double best_delta = 0.0;
    std::size_t best_a = 0, best_b = 0;
    for (std::size_t a = 0; a < n; ++a) {
      const auto pa = static_cast<std::size_t>(perm[a]);
      for (std::size_t b = a + 1; b < n; ++b) {
        const auto pb = static_cast<std::size_t>(perm[b]);
        double cross = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == a || k == b) continue;
          const auto pk = static_cast<std::size_t>(perm[k]);
          cross += (c1(a, k) - c1(b, k)) * (c2(pb, pk) - c2(pa, pk));
        }
        const double delta = (c1(a, a) - c1(b, b)) * (c2(pb, pb) - c2(pa, pa)) + 2.0 * cross;
        if (delta < best_delta) {
          best_delta = delta;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_delta >= -1e-12 * std::max(1.0, std::abs(cost))) break;
    std::swap(perm[best_a], perm[best_b]);
    const double next = qap.objective(perm);
    if (!(next < cost)) {
      std::swap(perm[best_a], perm[best_b]);
      break;
    }
    cost = next;
  }
  return perm;
}

Permutation primal_heuristic(const FactorizedQap& qap, int n_seeds, std::uint64_t seed,
                             const FaqOptions& options) {
  require_square_pair(qap);
  if (n_seeds < 1) return solve_2opt(qap, identity_permutation(qap.size()));
  Permutation best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_seeds; ++s) {
    Permutation p = faq_from(qap, start_matrix(qap.size(), seed, static_cast<std::uint64_t>(s),
                                               options.sinkhorn_rounds),
                             options);
    p = solve_2opt(qap, std::move(p));
    const double cost = qap.objective(p);
    if (cost < best_cost) {
      best_cost = cost;
      best = std::move(p);
    }
  }
  return best;
}

}  // namespace blindmatch
