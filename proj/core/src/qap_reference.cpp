#include <cmath>

#include "blindmatch/error.hpp"
#include "blindmatch/qap.hpp"
#include "qap_detail.hpp"

namespace blindmatch {

using detail::snap;

CostTensor expand_tensor(const FactorizedQap& qap) {
  const std::size_t n = qap.size();
  if (n > kMaxReferenceSize)
    throw Error(ErrorCode::kTooLarge, "tensor expansion supports N <= " + std::to_string(kMaxReferenceSize));
  CostTensor c{n, std::vector<double>(n * n * n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
          if ((i == k) != (j == l)) continue;
          c(i, j, k, l) = qap.c1(i, k) * qap.c2(j, l) + qap.pair_term(i, j, k, l);
        }
  c.offset = qap.pair_constant;
  return c;
}

ReferenceResult solve_hahn_grant_reference(CostTensor c, int max_iters, double tol_abs) {
  const std::size_t n = c.n;
  if (n == 0 || c.values.size() != n * n * n * n)
    throw Error(ErrorCode::kSizeMismatch, "cost tensor has the wrong number of entries");
  if (n > kMaxReferenceSize)
    throw Error(ErrorCode::kTooLarge, "reference solver supports N <= " + std::to_string(kMaxReferenceSize));

  ReferenceResult result;
  const std::size_t m = n - 1;
  Matrix leader(n, n, 0.0);
  Matrix sub(m, m, 0.0);
  result.bound = -c.offset;
  double previous = result.bound;
  for (int t = 1; t <= max_iters; ++t) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) leader(i, j) = c(i, j, i, j);
    const LapSolution top = solve_lap_jv(leader, detail::kTieTol);
    result.bound += top.dual_objective();
    result.trace.push_back({result.bound, leader});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j, i, j) = snap(c(i, j, i, j) - top.u[i] - top.v[j]);

    if (t >= 2 && result.bound - previous < tol_abs) {
      result.converged = true;
      break;
    }
    previous = result.bound;
    if (n < 2) {
      result.converged = true;
      break;
    }

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double share = c(i, j, i, j) / static_cast<double>(m);
        c(i, j, i, j) = 0.0;
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < n; ++l)
            if (k != i && l != j) c(i, j, k, l) += share;
      }

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < n; ++l) {
            if (k == i || l == j) continue;
            c(i, j, k, l) += c(k, l, i, j);
            c(k, l, i, j) = 0.0;
          }
        for (std::size_t kk = 0; kk < m; ++kk)
          for (std::size_t ll = 0; ll < m; ++ll)
            sub(kk, ll) = snap(c(i, j, kk < i ? kk : kk + 1, ll < j ? ll : ll + 1));
        const LapSolution s = solve_lap_jv(sub, detail::kTieTol);
        c(i, j, i, j) = s.dual_objective();
        for (std::size_t kk = 0; kk < m; ++kk)
          for (std::size_t ll = 0; ll < m; ++ll)
            c(i, j, kk < i ? kk : kk + 1, ll < j ? ll : ll + 1) -= s.u[kk] + s.v[ll];
      }
  }
  return result;
}

}  // namespace blindmatch
