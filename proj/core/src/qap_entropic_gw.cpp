#include <algorithm>
#include <cmath>
#include <limits>

#include "blindmatch/error.hpp"
#include "blindmatch/qap.hpp"

namespace blindmatch {
namespace {

void require_pair(const SimilarityMatrix& x, const SimilarityMatrix& y) {
  if (x.size() == 0 || !x.values.is_square() || !y.values.is_square())
    throw Error(ErrorCode::kInvalidArgument, "kernels must be square and nonempty");
  if (x.size() != y.size()) throw Error(ErrorCode::kSizeMismatch, "kernels differ in size");
}

Matrix apply(const Matrix& m, double (DistortionSpec::*fn)(double) const, const DistortionSpec& spec) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.data()[i] = (spec.*fn)(m.data()[i]);
  return out;
}

struct Decomposed {
  Matrix f1, f2, h1, h2;
};

Decomposed decompose(const SimilarityMatrix& x, const SimilarityMatrix& y, const DistortionSpec& spec) {
  return {apply(x.values, &DistortionSpec::f1, spec), apply(y.values, &DistortionSpec::f2, spec),
          apply(x.values, &DistortionSpec::h1, spec), apply(y.values, &DistortionSpec::h2, spec)};
}

std::vector<double> row_sums(const Matrix& t) {
  std::vector<double> r(t.rows(), 0.0);
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) r[i] += t(i, j);
  return r;
}

std::vector<double> col_sums(const Matrix& t) {
  std::vector<double> c(t.cols(), 0.0);
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) c[j] += t(i, j);
  return c;
}

// sum_{kl} l(X_ik, Y_jl) T_kl for all (i, j).
Matrix linearized_cost(const Decomposed& d, const Matrix& t) {
  const std::size_t n = t.rows();
  const auto r = row_sums(t);
  const auto c = col_sums(t);
  std::vector<double> a(n, 0.0), b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      a[i] += d.f1(i, k) * r[k];
      b[i] += d.f2(i, k) * c[k];
    }
  Matrix g = multiply(multiply(d.h1, t), d.h2.transposed());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = a[i] + b[j] - g(i, j);
  return g;
}

double median_abs(const Matrix& m) {
  std::vector<double> v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) v[i] = std::abs(m.data()[i]);
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double hi = *mid;
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), mid);
    hi = 0.5 * (lo + hi);
  }
  return hi;
}

double log_sum_exp(const std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : z) s += std::exp(x - m);
  return m + std::log(s);
}

struct SinkhornOutcome {
  Matrix plan;
  bool converged;
};

// Log-domain Sinkhorn for min <G, T> - eps H(T) with uniform marginals 1/N.
// The potentials g are warm-started across calls.
SinkhornOutcome sinkhorn(const Matrix& g_cost, double eps, std::vector<double>& f, std::vector<double>& g,
                         int iters, double tol) {
  const std::size_t n = g_cost.rows();
  const double log_mass = std::log(1.0 / static_cast<double>(n));
  std::vector<double> z(n);
  bool converged = false;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) z[j] = (g[j] - g_cost(i, j)) / eps;
      f[i] = eps * (log_mass - log_sum_exp(z));
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) z[i] = (f[i] - g_cost(i, j)) / eps;
      g[j] = eps * (log_mass - log_sum_exp(z));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) z[j] = (f[i] + g[j] - g_cost(i, j)) / eps;
      worst = std::max(worst, std::abs(std::exp(log_sum_exp(z)) - 1.0 / static_cast<double>(n)));
    }
    if (worst < tol) {
      converged = true;
      break;
    }
  }
  Matrix plan(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) plan(i, j) = std::exp((f[i] + g[j] - g_cost(i, j)) / eps);
  return {std::move(plan), converged};
}

// Projects a nonnegative plan onto the exact marginals 1/N without creating
// negative entries: scale down overfull rows and columns, then add the rank
// one correction of the remaining deficits.
void round_to_marginals(Matrix& t) {
  const std::size_t n = t.rows();
  const double mass = 1.0 / static_cast<double>(n);
  auto r = row_sums(t);
  for (std::size_t i = 0; i < n; ++i)
    if (r[i] > mass)
      for (std::size_t j = 0; j < n; ++j) t(i, j) *= mass / r[i];
  auto c = col_sums(t);
  for (std::size_t j = 0; j < n; ++j)
    if (c[j] > mass)
      for (std::size_t i = 0; i < n; ++i) t(i, j) *= mass / c[j];
  r = row_sums(t);
  c = col_sums(t);
  double deficit = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = mass - r[i];
    c[i] = mass - c[i];
    deficit += r[i];
  }
  if (deficit <= 0.0) return;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t(i, j) += r[i] * c[j] / deficit;
}

}  // namespace

double transport_objective(const SimilarityMatrix& x, const SimilarityMatrix& y, const DistortionSpec& spec,
                           const Matrix& coupling) {
  require_pair(x, y);
  if (coupling.rows() != x.size() || coupling.cols() != x.size())
    throw Error(ErrorCode::kSizeMismatch, "coupling has the wrong shape");
  const Decomposed d = decompose(x, y, spec);
  const std::size_t n = x.size();
  const auto r = row_sums(coupling);
  const auto c = col_sums(coupling);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) total += d.f1(i, k) * r[i] * r[k] + d.f2(i, k) * c[i] * c[k];
  const Matrix cross = multiply(multiply(d.h1, coupling), d.h2.transposed());
  return total - frobenius_inner(cross, coupling);
}

double relaxed_qap_objective_direct(const SimilarityMatrix& x, const SimilarityMatrix& y,
                                    const DistortionSpec& spec, const Matrix& s) {
  require_pair(x, y);
  const std::size_t n = x.size();
  if (s.rows() != n || s.cols() != n) throw Error(ErrorCode::kSizeMismatch, "assignment has the wrong shape");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double sij = s(i, j);
      if (sij == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
          total += spec.loss(x.values(i, k), y.values(j, l)) * sij * s(k, l);
    }
  return total;
}

EntropicGwResult solve_entropic_gw(const SimilarityMatrix& x, const SimilarityMatrix& y,
                                   const DistortionSpec& spec, const EntropicGwOptions& options) {
  require_pair(x, y);
  if (options.outer_iters < 1 || options.sinkhorn_iters < 1)
    throw Error(ErrorCode::kInvalidConfig, "entropic GW iteration counts must be >= 1");
  if (options.eps_entropy && !(*options.eps_entropy > 0.0))
    throw Error(ErrorCode::kInvalidConfig, "eps_entropy must be > 0");
  const std::size_t n = x.size();
  const Decomposed d = decompose(x, y, spec);

  EntropicGwResult result;
  Matrix t(n, n, 1.0 / static_cast<double>(n * n));
  Matrix g_cost = linearized_cost(d, t);
  if (options.eps_entropy) {
    result.eps_entropy = *options.eps_entropy;
  } else {
    const double med = median_abs(g_cost);
    result.eps_entropy = med > 0.0 ? 0.05 * med : 1e-3;
  }

  std::vector<double> f(n, 0.0), g(n, 0.0);
  for (int outer = 1; outer <= options.outer_iters; ++outer) {
    result.outer_iterations = outer;
    auto [plan, ok] = sinkhorn(g_cost, result.eps_entropy, f, g, options.sinkhorn_iters, options.sinkhorn_tol);
    result.sinkhorn_converged = result.sinkhorn_converged && ok;
    double change = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) change = std::max(change, std::abs(plan.data()[i] - t.data()[i]));
    t = std::move(plan);
    if (change < 1e-9) break;
    g_cost = linearized_cost(d, t);
  }
  round_to_marginals(t);

  Matrix neg(n, n);
  for (std::size_t i = 0; i < t.size(); ++i) neg.data()[i] = -t.data()[i];
  result.perm = solve_lap_jv(neg).assignment;
  result.transport_objective = transport_objective(x, y, spec, t);
  result.coupling = std::move(t);
  return result;
}

}  // namespace blindmatch
