#include "blindmatch/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blindmatch/error.hpp"
#include "blindmatch/random.hpp"

namespace blindmatch {
namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double d = a[t] - b[t];
    s += d * d;
  }
  return s;
}

Matrix seed_centroids(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix c(k, x.cols());
  auto copy_row = [&](std::size_t dst, std::size_t src) {
    std::copy(x.row(src).begin(), x.row(src).end(), c.row(dst).begin());
  };
  copy_row(0, rng.below(n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(x.row(i), c.row(0));
  for (std::size_t m = 1; m < k; ++m) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    copy_row(m, pick);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(x.row(i), c.row(m)));
  }
  return c;
}

void assign(const Matrix& x, const Matrix& c, std::vector<int>& a) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t m = 0; m < c.rows(); ++m) {
      const double d = sq_dist(x.row(i), c.row(m));
      if (d < best) {
        best = d;
        arg = static_cast<int>(m);
      }
    }
    a[i] = arg;
  }
}

void repair_empty(const Matrix& x, const Matrix& c, std::vector<int>& a, std::size_t k) {
  while (true) {
    std::vector<int> counts(k, 0);
    for (int v : a) ++counts[static_cast<std::size_t>(v)];
    const auto empty = std::find(counts.begin(), counts.end(), 0);
    if (empty == counts.end()) return;
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto ci = static_cast<std::size_t>(a[i]);
      if (counts[ci] < 2) continue;
      const double d = sq_dist(x.row(i), c.row(ci));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    a[far] = static_cast<int>(empty - counts.begin());
  }
}

Matrix means(const Matrix& x, const std::vector<int>& a, std::size_t k) {
  Matrix c(k, x.cols(), 0.0);
  std::vector<double> counts(k, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto ci = static_cast<std::size_t>(a[i]);
    counts[ci] += 1.0;
    auto row = c.row(ci);
    const auto xi = x.row(i);
    for (std::size_t t = 0; t < xi.size(); ++t) row[t] += xi[t];
  }
  for (std::size_t m = 0; m < k; ++m)
    for (double& v : c.row(m)) v /= counts[m];
  return c;
}

}  // namespace

double recompute_inertia(const Matrix& points, const ClusterModel& model) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
    s += sq_dist(points.row(i), model.centroids.row(static_cast<std::size_t>(model.assignments[i])));
  return s;
}

ClusterModel kmeans_pp(const Matrix& points, int k, int n_init, std::uint64_t seed, const KMeansOptions& options) {
  const std::size_t n = points.rows();
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (static_cast<std::size_t>(k) > n)
    throw Error(ErrorCode::kInvalidArgument, "K = " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                                                 " points");
  if (n_init < 1) throw Error(ErrorCode::kInvalidArgument, "n_init must be >= 1");
  const auto kk = static_cast<std::size_t>(k);

  ClusterModel best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int run = 0; run < n_init; ++run) {
    Rng rng = Rng(seed).fork(static_cast<std::uint64_t>(run));
    ClusterModel model;
    model.centroids = seed_centroids(points, kk, rng);
    model.assignments.assign(n, 0);
    for (int it = 1; it <= options.max_iters; ++it) {
      model.iterations = it;
      assign(points, model.centroids, model.assignments);
      repair_empty(points, model.centroids, model.assignments, kk);
      Matrix next = means(points, model.assignments, kk);
      double shift = 0.0;
      for (std::size_t m = 0; m < kk; ++m)
        shift = std::max(shift, std::sqrt(sq_dist(next.row(m), model.centroids.row(m))));
      model.centroids = std::move(next);
      if (shift < options.shift_tol) break;
    }
    model.inertia = recompute_inertia(points, model);
    if (model.inertia < best.inertia) best = std::move(model);
  }
  return best;
}

ClusterModel kmeans_pp(const EmbeddingMatrix& e, int k, int n_init, std::uint64_t seed,
                       const KMeansOptions& options) {
  Matrix x(e.n(), e.d());
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = e.data.data()[i];
  return kmeans_pp(x, k, n_init, seed, options);
}

}  // namespace blindmatch
