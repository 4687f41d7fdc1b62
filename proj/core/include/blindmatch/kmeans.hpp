#pragma once

#include <cstdint>
#include <vector>

#include "blindmatch/embedding_store.hpp"
#include "blindmatch/matrix.hpp"

namespace blindmatch {

struct ClusterModel {
  Matrix centroids;          // K x d, mean of the assigned points
  std::vector<int> assignments;
  double inertia = 0.0;      // sum of squared distances to the assigned centroid
  int iterations = 0;        // Lloyd iterations of the winning run
};

struct KMeansOptions {
  int max_iters = 300;
  double shift_tol = 1e-6;
};

// Best of n_init runs (lowest inertia) of k-means++ seeding plus Lloyd
// iterations. A cluster that empties takes the point farthest from its
// current centroid.
ClusterModel kmeans_pp(const Matrix& points, int k, int n_init, std::uint64_t seed,
                       const KMeansOptions& options = {});
ClusterModel kmeans_pp(const EmbeddingMatrix& e, int k, int n_init, std::uint64_t seed,
                       const KMeansOptions& options = {});

double recompute_inertia(const Matrix& points, const ClusterModel& model);

}  // namespace blindmatch
