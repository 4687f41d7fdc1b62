#include <gtest/gtest.h>

#include "blindmatch/kmeans.hpp"
#include "blindmatch/synthetic.hpp"
#include "test_util.hpp"

namespace {

using namespace blindmatch;

TEST(KMeans, TwoObviousClusters) {
  const Matrix pts(4, 1, {0.0, 0.1, 10.0, 10.1});
  const auto m = kmeans_pp(pts, 2, 5, 0);
  EXPECT_EQ(m.assignments[0], m.assignments[1]);
  EXPECT_EQ(m.assignments[2], m.assignments[3]);
  EXPECT_NE(m.assignments[0], m.assignments[2]);
  EXPECT_NEAR(m.inertia, 4 * 0.05 * 0.05, 1e-12);
}

TEST(KMeans, InertiaMatchesRecomputationAndCentroidsAreMeans) {
  Rng rng(51);
  const Matrix pts = bmtest::uniform_matrix(60, 3, rng);
  const auto m = kmeans_pp(pts, 4, 3, 9);
  EXPECT_NEAR(m.inertia, recompute_inertia(pts, m), 1e-9);
  for (int c = 0; c < 4; ++c) {
    std::vector<double> mean(3, 0.0);
    int count = 0;
    for (std::size_t i = 0; i < 60; ++i)
      if (m.assignments[i] == c) {
        ++count;
        for (std::size_t t = 0; t < 3; ++t) mean[t] += pts(i, t);
      }
    ASSERT_GT(count, 0);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(m.centroids(c, t), mean[t] / count, 1e-9);
  }
}

TEST(KMeans, MoreRestartsNeverHurt) {
  Rng rng(52);
  const Matrix pts = bmtest::uniform_matrix(80, 2, rng);
  EXPECT_LE(kmeans_pp(pts, 6, 10, 3).inertia, kmeans_pp(pts, 6, 1, 3).inertia + 1e-12);
}

TEST(KMeans, DeterministicForSeed) {
  Rng rng(53);
  const Matrix pts = bmtest::uniform_matrix(40, 2, rng);
  EXPECT_EQ(kmeans_pp(pts, 3, 4, 1).assignments, kmeans_pp(pts, 3, 4, 1).assignments);
}

TEST(KMeans, RecoversBlobs) {
  BlobConfig cfg;
  const auto data = make_blobs(cfg);
  const auto m = kmeans_pp(data.x, cfg.classes, 10, 0);
  // Each cluster holds exactly one class.
  std::vector<int> cluster_of(cfg.classes, -1);
  for (std::size_t i = 0; i < m.assignments.size(); ++i) {
    const int label = (*data.x.labels)[i];
    if (cluster_of[label] < 0) cluster_of[label] = m.assignments[i];
    EXPECT_EQ(cluster_of[label], m.assignments[i]);
  }
}

TEST(KMeans, RejectsBadK) {
  const Matrix pts(3, 1, {0.0, 1.0, 2.0});
  EXPECT_EQ(bmtest::error_code_of([&] { kmeans_pp(pts, 0, 1, 0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(bmtest::error_code_of([&] { kmeans_pp(pts, 4, 1, 0); }), ErrorCode::kInvalidArgument);
}

}  // namespace
