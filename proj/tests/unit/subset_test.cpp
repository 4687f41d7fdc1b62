#include <gtest/gtest.h>

#include "blindmatch/subset.hpp"
#include "test_util.hpp"

namespace {

using namespace blindmatch;
using bmtest::error_code_of;

AlignmentProblem random_problem(std::size_t l, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return AlignmentProblem{bmtest::symmetric_matrix(l, rng, -1.0, 1.0), n};
}

TEST(AlignmentScore, CountsBothOrdersAndTheDiagonal) {
  Matrix g(3, 3, {1, 2, 3, 2, 4, 5, 3, 5, 6});
  const AlignmentProblem p{g, 2};
  EXPECT_DOUBLE_EQ(alignment_score(p, {0, 2}), 1 + 3 + 3 + 6);
  EXPECT_EQ(error_code_of([&] { alignment_score(p, {0, 3}); }), ErrorCode::kInvalidArgument);
}

TEST(AlignmentProblem, GoodnessSignFollowsTheSpec) {
  Rng rng(41);
  const auto x = gw_kernel(bmtest::random_prototypes(5, 3, rng));
  const auto y = gw_kernel(bmtest::random_prototypes(5, 3, rng));
  const auto sq = make_alignment_problem(x, y, DistortionSpec::squared_diff(), 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_LE(sq.goodness(i, j), 0.0);
  EXPECT_EQ(sq.subset_size, 3u);
  EXPECT_EQ(error_code_of([&] { make_alignment_problem(x, y, DistortionSpec::squared_diff(), 6); }),
            ErrorCode::kInvalidArgument);
}

TEST(SubsetExact, HandExample) {
  // Classes 1 and 2 agree with each other; class 0 disagrees with both.
  Matrix g(3, 3, {0, -5, -5, -5, 0, 1, -5, 1, 0});
  const auto best = select_subset_exact({g, 2});
  EXPECT_EQ(best.members, (std::vector<int>{1, 2}));
  EXPECT_DOUBLE_EQ(best.score, 2.0);
}

TEST(SubsetHeuristic, MatchesExactOnMostInstancesAndNeverExceedsIt) {
  Rng rng(42);
  int equal = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t l = 6 + rng.below(7);
    const auto p = random_problem(l, 2 + rng.below(4), 900 + t);
    const double exact = select_subset_exact(p).score;
    const auto h = select_subset_heuristic(p);
    EXPECT_LE(h.score, exact + 1e-12);
    EXPECT_NEAR(alignment_score(p, h.members), h.score, 1e-12);
    equal += h.score >= exact - 1e-12;
  }
  EXPECT_GE(equal, 45);
}

TEST(SubsetHeuristic, LocalSearchNeverLosesToGreedy) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_problem(15, 5, seed);
    EXPECT_GE(select_subset_heuristic(p).score, greedy_subset(p).score - 1e-12);
  }
}

TEST(TopM, SortedDistinctAndTruncated) {
  const auto p = random_problem(6, 3, 43);
  for (SubsetMode mode : {SubsetMode::kExact, SubsetMode::kHeuristic}) {
    const auto list = top_m_subsets(p, 5, mode);
    ASSERT_FALSE(list.subsets.empty());
    for (std::size_t i = 1; i < list.subsets.size(); ++i) {
      EXPECT_GE(list.subsets[i - 1].score, list.subsets[i].score);
      EXPECT_NE(list.subsets[i - 1].members, list.subsets[i].members);
    }
    for (const auto& s : list.subsets) {
      EXPECT_TRUE(std::is_sorted(s.members.begin(), s.members.end()));
      EXPECT_EQ(s.members.size(), 3u);
    }
  }
  // Only C(4, 3) = 4 subsets exist.
  const auto small = top_m_subsets(random_problem(4, 3, 44), 10, SubsetMode::kExact);
  EXPECT_EQ(small.subsets.size(), 4u);
  EXPECT_TRUE(small.truncated);
}

TEST(TopM, ExactListStartsWithTheExactOptimum) {
  const auto p = random_problem(9, 4, 45);
  const auto list = top_m_subsets(p, 3, SubsetMode::kExact);
  EXPECT_EQ(list.subsets.front().members, select_subset_exact(p).members);
}

TEST(SubsetExact, RefusesHugeSearchSpaces) {
  const AlignmentProblem p{Matrix(60, 60, 0.0), 30};
  EXPECT_EQ(error_code_of([&] { select_subset_exact(p); }), ErrorCode::kTooLarge);
}

}  // namespace
