#pragma once

#include <cstdint>
#include <vector>

#include "blindmatch/kernels.hpp"
#include "blindmatch/matrix.hpp"

namespace blindmatch {

// Class-subset selection. `goodness` is maximized: for inner-product
// distortions it is the similarity h1(X_ij) h2(Y_ij), for squared differences
// it is -(X_ij - Y_ij)^2, so a high score always means well aligned.
struct AlignmentProblem {
  Matrix goodness;  // L x L
  std::size_t subset_size = 1;

  std::size_t num_classes() const { return goodness.rows(); }
};

AlignmentProblem make_alignment_problem(const SimilarityMatrix& x, const SimilarityMatrix& y,
                                        const DistortionSpec& spec, std::size_t subset_size);

struct ScoredSubset {
  std::vector<int> members;  // sorted ascending
  double score = 0.0;
};

// sum_{i,j in S} goodness(i, j), both orders and the diagonal.
double alignment_score(const AlignmentProblem& prob, const std::vector<int>& subset);

inline constexpr double kMaxExactSubsets = 2e6;

// Exhaustive; ties go to the lexicographically smallest subset.
ScoredSubset select_subset_exact(const AlignmentProblem& prob);

struct SubsetSearchConfig {
  int restarts = 20;
  int max_swaps = 1000;
  std::uint64_t seed = 0;
};

// Restart 0 grows greedily from the best pair, later restarts from a random
// pair; each greedy result is then improved by best-improvement 1-swaps.
ScoredSubset select_subset_heuristic(const AlignmentProblem& prob, const SubsetSearchConfig& cfg = {});

// Score of restart 0's greedy phase alone (no local search).
ScoredSubset greedy_subset(const AlignmentProblem& prob);

enum class SubsetMode { kExact, kHeuristic };

struct SubsetList {
  std::vector<ScoredSubset> subsets;  // descending score, then lexicographic
  bool truncated = false;             // fewer than m distinct subsets were available
};

SubsetList top_m_subsets(const AlignmentProblem& prob, std::size_t m, SubsetMode mode,
                         const SubsetSearchConfig& cfg = {});

}  // namespace blindmatch
