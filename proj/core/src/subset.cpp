#include "blindmatch/subset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "blindmatch/error.hpp"
#include "blindmatch/random.hpp"

namespace blindmatch {
namespace {

void validate(const AlignmentProblem& prob) {
  const std::size_t l = prob.num_classes();
  if (l == 0 || !prob.goodness.is_square()) throw Error(ErrorCode::kInvalidArgument, "empty alignment problem");
  if (prob.subset_size < 1 || prob.subset_size > l)
    throw Error(ErrorCode::kInvalidArgument, "subset size must lie in [1, L]");
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Lexicographic comparison on (score desc, members asc).
bool better(const ScoredSubset& a, const ScoredSubset& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.members < b.members;
}

// Incremental bookkeeping for a working subset: link[x] = sum_{t in S} (G_xt + G_tx).
class WorkingSet {
 public:
  explicit WorkingSet(const Matrix& g) : g_(g), in_(g.rows(), 0), link_(g.rows(), 0.0) {}

  void add(int x) {
    score_ += gain_add(x);
    in_[x] = 1;
    for (std::size_t t = 0; t < g_.rows(); ++t) link_[t] += g_(t, x) + g_(x, t);
  }
  void remove(int x) {
    in_[x] = 0;
    for (std::size_t t = 0; t < g_.rows(); ++t) link_[t] -= g_(t, x) + g_(x, t);
    score_ -= gain_add(x);
  }
  double gain_add(int x) const { return g_(x, x) + link_[x]; }
  // Score change of replacing `out` (a member) by `in` (a non-member).
  double gain_swap(int out, int in) const {
    const double loss = gain_add(out) - 2.0 * g_(out, out);
    const double gain = gain_add(in) - (g_(in, out) + g_(out, in));
    return gain - loss;
  }
  bool contains(int x) const { return in_[x] != 0; }
  double score() const { return score_; }
  std::vector<int> members() const {
    std::vector<int> m;
    for (std::size_t i = 0; i < in_.size(); ++i)
      if (in_[i]) m.push_back(static_cast<int>(i));
    return m;
  }

 private:
  const Matrix& g_;
  std::vector<char> in_;
  std::vector<double> link_;
  double score_ = 0.0;
};

void grow_greedily(WorkingSet& w, std::size_t target, std::size_t l) {
  std::size_t count = w.members().size();
  while (count < target) {
    int pick = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < l; ++x) {
      const int xi = static_cast<int>(x);
      if (w.contains(xi)) continue;
      const double gain = w.gain_add(xi);
      if (gain > best) {
        best = gain;
        pick = xi;
      }
    }
    w.add(pick);
    ++count;
  }
}

void seed_with_best_pair(WorkingSet& w, const AlignmentProblem& prob) {
  const Matrix& g = prob.goodness;
  const std::size_t l = prob.num_classes();
  if (prob.subset_size == 1) {
    grow_greedily(w, 1, l);
    return;
  }
  int bi = 0, bj = 1;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = i + 1; j < l; ++j) {
      const double s = g(i, i) + g(j, j) + g(i, j) + g(j, i);
      if (s > best) {
        best = s;
        bi = static_cast<int>(i);
        bj = static_cast<int>(j);
      }
    }
  w.add(bi);
  w.add(bj);
}

void local_search(WorkingSet& w, std::size_t l, int max_swaps) {
  for (int swaps = 0; swaps < max_swaps; ++swaps) {
    double best = 1e-12 * std::max(1.0, std::abs(w.score()));
    int out = -1, in = -1;
    for (std::size_t a = 0; a < l; ++a) {
      const int ai = static_cast<int>(a);
      if (!w.contains(ai)) continue;
      for (std::size_t b = 0; b < l; ++b) {
        const int bi = static_cast<int>(b);
        if (w.contains(bi)) continue;
        const double d = w.gain_swap(ai, bi);
        if (d > best) {
          best = d;
          out = ai;
          in = bi;
        }
      }
    }
    if (out < 0) return;
    w.remove(out);
    w.add(in);
  }
}

ScoredSubset finish(const AlignmentProblem& prob, const WorkingSet& w) {
  ScoredSubset s{w.members(), 0.0};
  s.score = alignment_score(prob, s.members);
  return s;
}

}  // namespace

AlignmentProblem make_alignment_problem(const SimilarityMatrix& x, const SimilarityMatrix& y,
                                        const DistortionSpec& spec, std::size_t subset_size) {
  if (x.size() != y.size()) throw Error(ErrorCode::kSizeMismatch, "kernels differ in size");
  const std::size_t l = x.size();
  AlignmentProblem prob{Matrix(l, l), subset_size};
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j) {
      const double a = x.values(i, j);
      const double b = y.values(i, j);
      prob.goodness(i, j) =
          spec.kind == DistortionKind::kNegInner ? spec.h1(a) * spec.h2(b) : -(a - b) * (a - b);
    }
  validate(prob);
  return prob;
}

double alignment_score(const AlignmentProblem& prob, const std::vector<int>& subset) {
  if (subset.size() != prob.subset_size)
    throw Error(ErrorCode::kInvalidArgument, "subset has " + std::to_string(subset.size()) +
                                                 " members, expected " + std::to_string(prob.subset_size));
  const auto l = static_cast<int>(prob.num_classes());
  for (int i : subset)
    if (i < 0 || i >= l) throw Error(ErrorCode::kInvalidArgument, "subset index out of range");
  double s = 0.0;
  for (int i : subset)
    for (int j : subset) s += prob.goodness(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return s;
}

namespace {

template <typename Visit>
void for_each_subset(std::size_t l, std::size_t n, Visit visit) {
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  while (true) {
    visit(idx);
    std::size_t pos = n;
    while (pos > 0 && idx[pos - 1] == static_cast<int>(l - n + pos - 1)) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t k = pos; k < n; ++k) idx[k] = idx[k - 1] + 1;
  }
}

void require_enumerable(const AlignmentProblem& prob) {
  if (binomial(prob.num_classes(), prob.subset_size) > kMaxExactSubsets)
    throw Error(ErrorCode::kTooLarge, "too many subsets for exact selection");
}

}  // namespace

ScoredSubset select_subset_exact(const AlignmentProblem& prob) {
  validate(prob);
  require_enumerable(prob);
  ScoredSubset best{{}, -std::numeric_limits<double>::infinity()};
  for_each_subset(prob.num_classes(), prob.subset_size, [&](const std::vector<int>& s) {
    const double score = alignment_score(prob, s);
    if (score > best.score) best = {s, score};
  });
  return best;
}

ScoredSubset greedy_subset(const AlignmentProblem& prob) {
  validate(prob);
  WorkingSet w(prob.goodness);
  seed_with_best_pair(w, prob);
  grow_greedily(w, prob.subset_size, prob.num_classes());
  return finish(prob, w);
}

namespace {

std::vector<ScoredSubset> heuristic_optima(const AlignmentProblem& prob, const SubsetSearchConfig& cfg) {
  validate(prob);
  if (cfg.restarts < 1) throw Error(ErrorCode::kInvalidConfig, "restarts must be >= 1");
  if (cfg.max_swaps < 0) throw Error(ErrorCode::kInvalidConfig, "max_swaps must be >= 0");
  const std::size_t l = prob.num_classes();
  std::vector<ScoredSubset> found;
  for (int r = 0; r < cfg.restarts; ++r) {
    WorkingSet w(prob.goodness);
    if (r == 0 || prob.subset_size == 1 || l < 2) {
      seed_with_best_pair(w, prob);
    } else {
      Rng rng = Rng(cfg.seed).fork(static_cast<std::uint64_t>(r));
      for (int x : rng.sample_without_replacement(static_cast<int>(l), 2)) w.add(x);
    }
    grow_greedily(w, prob.subset_size, l);
    local_search(w, l, cfg.max_swaps);
    found.push_back(finish(prob, w));
  }
  return found;
}

}  // namespace

ScoredSubset select_subset_heuristic(const AlignmentProblem& prob, const SubsetSearchConfig& cfg) {
  auto found = heuristic_optima(prob, cfg);
  return *std::min_element(found.begin(), found.end(), better);
}

SubsetList top_m_subsets(const AlignmentProblem& prob, std::size_t m, SubsetMode mode,
                         const SubsetSearchConfig& cfg) {
  validate(prob);
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "m must be >= 1");
  std::vector<ScoredSubset> pool;
  if (mode == SubsetMode::kExact) {
    require_enumerable(prob);
    for_each_subset(prob.num_classes(), prob.subset_size, [&](const std::vector<int>& s) {
      pool.push_back({s, alignment_score(prob, s)});
    });
  } else {
    pool = heuristic_optima(prob, cfg);
  }
  std::sort(pool.begin(), pool.end(), better);
  pool.erase(std::unique(pool.begin(), pool.end(),
                         [](const ScoredSubset& a, const ScoredSubset& b) { return a.members == b.members; }),
             pool.end());
  SubsetList out;
  out.truncated = pool.size() < m;
  if (pool.size() > m) pool.resize(m);
  out.subsets = std::move(pool);
  return out;
}

}  // namespace blindmatch
