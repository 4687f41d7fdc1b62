#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blindmatch/embedding_store.hpp"
#include "blindmatch/matrix.hpp"
#include "blindmatch/permutation.hpp"

namespace blindmatch {

enum class KernelKind { kGwDistance, kCka, kMutualKnn };

std::string_view to_string(KernelKind kind) noexcept;
KernelKind parse_kernel_kind(std::string_view name);

// Within-modality pairwise kernel. GW and CKA matrices are symmetric; mutual
// k-NN matrices are directional and stored as-is.
struct SimilarityMatrix {
  Matrix values;
  KernelKind kind = KernelKind::kGwDistance;
  std::optional<int> k;

  std::size_t size() const { return values.rows(); }
};

// Pointwise distortion l(A, B) = f1(A) + f2(B) - h1(A) h2(B).
//
//   kSquaredDiff: f1 = A^2, f2 = B^2, h1 = 2A, h2 = B   (Gromov-Wasserstein)
//   kNegInner:    f1 = f2 = 0, h1 = A, h2 = B           (CKA, mutual k-NN)
enum class DistortionKind { kSquaredDiff, kNegInner };

std::string_view to_string(DistortionKind kind) noexcept;
DistortionKind parse_distortion_kind(std::string_view name);

struct DistortionSpec {
  DistortionKind kind = DistortionKind::kSquaredDiff;

  static DistortionSpec squared_diff() { return {DistortionKind::kSquaredDiff}; }
  static DistortionSpec neg_inner() { return {DistortionKind::kNegInner}; }
  // Natural pairing: GW -> squared difference, CKA / k-NN -> negative inner product.
  static DistortionSpec for_kernel(KernelKind kind);

  double loss(double a, double b) const;
  double f1(double a) const;
  double f2(double b) const;
  double h1(double a) const;
  double h2(double b) const;

  bool accepts(KernelKind kind) const;
};

// Koopmans-Beckmann factors of a distortion:
//
//   distortion(pi) = affine_scale * sum_{i,k} c1(i,k) c2(pi(i), pi(k)) + affine_offset
//
// with c1, c2 symmetric, entrywise >= 0 and max entry 1 (when nonzero).
//
// Optional pair terms p1, p2 (empty or N x N) describe the cost tensor a
// dual solver should start from:
//
//   T(i,j,k,l) = c1(i,k) c2(j,l) + p1(i,k) + p2(j,l)
//
// Over any permutation they add up to pair_constant, so they never change
// which permutation is optimal. to_qap fills them for squared differences so
// that T is the (rescaled) distortion tensor itself, which is nonnegative
// and gives the Hahn-Grant bound a much better starting point.
struct FactorizedQap {
  Matrix c1;
  Matrix c2;
  double affine_scale = 1.0;
  double affine_offset = 0.0;
  Matrix p1;
  Matrix p2;
  double pair_constant = 0.0;

  std::size_t size() const { return c1.rows(); }
  bool has_pair_terms() const { return p1.rows() != 0; }
  double pair_term(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return has_pair_terms() ? p1(i, k) + p2(j, l) : 0.0;
  }

  // sum_{i,k} c1(i,k) c2(perm(i), perm(k)); O(N^2).
  double objective(const Permutation& perm) const;
  // Same objective for a relaxed (e.g. doubly stochastic) assignment matrix:
  // sum_{ijkl} c1(i,k) c2(j,l) S(i,j) S(k,l) = <c1, S c2 S^T>.
  double relaxed_objective(const Matrix& s) const;

  double to_distortion(double qap_value) const { return affine_scale * qap_value + affine_offset; }
  double to_qap_units(double distortion) const {
    return (distortion - affine_offset) / affine_scale;
  }
};

SimilarityMatrix gw_kernel(const ClassPrototypes& p);
SimilarityMatrix mutual_knn_kernel(const ClassPrototypes& p, int k);
SimilarityMatrix cka_kernel(const ClassPrototypes& p);
SimilarityMatrix build_kernel(const ClassPrototypes& p, KernelKind kind, int knn_k = 5);

// Linear CKA of two prototype sets evaluated straight from the Gram matrices.
double linear_cka(const ClassPrototypes& x, const ClassPrototypes& y);

// sum_{i,j} l(X_ij, Y_{perm(i) perm(j)})
double distortion(const SimilarityMatrix& x, const SimilarityMatrix& y, const DistortionSpec& spec,
                  const Permutation& perm);

// Applies perm to rows and columns: out(i,j) = y(perm(i), perm(j)).
SimilarityMatrix permuted(const SimilarityMatrix& y, const Permutation& perm);

struct ShufflePoint {
  double alpha = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

std::vector<double> default_shuffle_levels();  // 0, 0.05, ..., 1

// For each level, n_seeds partial shuffles (seed s uses stream s at every
// level); mean and population standard deviation of the distortion.
std::vector<ShufflePoint> shuffle_curve(const SimilarityMatrix& x, const SimilarityMatrix& y,
                                        const DistortionSpec& spec,
                                        const std::vector<double>& levels, int n_seeds,
                                        std::uint64_t base_seed = 0);

// Rescales GW distances into [0, 1] by the largest entry of either matrix.
// Used for displaying shuffle curves only, never for QAP construction.
std::pair<SimilarityMatrix, SimilarityMatrix> standardize_gw(const SimilarityMatrix& x,
                                                             const SimilarityMatrix& y);

// Mutual k-NN inputs are replaced by their symmetric parts first; the affine
// map is then exact for the symmetrized kernels.
FactorizedQap to_qap(const SimilarityMatrix& x, const SimilarityMatrix& y,
                     const DistortionSpec& spec);

// Builds the factors for objective(pi) = sum a(i,k) b(pi(i),pi(k)) + constant
// from arbitrary symmetric a, b: shifts each to be nonnegative, scales each to
// max entry 1, and folds both adjustments into the affine map.
FactorizedQap make_factorized_qap(Matrix a, Matrix b, double constant);

void save_similarity(const std::filesystem::path& manifest_path, const SimilarityMatrix& s);
SimilarityMatrix load_similarity(const std::filesystem::path& manifest_path);

}  // namespace blindmatch
