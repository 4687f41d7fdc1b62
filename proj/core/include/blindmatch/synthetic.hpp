#pragma once

#include <cstdint>

#include "blindmatch/embedding_store.hpp"
#include "blindmatch/kernels.hpp"
#include "blindmatch/matrix.hpp"
#include "blindmatch/random.hpp"

namespace blindmatch {

// Two labeled modalities sharing a latent class structure. Class c has a
// latent unit vector z_c in `latent_dim` dimensions; a sample of class c in
// modality m is normalize(R_m (z_c + modality_noise * a_{c,m} + sample_noise * b))
// with Gaussian a, b and an independent random rotation R_m of the padded
// `dim`-dimensional vector. Class order agrees across modalities.
struct CorrelatedConfig {
  int classes = 10;
  int per_class = 8;
  int latent_dim = 8;
  int dim = 32;
  double modality_noise = 0.05;
  double sample_noise = 0.2;
  std::uint64_t seed = 0;
};

struct ModalityPair {
  EmbeddingMatrix x;
  EmbeddingMatrix y;
};

ModalityPair make_correlated_modalities(const CorrelatedConfig& cfg);

// Independent draws of both modalities: no shared structure.
ModalityPair make_unrelated_modalities(const CorrelatedConfig& cfg);

// Well separated clusters: `points` holds per_class noisy samples around each
// unit center, `language` one row per class at a rotated copy of the centers.
struct BlobConfig {
  int classes = 6;
  int per_class = 30;
  int latent_dim = 6;
  int dim = 16;
  double spread = 0.02;
  std::uint64_t seed = 0;
};

ModalityPair make_blobs(const BlobConfig& cfg);

// Haar-distributed orthogonal matrix (Gram-Schmidt on a Gaussian matrix).
Matrix random_orthogonal(std::size_t d, Rng& rng);

// n rows of standard normal entries, each scaled to unit length.
Matrix gaussian_unit_vectors(std::size_t n, std::size_t d, Rng& rng);

// Ablation instance for two independent Gaussian sets:
//   cost(pi) = -(1/N^2) sum_{i,k} D_x(i,k) D_y(pi(i), pi(k))
// with D the pairwise Euclidean distances.
FactorizedQap gaussian_ablation_qap(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace blindmatch
