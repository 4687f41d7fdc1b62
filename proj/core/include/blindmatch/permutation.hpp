#pragma once

#include <cstddef>
#include <vector>

#include "blindmatch/random.hpp"

namespace blindmatch {

// perm[i] = j maps item i of the first modality to item j of the second.
using Permutation = std::vector<int>;

Permutation identity_permutation(std::size_t n);
bool is_permutation(const Permutation& perm, std::size_t n);
void require_permutation(const Permutation& perm, std::size_t n);
Permutation inverse(const Permutation& perm);
Permutation random_permutation(std::size_t n, Rng& rng);

// Picks floor(alpha * n) positions uniformly and permutes them uniformly among
// themselves; every other position is a fixed point.
Permutation partial_shuffle(std::size_t n, double alpha, Rng& rng);

int count_fixed_points(const Permutation& perm);

}  // namespace blindmatch
