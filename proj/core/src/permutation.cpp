#include "blindmatch/permutation.hpp"

#include <cmath>

#include "blindmatch/error.hpp"

namespace blindmatch {

Permutation identity_permutation(std::size_t n) {
  Permutation p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<int>(i);
  return p;
}

bool is_permutation(const Permutation& perm, std::size_t n) {
  if (perm.size() != n) return false;
  std::vector<char> seen(n, 0);
  for (int v : perm) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return true;
}

void require_permutation(const Permutation& perm, std::size_t n) {
  if (perm.size() != n)
    throw Error(ErrorCode::kSizeMismatch, "permutation has length " + std::to_string(perm.size()) +
                                              ", expected " + std::to_string(n));
  if (!is_permutation(perm, n)) throw Error(ErrorCode::kInvalidArgument, "not a permutation");
}

Permutation inverse(const Permutation& perm) {
  Permutation inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  return inv;
}

Permutation random_permutation(std::size_t n, Rng& rng) {
  Permutation p = identity_permutation(n);
  rng.shuffle(p);
  return p;
}

Permutation partial_shuffle(std::size_t n, double alpha, Rng& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "shuffle level must lie in [0, 1]");
  // Positions are drawn first so that, for a fixed stream, larger levels move
  // a superset of the positions moved by smaller ones.
  Permutation order = identity_permutation(n);
  rng.shuffle(order);
  const auto moved = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
  Permutation inner = identity_permutation(moved);
  rng.shuffle(inner);
  Permutation perm = identity_permutation(n);
  for (std::size_t t = 0; t < moved; ++t)
    perm[static_cast<std::size_t>(order[t])] = order[static_cast<std::size_t>(inner[t])];
  return perm;
}

int count_fixed_points(const Permutation& perm) {
  int count = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) count += perm[i] == static_cast<int>(i);
  return count;
}

}  // namespace blindmatch
