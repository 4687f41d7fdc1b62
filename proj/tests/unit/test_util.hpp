#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "blindmatch/embedding_store.hpp"
#include "blindmatch/error.hpp"
#include "blindmatch/kernels.hpp"
#include "blindmatch/matrix.hpp"
#include "blindmatch/permutation.hpp"
#include "blindmatch/random.hpp"

namespace bmtest {

using namespace blindmatch;

// Code of the blindmatch::Error raised by fn, or nullopt when it returns.
template <class Fn>
std::optional<ErrorCode> error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline Matrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

inline Matrix symmetric_matrix(std::size_t n, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(lo, hi);
  return m;
}

// Random prototypes: n unit rows in d dimensions.
inline ClassPrototypes random_prototypes(std::size_t n, std::size_t d, Rng& rng) {
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      m(i, t) = rng.normal();
      norm += m(i, t) * m(i, t);
    }
    for (std::size_t t = 0; t < d; ++t) m(i, t) /= std::sqrt(norm);
  }
  return prototypes_from_rows(m);
}

inline FactorizedQap random_qap(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return make_factorized_qap(symmetric_matrix(n, rng), symmetric_matrix(n, rng), 0.0);
}

// Calls fn on every permutation of 0..n-1 in lexicographic order.
template <class Fn>
void for_each_permutation(std::size_t n, Fn&& fn) {
  Permutation p = identity_permutation(n);
  do fn(p);
  while (std::next_permutation(p.begin(), p.end()));
}

inline double brute_force_lap(const Matrix& c) {
  double best = std::numeric_limits<double>::infinity();
  for_each_permutation(c.rows(), [&](const Permutation& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += c(i, static_cast<std::size_t>(p[i]));
    best = std::min(best, s);
  });
  return best;
}

// Minimum of the double-loop distortion over all permutations.
inline double brute_force_distortion(const SimilarityMatrix& x, const SimilarityMatrix& y, const DistortionSpec& spec) {
  double best = std::numeric_limits<double>::infinity();
  for_each_permutation(x.size(), [&](const Permutation& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t k = 0; k < p.size(); ++k)
        s += spec.loss(x.values(i, k), y.values(static_cast<std::size_t>(p[i]), static_cast<std::size_t>(p[k])));
    best = std::min(best, s);
  });
  return best;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("blindmatch_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace bmtest
