#include "blindmatch/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blindmatch/error.hpp"
#include "blindmatch/random.hpp"

namespace blindmatch {
namespace {

void require_at_least_two(const ClassPrototypes& p) {
  if (p.size() < 2) throw Error(ErrorCode::kInvalidArgument, "kernels need at least two prototypes");
}

Matrix gram(const ClassPrototypes& p) {
  const std::size_t n = p.size();
  Matrix g(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = p.data.row(i);
    for (std::size_t j = i; j < n; ++j) {
      const auto xj = p.data.row(j);
      double dot = 0.0;
      for (std::size_t t = 0; t < xi.size(); ++t) dot += xi[t] * xj[t];
      g(i, j) = dot;
      g(j, i) = dot;
    }
  }
  return g;
}

// C G C with C = I - 11^T / N.
Matrix double_center(const Matrix& g) {
  const std::size_t n = g.rows();
  std::vector<double> row_mean(n, 0.0);
  std::vector<double> col_mean(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      row_mean[i] += g(i, j);
      col_mean[j] += g(i, j);
      total += g(i, j);
    }
  const double inv = 1.0 / static_cast<double>(n);
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = g(i, j) - row_mean[i] * inv - col_mean[j] * inv + total * inv * inv;
  return out;
}

Matrix symmetric_part(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = 0.5 * (m(i, j) + m(j, i));
  return out;
}

void require_compatible(const SimilarityMatrix& x, const SimilarityMatrix& y,
                        const DistortionSpec& spec) {
  if (x.size() != y.size() || !x.values.is_square() || !y.values.is_square())
    throw Error(ErrorCode::kSizeMismatch, "similarity matrices must be square and of equal size");
  if (!spec.accepts(x.kind) || !spec.accepts(y.kind))
    throw Error(ErrorCode::kKindMismatch,
                std::string(to_string(spec.kind)) + " cannot score " +
                    std::string(to_string(x.kind)) + " / " + std::string(to_string(y.kind)));
}

}  // namespace

std::string_view to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::kGwDistance: return "gw_distance";
    case KernelKind::kCka: return "cka";
    case KernelKind::kMutualKnn: return "mutual_knn";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "gw_distance" || name == "gw") return KernelKind::kGwDistance;
  if (name == "cka") return KernelKind::kCka;
  if (name == "mutual_knn" || name == "knn") return KernelKind::kMutualKnn;
  throw Error(ErrorCode::kInvalidArgument, "unknown kernel kind '" + std::string(name) + "'");
}

std::string_view to_string(DistortionKind kind) noexcept {
  return kind == DistortionKind::kSquaredDiff ? "squared_diff" : "neg_inner";
}

DistortionKind parse_distortion_kind(std::string_view name) {
  if (name == "squared_diff") return DistortionKind::kSquaredDiff;
  if (name == "neg_inner") return DistortionKind::kNegInner;
  throw Error(ErrorCode::kInvalidArgument, "unknown distortion '" + std::string(name) + "'");
}

DistortionSpec DistortionSpec::for_kernel(KernelKind kind) {
  return kind == KernelKind::kGwDistance ? squared_diff() : neg_inner();
}

double DistortionSpec::loss(double a, double b) const {
  return kind == DistortionKind::kSquaredDiff ? (a - b) * (a - b) : -a * b;
}
double DistortionSpec::f1(double a) const { return kind == DistortionKind::kSquaredDiff ? a * a : 0.0; }
double DistortionSpec::f2(double b) const { return kind == DistortionKind::kSquaredDiff ? b * b : 0.0; }
double DistortionSpec::h1(double a) const { return kind == DistortionKind::kSquaredDiff ? 2.0 * a : a; }
double DistortionSpec::h2(double b) const { return b; }

bool DistortionSpec::accepts(KernelKind k) const {
  return kind == DistortionKind::kSquaredDiff ? k == KernelKind::kGwDistance
                                              : k != KernelKind::kGwDistance;
}

double FactorizedQap::objective(const Permutation& perm) const {
  const std::size_t n = size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = c1.row(i).data();
    const double* b = c2.row(static_cast<std::size_t>(perm[i])).data();
    double row = 0.0;
    for (std::size_t k = 0; k < n; ++k) row += a[k] * b[perm[k]];
    total += row;
  }
  return total;
}

double FactorizedQap::relaxed_objective(const Matrix& s) const {
  // <c1, S c2 S^T>
  const Matrix sc2 = multiply(s, c2);
  const Matrix quad = multiply(sc2, s.transposed());
  return frobenius_inner(c1, quad);
}

SimilarityMatrix gw_kernel(const ClassPrototypes& p) {
  require_at_least_two(p);
  const std::size_t n = p.size();
  SimilarityMatrix out{Matrix(n, n, 0.0), KernelKind::kGwDistance, std::nullopt};
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = p.data.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto xj = p.data.row(j);
      double sq = 0.0;
      for (std::size_t t = 0; t < xi.size(); ++t) {
        const double diff = xi[t] - xj[t];
        sq += diff * diff;
      }
      out.values(i, j) = out.values(j, i) = std::sqrt(sq);
    }
  }
  return out;
}

SimilarityMatrix mutual_knn_kernel(const ClassPrototypes& p, int k) {
  require_at_least_two(p);
  const int n = static_cast<int>(p.size());
  if (k < 1 || k > n - 1)
    throw Error(ErrorCode::kInvalidArgument,
                "k must lie in [1, N-1]; got k=" + std::to_string(k) + " for N=" + std::to_string(n));
  const Matrix g = gram(p);
  const double weight = 1.0 / std::sqrt(static_cast<double>(n) * k);
  SimilarityMatrix out{Matrix(p.size(), p.size(), 0.0), KernelKind::kMutualKnn, k};
  std::vector<int> order;
  for (int i = 0; i < n; ++i) {
    order.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    // Highest inner product first; ties go to the lower index.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return g(static_cast<std::size_t>(i), static_cast<std::size_t>(a)) >
             g(static_cast<std::size_t>(i), static_cast<std::size_t>(b));
    });
    for (int t = 0; t < k; ++t)
      out.values(static_cast<std::size_t>(i), static_cast<std::size_t>(order[static_cast<std::size_t>(t)])) = weight;
  }
  return out;
}

SimilarityMatrix cka_kernel(const ClassPrototypes& p) {
  require_at_least_two(p);
  Matrix centered = double_center(gram(p));
  const double norm_sq = frobenius_inner(centered, centered);  // tr(G C G C)
  if (norm_sq <= 1e-12)
    throw Error(ErrorCode::kSingularKernel, "centered Gram matrix vanishes (identical prototypes?)");
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : centered.values()) v *= inv;
  return SimilarityMatrix{std::move(centered), KernelKind::kCka, std::nullopt};
}

SimilarityMatrix build_kernel(const ClassPrototypes& p, KernelKind kind, int knn_k) {
  switch (kind) {
    case KernelKind::kGwDistance: return gw_kernel(p);
    case KernelKind::kCka: return cka_kernel(p);
    case KernelKind::kMutualKnn: return mutual_knn_kernel(p, knn_k);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown kernel kind");
}

double linear_cka(const ClassPrototypes& x, const ClassPrototypes& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kSizeMismatch, "prototype counts differ");
  const Matrix gx = gram(x);
  const Matrix gy = gram(y);
  const std::size_t n = x.size();
  const Matrix c = [&] {
    Matrix m(n, n, -1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
    return m;
  }();
  const Matrix xc = multiply(gx, c);
  const Matrix yc = multiply(gy, c);
  auto trace_of_product = [](const Matrix& a, const Matrix& b) {
    double t = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
    return t;
  };
  const double xy = trace_of_product(xc, yc);
  const double xx = trace_of_product(xc, xc);
  const double yy = trace_of_product(yc, yc);
  if (xx <= 1e-12 || yy <= 1e-12)
    throw Error(ErrorCode::kSingularKernel, "centered Gram matrix vanishes");
  return xy / std::sqrt(xx * yy);
}

double distortion(const SimilarityMatrix& x, const SimilarityMatrix& y, const DistortionSpec& spec,
                  const Permutation& perm) {
  require_compatible(x, y, spec);
  require_permutation(perm, x.size());
  const std::size_t n = x.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto pi = static_cast<std::size_t>(perm[i]);
    for (std::size_t j = 0; j < n; ++j)
      total += spec.loss(x.values(i, j), y.values(pi, static_cast<std::size_t>(perm[j])));
  }
  return total;
}

SimilarityMatrix permuted(const SimilarityMatrix& y, const Permutation& perm) {
  require_permutation(perm, y.size());
  SimilarityMatrix out = y;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      out.values(i, j) = y.values(static_cast<std::size_t>(perm[i]), static_cast<std::size_t>(perm[j]));
  return out;
}

std::vector<double> default_shuffle_levels() {
  std::vector<double> levels(21);
  for (int i = 0; i <= 20; ++i) levels[static_cast<std::size_t>(i)] = i / 20.0;
  return levels;
}

std::vector<ShufflePoint> shuffle_curve(const SimilarityMatrix& x, const SimilarityMatrix& y,
                                        const DistortionSpec& spec,
                                        const std::vector<double>& levels, int n_seeds,
                                        std::uint64_t base_seed) {
  require_compatible(x, y, spec);
  if (n_seeds < 1) throw Error(ErrorCode::kInvalidArgument, "n_seeds must be >= 1");
  for (double a : levels)
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "levels must lie in [0, 1]");
  const Rng base(base_seed);
  std::vector<ShufflePoint> curve;
  curve.reserve(levels.size());
  std::vector<double> samples(static_cast<std::size_t>(n_seeds));
  for (double alpha : levels) {
    for (int s = 0; s < n_seeds; ++s) {
      Rng rng = base.fork(static_cast<std::uint64_t>(s));
      samples[static_cast<std::size_t>(s)] =
          distortion(x, y, spec, partial_shuffle(x.size(), alpha, rng));
    }
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n_seeds;
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    curve.push_back({alpha, mean, std::sqrt(var / n_seeds)});
  }
  return curve;
}

std::pair<SimilarityMatrix, SimilarityMatrix> standardize_gw(const SimilarityMatrix& x,
                                                             const SimilarityMatrix& y) {
  if (x.kind != KernelKind::kGwDistance || y.kind != KernelKind::kGwDistance)
    throw Error(ErrorCode::kKindMismatch, "standardization applies to GW distances only");
  auto scaled = [](SimilarityMatrix m) {
    const double hi = *std::max_element(m.values.values().begin(), m.values.values().end());
    if (hi > 0.0)
      for (double& v : m.values.values()) v /= hi;
    return m;
  };
  return {scaled(x), scaled(y)};
}

FactorizedQap to_qap(const SimilarityMatrix& x, const SimilarityMatrix& y,
                     const DistortionSpec& spec) {
  require_compatible(x, y, spec);
  const std::size_t n = x.size();
  for (const SimilarityMatrix* m : {&x, &y})
    if (m->kind != KernelKind::kMutualKnn && max_asymmetry(m->values) > 1e-6)
      throw Error(ErrorCode::kAsymmetric,
                  std::string(to_string(m->kind)) + " kernel is not symmetric");

  const Matrix xs = symmetric_part(x.values);
  const Matrix ys = symmetric_part(y.values);

  // distortion(pi) = sum f1(X) + sum f2(Y) + sum_{ik} (-h1(X_ik)) h2(Y_{pi(i) pi(k)})
  double constant = 0.0;
  Matrix a(n, n);
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      constant += spec.f1(xs(i, j)) + spec.f2(ys(i, j));
      a(i, j) = -spec.h1(xs(i, j));
      b(i, j) = spec.h2(ys(i, j));
    }
  FactorizedQap qap = make_factorized_qap(a, b, constant);
  if (spec.kind != DistortionKind::kSquaredDiff) return qap;

  // l = f1 + f2 + a b with a = amax a' + amin, b = bmax b' + bmin, so
  // l / s = a'b' + p1 + p2 where s = amax bmax is the affine scale.
  const double amin = *std::min_element(a.values().begin(), a.values().end());
  const double bmin = *std::min_element(b.values().begin(), b.values().end());
  const double s = qap.affine_scale;
  qap.p1 = Matrix(n, n);
  qap.p2 = Matrix(n, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      qap.p1(i, k) = (spec.f1(xs(i, k)) + bmin * (a(i, k) - amin)) / s;
      qap.p2(i, k) = (spec.f2(ys(i, k)) + amin * (b(i, k) - bmin) + amin * bmin) / s;
      total += qap.p1(i, k) + qap.p2(i, k);
    }
  qap.pair_constant = total;
  return qap;
}

FactorizedQap make_factorized_qap(Matrix a, Matrix b, double constant) {
  if (!a.is_square() || !b.is_square() || a.rows() != b.rows())
    throw Error(ErrorCode::kSizeMismatch, "QAP factors must be square and of equal size");
  if (max_asymmetry(a) > 1e-9 || max_asymmetry(b) > 1e-9)
    throw Error(ErrorCode::kAsymmetric, "QAP factors must be symmetric");
  const auto n = static_cast<double>(a.rows());
  const double amin = *std::min_element(a.values().begin(), a.values().end());
  const double bmin = *std::min_element(b.values().begin(), b.values().end());
  for (double& v : a.values()) v -= amin;
  for (double& v : b.values()) v -= bmin;
  // sum A B = sum A'B' + bmin sum A' + amin sum B' + N^2 amin bmin
  const double offset = constant + bmin * sum_entries(a) + amin * sum_entries(b) + n * n * amin * bmin;
  double amax = *std::max_element(a.values().begin(), a.values().end());
  double bmax = *std::max_element(b.values().begin(), b.values().end());
  if (amax <= 0.0) amax = 1.0;
  if (bmax <= 0.0) bmax = 1.0;
  for (double& v : a.values()) v /= amax;
  for (double& v : b.values()) v /= bmax;
  FactorizedQap out;
  out.c1 = std::move(a);
  out.c2 = std::move(b);
  out.affine_scale = amax * bmax;
  out.affine_offset = offset;
  return out;
}

void save_similarity(const std::filesystem::path& manifest_path, const SimilarityMatrix& s) {
  MatrixF f(s.values.rows(), s.values.cols());
  for (std::size_t i = 0; i < s.values.size(); ++i) f.data()[i] = static_cast<float>(s.values.data()[i]);
  write_matrix_file(manifest_path, f, std::nullopt, "similarity", std::string(to_string(s.kind)), s.k);
}

SimilarityMatrix load_similarity(const std::filesystem::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  if (m.n != m.d) throw Error(ErrorCode::kShapeMismatch, "similarity matrices must be square");
  if (!m.kind) throw Error(ErrorCode::kMalformedManifest, "similarity manifest lacks 'kind'");
  const MatrixF f = read_matrix_blob(m);
  SimilarityMatrix s{Matrix(m.n, m.n), parse_kernel_kind(*m.kind), m.k};
  for (std::size_t i = 0; i < f.size(); ++i) s.values.data()[i] = f.data()[i];
  return s;
}

}  // namespace blindmatch
