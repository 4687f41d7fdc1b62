#include "blindmatch/synthetic.hpp"

#include <cmath>

#include "blindmatch/error.hpp"

namespace blindmatch {
namespace {

void check(const CorrelatedConfig& cfg) {
  if (cfg.classes < 1 || cfg.per_class < 1 || cfg.latent_dim < 1 || cfg.dim < cfg.latent_dim)
    throw Error(ErrorCode::kInvalidConfig, "invalid synthetic generator sizes");
  if (cfg.modality_noise < 0.0 || cfg.sample_noise < 0.0)
    throw Error(ErrorCode::kInvalidConfig, "noise levels must be >= 0");
}

std::vector<double> unit_gaussian(std::size_t d, Rng& rng) {
  std::vector<double> v(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm <= 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

// out_row = normalize(R * v) with v zero-padded to R's size.
void emit(const Matrix& r, const std::vector<double>& v, std::span<float> out) {
  const std::size_t d = r.rows();
  std::vector<double> w(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t t = 0; t < v.size(); ++t) w[i] += r(i, t) * v[t];
  double norm = 0.0;
  for (double x : w) norm += x * x;
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < d; ++i) out[i] = static_cast<float>(w[i] / norm);
}

EmbeddingMatrix sample_modality(const CorrelatedConfig& cfg, const std::vector<std::vector<double>>& latent,
                                Rng& rng, const char* tag) {
  const auto d = static_cast<std::size_t>(cfg.dim);
  const auto ld = static_cast<std::size_t>(cfg.latent_dim);
  const Matrix rot = random_orthogonal(d, rng);
  EmbeddingMatrix e;
  e.data = MatrixF(static_cast<std::size_t>(cfg.classes * cfg.per_class), d);
  e.labels = std::vector<int>();
  e.modality_tag = tag;
  std::size_t row = 0;
  for (int c = 0; c < cfg.classes; ++c) {
    std::vector<double> centre = latent[static_cast<std::size_t>(c)];
    for (std::size_t t = 0; t < ld; ++t) centre[t] += cfg.modality_noise * rng.normal();
    for (int s = 0; s < cfg.per_class; ++s) {
      std::vector<double> v = centre;
      for (std::size_t t = 0; t < ld; ++t) v[t] += cfg.sample_noise * rng.normal();
      emit(rot, v, e.data.row(row++));
      e.labels->push_back(c);
    }
  }
  return e;
}

}  // namespace

Matrix random_orthogonal(std::size_t d, Rng& rng) {
  Matrix q(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> v(d);
    double norm = 0.0;
    do {
      for (double& x : v) x = rng.normal();
      for (std::size_t p = 0; p < c; ++p) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += q(i, p) * v[i];
        for (std::size_t i = 0; i < d; ++i) v[i] -= dot * q(i, p);
      }
      norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
    } while (norm < 1e-8);
    for (std::size_t i = 0; i < d; ++i) q(i, c) = v[i] / norm;
  }
  return q;
}

Matrix gaussian_unit_vectors(std::size_t n, std::size_t d, Rng& rng) {
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = unit_gaussian(d, rng);
    std::copy(v.begin(), v.end(), m.row(i).begin());
  }
  return m;
}

ModalityPair make_correlated_modalities(const CorrelatedConfig& cfg) {
  check(cfg);
  Rng root(cfg.seed);
  Rng latent_rng = root.fork(0);
  std::vector<std::vector<double>> latent;
  for (int c = 0; c < cfg.classes; ++c) latent.push_back(unit_gaussian(static_cast<std::size_t>(cfg.latent_dim), latent_rng));
  Rng rx = root.fork(1);
  Rng ry = root.fork(2);
  return {sample_modality(cfg, latent, rx, "x"), sample_modality(cfg, latent, ry, "y")};
}

ModalityPair make_unrelated_modalities(const CorrelatedConfig& cfg) {
  check(cfg);
  Rng root(cfg.seed);
  auto latent_for = [&](std::uint64_t stream) {
    Rng r = root.fork(stream);
    std::vector<std::vector<double>> latent;
    for (int c = 0; c < cfg.classes; ++c) latent.push_back(unit_gaussian(static_cast<std::size_t>(cfg.latent_dim), r));
    return latent;
  };
  const auto lx = latent_for(10);
  const auto ly = latent_for(11);
  Rng rx = root.fork(1);
  Rng ry = root.fork(2);
  return {sample_modality(cfg, lx, rx, "x"), sample_modality(cfg, ly, ry, "y")};
}

ModalityPair make_blobs(const BlobConfig& cfg) {
  if (cfg.classes < 1 || cfg.per_class < 1 || cfg.latent_dim < 1 || cfg.dim < cfg.latent_dim || cfg.spread < 0.0)
    throw Error(ErrorCode::kInvalidConfig, "invalid blob generator settings");
  const auto d = static_cast<std::size_t>(cfg.dim);
  const auto ld = static_cast<std::size_t>(cfg.latent_dim);
  Rng root(cfg.seed);
  Rng cr = root.fork(0);
  std::vector<std::vector<double>> centres;
  for (int c = 0; c < cfg.classes; ++c) centres.push_back(unit_gaussian(ld, cr));

  Rng pr = root.fork(1);
  const Matrix rot_x = random_orthogonal(d, pr);
  ModalityPair out;
  out.x.data = MatrixF(static_cast<std::size_t>(cfg.classes * cfg.per_class), d);
  out.x.labels = std::vector<int>();
  out.x.modality_tag = "points";
  std::size_t row = 0;
  for (int c = 0; c < cfg.classes; ++c)
    for (int s = 0; s < cfg.per_class; ++s) {
      std::vector<double> v = centres[static_cast<std::size_t>(c)];
      for (double& t : v) t += cfg.spread * pr.normal();
      emit(rot_x, v, out.x.data.row(row++));
      out.x.labels->push_back(c);
    }

  Rng lr = root.fork(2);
  const Matrix rot_y = random_orthogonal(d, lr);
  out.y.data = MatrixF(static_cast<std::size_t>(cfg.classes), d);
  out.y.labels = std::vector<int>();
  out.y.modality_tag = "language";
  for (int c = 0; c < cfg.classes; ++c) {
    emit(rot_y, centres[static_cast<std::size_t>(c)], out.y.data.row(static_cast<std::size_t>(c)));
    out.y.labels->push_back(c);
  }
  return out;
}

FactorizedQap gaussian_ablation_qap(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 2 || d < 1) throw Error(ErrorCode::kInvalidArgument, "ablation needs N >= 2 and d >= 1");
  Rng root(seed);
  Rng rx = root.fork(0);
  Rng ry = root.fork(1);
  const Matrix x = gaussian_unit_vectors(n, d, rx);
  const Matrix y = gaussian_unit_vectors(n, d, ry);
  auto distances = [n](const Matrix& p) {
    Matrix dm(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = i + 1; k < n; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t < p.cols(); ++t) {
          const double diff = p(i, t) - p(k, t);
          s += diff * diff;
        }
        dm(i, k) = dm(k, i) = std::sqrt(s);
      }
    return dm;
  };
  Matrix a = distances(x);
  const double scale = -1.0 / static_cast<double>(n * n);
  for (auto& v : a.values()) v *= scale;
  return make_factorized_qap(std::move(a), distances(y), 0.0);
}

}  // namespace blindmatch
