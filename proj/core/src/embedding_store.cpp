#include "blindmatch/embedding_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "blindmatch/error.hpp"
#include "blindmatch/random.hpp"
#include <nlohmann/json.hpp>

namespace blindmatch {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "matrix blobs are little-endian; add byte swapping for this host");

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<char> bytes(size);
  if (size > 0 && !in.read(bytes.data(), static_cast<std::streamsize>(size)))
    throw Error(ErrorCode::kIo, "short read on " + path.string());
  return bytes;
}

std::vector<int> read_labels(const fs::path& path, std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open label file " + path.string());
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedManifest, "bad label line '" + line + "'");
    }
  }
  if (labels.size() != expected)
    throw Error(ErrorCode::kShapeMismatch, "label count " + std::to_string(labels.size()) +
                                               " does not match n=" + std::to_string(expected));
  return labels;
}

void validate_labels(const std::vector<int>& labels) {
  if (labels.empty()) return;
  const int max_label = *std::max_element(labels.begin(), labels.end());
  std::vector<int> counts(static_cast<std::size_t>(std::max(max_label + 1, 0)), 0);
  for (int l : labels) {
    if (l < 0) throw Error(ErrorCode::kInvalidArgument, "negative class label");
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0)
      throw Error(ErrorCode::kInvalidArgument,
                  "labels must cover 0..L-1; class " + std::to_string(c) + " is empty");
}

fs::path sibling(const fs::path& manifest_path, const std::string& suffix) {
  fs::path p = manifest_path;
  p.replace_extension(suffix);
  return p;
}

}  // namespace

int EmbeddingMatrix::num_classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

std::string crc32_hex(const void* bytes, std::size_t length) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = static_cast<const Bytef*>(bytes);
  // zlib takes uInt lengths; feed large blobs in chunks.
  while (length > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(length, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    length -= chunk;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return std::string("crc32:") + buf;
}

Manifest read_manifest(const fs::path& manifest_path) {
  if (!fs::exists(manifest_path))
    throw Error(ErrorCode::kMissingFile, "manifest not found: " + manifest_path.string());
  std::ifstream in(manifest_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, manifest_path.string() + ": " + e.what());
  }
  Manifest m;
  const fs::path dir = manifest_path.parent_path();
  try {
    if (j.value("format", std::string("blindmatch.matrix")) != "blindmatch.matrix")
      throw Error(ErrorCode::kMalformedManifest, "unknown format tag");
    if (j.value("version", kManifestVersion) > kManifestVersion)
      throw Error(ErrorCode::kMalformedManifest, "manifest version too new");
    m.n = j.at("n").get<std::size_t>();
    m.d = j.at("d").get<std::size_t>();
    m.dtype = j.value("dtype", std::string("float32"));
    if (j.value("byte_order", std::string("little")) != "little")
      throw Error(ErrorCode::kMalformedManifest, "only little-endian blobs are supported");
    m.blob_path = dir / j.at("blob").get<std::string>();
    m.checksum = j.value("checksum", std::string());
    if (j.contains("labels") && !j["labels"].is_null())
      m.label_path = dir / j["labels"].get<std::string>();
    m.modality = j.value("modality", std::string());
    if (j.contains("kind") && !j["kind"].is_null()) m.kind = j["kind"].get<std::string>();
    if (j.contains("k") && !j["k"].is_null()) m.k = j["k"].get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, manifest_path.string() + ": " + e.what());
  }
  if (m.dtype != "float32")
    throw Error(ErrorCode::kMalformedManifest, "unsupported dtype " + m.dtype);
  if (m.n == 0 || m.d == 0) throw Error(ErrorCode::kShapeMismatch, "n and d must be >= 1");
  return m;
}

MatrixF read_matrix_blob(const Manifest& m) {
  const std::vector<char> bytes = read_bytes(m.blob_path);
  if (bytes.size() != m.n * m.d * sizeof(float))
    throw Error(ErrorCode::kShapeMismatch,
                "blob has " + std::to_string(bytes.size()) + " bytes, expected n*d*4 = " +
                    std::to_string(m.n * m.d * sizeof(float)));
  if (!m.checksum.empty() && crc32_hex(bytes.data(), bytes.size()) != m.checksum)
    throw Error(ErrorCode::kChecksumMismatch, m.blob_path.string());
  MatrixF data(m.n, m.d);
  std::copy_n(bytes.data(), bytes.size(), reinterpret_cast<char*>(data.data()));
  for (std::size_t i = 0; i < data.size(); ++i)
    if (!std::isfinite(data.data()[i]))
      throw Error(ErrorCode::kNonFinite, "entry " + std::to_string(i) + " of " +
                                             m.blob_path.string() + " is not finite");
  return data;
}

void write_matrix_file(const fs::path& manifest_path, const MatrixF& data,
                       const std::optional<std::vector<int>>& labels, const std::string& modality,
                       const std::optional<std::string>& kind, const std::optional<int>& k) {
  const fs::path blob = sibling(manifest_path, ".f32");
  {
    std::ofstream out(blob, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + blob.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
  }
  json j = {{"format", "blindmatch.matrix"},
            {"version", kManifestVersion},
            {"n", data.rows()},
            {"d", data.cols()},
            {"dtype", "float32"},
            {"byte_order", "little"},
            {"blob", blob.filename().string()},
            {"checksum", crc32_hex(data.data(), data.size() * sizeof(float))}};
  if (labels) {
    const fs::path label_file = sibling(manifest_path, ".labels");
    std::ofstream out(label_file, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + label_file.string());
    for (int l : *labels) out << l << '\n';
    j["labels"] = label_file.filename().string();
  }
  if (!modality.empty()) j["modality"] = modality;
  if (kind) j["kind"] = *kind;
  if (k) j["k"] = *k;
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + manifest_path.string());
  out << j.dump(2) << '\n';
}

EmbeddingMatrix load_embeddings(const fs::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  EmbeddingMatrix e;
  e.data = read_matrix_blob(m);
  e.modality_tag = m.modality;
  if (m.label_path) {
    e.labels = read_labels(*m.label_path, m.n);
    validate_labels(*e.labels);
  }
  return e;
}

void save_embeddings(const fs::path& manifest_path, const EmbeddingMatrix& e) {
  write_matrix_file(manifest_path, e.data, e.labels, e.modality_tag);
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& e) {
  EmbeddingMatrix out = e;
  for (std::size_t i = 0; i < out.n(); ++i) {
    auto row = out.data.row(i);
    double sq = 0.0;
    for (float v : row) sq += static_cast<double>(v) * v;
    const double norm = std::sqrt(sq);
    if (norm < 1e-12) throw Error(ErrorCode::kZeroRow, "row " + std::to_string(i) + " has zero norm");
    for (float& v : row) v = static_cast<float>(v / norm);
  }
  return out;
}

ClassPrototypes class_prototypes(const EmbeddingMatrix& e, double fraction, std::uint64_t seed) {
  if (!e.labels) throw Error(ErrorCode::kUnlabeled, "class prototypes need labelled embeddings");
  std::vector<int> classes(static_cast<std::size_t>(e.num_classes()));
  for (std::size_t c = 0; c < classes.size(); ++c) classes[c] = static_cast<int>(c);
  return class_prototypes(e, fraction, seed, classes);
}

ClassPrototypes class_prototypes(const EmbeddingMatrix& e, double fraction, std::uint64_t seed,
                                 const std::vector<int>& classes) {
  if (!e.labels) throw Error(ErrorCode::kUnlabeled, "class prototypes need labelled embeddings");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "fraction must lie in (0, 1]");
  const int num_classes = e.num_classes();
  std::vector<std::vector<int>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < e.n(); ++i)
    members[static_cast<std::size_t>((*e.labels)[i])].push_back(static_cast<int>(i));

  ClassPrototypes out;
  out.data = Matrix(classes.size(), e.d(), 0.0);
  out.class_ids = classes;
  out.subsample_fraction = fraction;
  out.seed = seed;
  const Rng base(seed);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const int cls = classes[c];
    if (cls < 0 || cls >= num_classes)
      throw Error(ErrorCode::kInvalidArgument, "unknown class " + std::to_string(cls));
    const auto& rows = members[static_cast<std::size_t>(cls)];
    const int count = static_cast<int>(rows.size());
    const int take = std::max(1, static_cast<int>(std::floor(fraction * count)));
    std::vector<int> picked;
    if (take == count) {
      picked = rows;  // seed-independent when everything is kept
    } else {
      Rng rng = base.fork(static_cast<std::uint64_t>(cls));
      for (int idx : rng.sample_without_replacement(count, take))
        picked.push_back(rows[static_cast<std::size_t>(idx)]);
      std::sort(picked.begin(), picked.end());
    }
    auto proto = out.data.row(c);
    for (int r : picked) {
      const auto src = e.data.row(static_cast<std::size_t>(r));
      for (std::size_t j = 0; j < e.d(); ++j) proto[j] += src[j];
    }
    double sq = 0.0;
    for (double& v : proto) {
      v /= static_cast<double>(picked.size());
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm < 1e-12)
      throw Error(ErrorCode::kZeroRow, "class " + std::to_string(cls) + " averages to zero");
    for (double& v : proto) v /= norm;
  }
  return out;
}

ClassPrototypes prototypes_from_rows(const Matrix& rows) {
  ClassPrototypes out;
  out.data = rows;
  out.class_ids.resize(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) out.class_ids[i] = static_cast<int>(i);
  return out;
}

}  // namespace blindmatch
