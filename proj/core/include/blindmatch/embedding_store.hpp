#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blindmatch/matrix.hpp"

namespace blindmatch {

// On-disk matrix format, version 1.
//
// A JSON manifest names a little-endian, row-major float32 blob:
//
//   {
//     "format": "blindmatch.matrix", "version": 1,
//     "n": 2, "d": 3, "dtype": "float32", "byte_order": "little",
//     "blob": "vision.f32",           // relative to the manifest directory
//     "checksum": "crc32:1a2b3c4d",   // CRC-32 (zlib) of the blob bytes
//     "labels": "vision.labels",      // optional, one integer per line
//     "modality": "vision",           // optional free text
//     "kind": "gw_distance", "k": 5   // optional, similarity matrices only
//   }
inline constexpr int kManifestVersion = 1;

struct Manifest {
  std::filesystem::path blob_path;  // resolved against the manifest directory
  std::size_t n = 0;
  std::size_t d = 0;
  std::string dtype = "float32";
  std::optional<std::filesystem::path> label_path;
  std::string checksum;
  std::string modality;
  std::optional<std::string> kind;
  std::optional<int> k;
};

struct EmbeddingMatrix {
  MatrixF data;
  std::optional<std::vector<int>> labels;
  std::string modality_tag;

  std::size_t n() const { return data.rows(); }
  std::size_t d() const { return data.cols(); }
  // Number of classes, 0 when unlabeled.
  int num_classes() const;
};

struct ClassPrototypes {
  Matrix data;                // one unit-norm row per class
  std::vector<int> class_ids;
  double subsample_fraction = 1.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return data.rows(); }
};

std::string crc32_hex(const void* bytes, std::size_t length);

Manifest read_manifest(const std::filesystem::path& manifest_path);

// Reads the raw matrix named by a manifest, verifying length and checksum.
MatrixF read_matrix_blob(const Manifest& manifest);

// Writes `<stem>.f32` (and labels when given) next to the manifest.
void write_matrix_file(const std::filesystem::path& manifest_path, const MatrixF& data,
                       const std::optional<std::vector<int>>& labels = std::nullopt,
                       const std::string& modality = {},
                       const std::optional<std::string>& kind = std::nullopt,
                       const std::optional<int>& k = std::nullopt);

// Rows come back in file order and are not normalized.
EmbeddingMatrix load_embeddings(const std::filesystem::path& manifest_path);
void save_embeddings(const std::filesystem::path& manifest_path, const EmbeddingMatrix& e);

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& e);

// Per class: draw max(1, floor(fraction * count)) rows without replacement,
// average them and re-normalize. Classes are emitted in ascending id order.
ClassPrototypes class_prototypes(const EmbeddingMatrix& e, double fraction, std::uint64_t seed);

// Same, restricted to `classes` (in the given order).
ClassPrototypes class_prototypes(const EmbeddingMatrix& e, double fraction, std::uint64_t seed,
                                 const std::vector<int>& classes);

// Treats each row of a dense matrix as its own class (row i -> class i).
ClassPrototypes prototypes_from_rows(const Matrix& rows);

}  // namespace blindmatch
