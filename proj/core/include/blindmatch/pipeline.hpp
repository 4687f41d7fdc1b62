#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blindmatch/embedding_store.hpp"
#include "blindmatch/kernels.hpp"
#include "blindmatch/kmeans.hpp"
#include "blindmatch/permutation.hpp"
#include "blindmatch/qap.hpp"
#include "blindmatch/subset.hpp"
#include "blindmatch/synthetic.hpp"

namespace blindmatch {

std::string_view library_version() noexcept;

enum class ExperimentKind { kShuffle, kSmallScale, kLargerScale, kSolverBench, kUnsupClassify };
std::string_view to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment_kind(std::string_view name);

// Data generated in-process instead of read from manifests.
struct SyntheticSource {
  enum class Kind { kCorrelated, kUnrelated, kBlobs } kind = Kind::kCorrelated;
  CorrelatedConfig correlated;
  BlobConfig blobs;
};

struct SolverSettings {
  // enumeration | hahn_grant | hahn_grant_auction | faq | 2opt |
  // primal_heuristic | entropic_gw | random
  std::string name = "hahn_grant";
  HahnGrantConfig hahn_grant;
  int faq_seeds = 100;
  EntropicGwOptions entropic_gw;
};

struct SubsetSettings {
  std::vector<std::size_t> sizes;
  std::size_t top_m = 10;
  SubsetMode mode = SubsetMode::kHeuristic;
  SubsetSearchConfig search;
};

struct ShuffleSettings {
  std::vector<KernelKind> kernels{KernelKind::kGwDistance, KernelKind::kCka, KernelKind::kMutualKnn};
  std::vector<double> levels = default_shuffle_levels();
  int seeds = 100;
};

// Ground truth convention: both modalities list classes in the same order, so
// class c of X corresponds to class c of Y and the true matching is the identity.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSmallScale;
  std::filesystem::path x_manifest;
  std::filesystem::path y_manifest;
  std::optional<SyntheticSource> synthetic;

  KernelKind kernel = KernelKind::kGwDistance;
  int knn_k = 5;
  std::optional<DistortionKind> distortion;  // default pairs with the kernel

  std::vector<int> classes;               // explicit class ids; empty = first num_classes
  std::optional<std::size_t> num_classes;  // empty = all classes
  double fraction = 0.5;
  std::vector<std::uint64_t> seeds{0};

  SolverSettings solver;
  std::vector<std::string> solvers;  // solver_bench
  SubsetSettings subset;             // larger_scale
  ShuffleSettings shuffle;           // shuffle
  int kmeans_init = 100;             // unsup_classify
  int workers = 1;

  DistortionSpec spec() const;
  void validate() const;
};

// Parses the JSON config; relative manifest paths resolve against base_dir.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Both modalities, rows normalized, labels checked to cover the same classes.
ModalityPair load_modalities(const ExperimentConfig& cfg);

// Fraction of positions where perm and gt agree.
double matching_accuracy(const Permutation& perm, const Permutation& gt);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t count = 0;
};
Aggregate aggregate(const std::vector<double>& values);

struct MatchRow {
  std::uint64_t seed = 0;
  std::size_t size = 0;
  int subset_index = -1;
  std::vector<int> classes;
  std::string solver;
  Permutation perm;
  double accuracy = 0.0;
  double cost = 0.0;
  double dual_bound = 0.0;
  double gap = 0.0;  // qap units
  bool converged = false;
  bool global = false;
  double wall_time = 0.0;
  std::string error;  // non-empty when the solver failed
  std::vector<HistoryEntry> history;
};

struct MatchReport {
  ExperimentKind kind = ExperimentKind::kSmallScale;
  std::vector<MatchRow> rows;
  Aggregate accuracy;
  Aggregate cost;
};

struct SolverSummary {
  std::string solver;
  Aggregate accuracy;
  Aggregate cost;
  double global_frequency = 0.0;
  std::size_t failures = 0;
};

struct BenchmarkTable {
  std::vector<MatchRow> rows;  // seed-major, solvers in config order
  std::vector<SolverSummary> summary;
  bool optimum_known = false;  // enumeration available
};

struct UnsupRow {
  std::uint64_t seed = 0;
  Permutation cluster_to_class;
  Permutation oracle_cluster_to_class;
  double blind_accuracy = 0.0;
  double oracle_accuracy = 0.0;
  double agreement = 0.0;  // fraction of clusters matched as the oracle does
  double cost = 0.0;
  double dual_bound = 0.0;
  double inertia = 0.0;
};

struct UnsupReport {
  std::vector<UnsupRow> rows;
  Aggregate blind_accuracy;
  Aggregate oracle_accuracy;
  Aggregate agreement;
};

struct ShuffleCurve {
  KernelKind kernel = KernelKind::kGwDistance;
  DistortionSpec spec;
  std::vector<ShufflePoint> points;
};

// Runs one named solver; `x`, `y` are needed by entropic_gw only.
QapSolveReport solve_named(const std::string& name, const FactorizedQap& qap, const SimilarityMatrix& x,
                           const SimilarityMatrix& y, const DistortionSpec& spec, const SolverSettings& settings,
                           std::uint64_t seed);

MatchReport run_small_scale(const ExperimentConfig& cfg);
MatchReport run_larger_scale(const ExperimentConfig& cfg);
BenchmarkTable run_solver_benchmark(const ExperimentConfig& cfg);
UnsupReport run_unsupervised_classifier(const ExperimentConfig& cfg);
std::vector<ShuffleCurve> run_shuffle_experiment(const ExperimentConfig& cfg);

// Same runners on already loaded data.
MatchReport run_small_scale(const ExperimentConfig& cfg, const ModalityPair& data);
MatchReport run_larger_scale(const ExperimentConfig& cfg, const ModalityPair& data);
BenchmarkTable run_solver_benchmark(const ExperimentConfig& cfg, const ModalityPair& data);
UnsupReport run_unsupervised_classifier(const ExperimentConfig& cfg, const ModalityPair& data);
std::vector<ShuffleCurve> run_shuffle_experiment(const ExperimentConfig& cfg, const ModalityPair& data);

}  // namespace blindmatch
