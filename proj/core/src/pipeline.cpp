#include "blindmatch/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "blindmatch/error.hpp"
#include <nlohmann/json.hpp>

#ifndef BLINDMATCH_VERSION
#define BLINDMATCH_VERSION "0.0.0"
#endif

namespace blindmatch {

using nlohmann::json;

std::string_view library_version() noexcept { return BLINDMATCH_VERSION; }

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::kShuffle: return "shuffle";
    case ExperimentKind::kSmallScale: return "small_scale";
    case ExperimentKind::kLargerScale: return "larger_scale";
    case ExperimentKind::kSolverBench: return "solver_bench";
    case ExperimentKind::kUnsupClassify: return "unsup_classify";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (auto k : {ExperimentKind::kShuffle, ExperimentKind::kSmallScale, ExperimentKind::kLargerScale,
                 ExperimentKind::kSolverBench, ExperimentKind::kUnsupClassify})
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::kInvalidConfig, "unknown experiment '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Config

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); }

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
      config_error("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

const std::vector<std::string>& known_solvers() {
  static const std::vector<std::string> names{"enumeration", "hahn_grant", "hahn_grant_auction", "faq",
                                              "2opt", "primal_heuristic", "entropic_gw", "random"};
  return names;
}

void parse_solver(const json& j, SolverSettings& s) {
  allow_keys(j, "solver",
             {"name", "lap", "tol_abs", "tol_rel", "tol_gap", "auction_eps0", "auction_decay", "auction_eps_min",
              "max_iters", "time_limit", "primal_heuristic_seeds", "faq_seeds", "eps_entropy", "outer_iters",
              "sinkhorn_iters"});
  read(j, "name", s.name);
  if (j.contains("lap")) s.hahn_grant.lap = parse_lap_backend(j.at("lap").get<std::string>());
  auto& h = s.hahn_grant;
  read(j, "tol_abs", h.tol_abs);
  read(j, "tol_rel", h.tol_rel);
  read(j, "tol_gap", h.tol_gap);
  read(j, "auction_eps0", h.auction_eps0);
  read(j, "auction_decay", h.auction_decay);
  read(j, "auction_eps_min", h.auction_eps_min);
  read(j, "max_iters", h.max_iters);
  read(j, "time_limit", h.time_limit);
  read(j, "primal_heuristic_seeds", h.primal_heuristic_seeds);
  read(j, "faq_seeds", s.faq_seeds);
  if (j.contains("eps_entropy")) s.entropic_gw.eps_entropy = j.at("eps_entropy").get<double>();
  read(j, "outer_iters", s.entropic_gw.outer_iters);
  read(j, "sinkhorn_iters", s.entropic_gw.sinkhorn_iters);
}

void parse_synthetic(const json& j, SyntheticSource& s) {
  allow_keys(j, "synthetic",
             {"kind", "classes", "per_class", "latent_dim", "dim", "modality_noise", "sample_noise", "spread",
              "seed"});
  std::string kind = "correlated";
  read(j, "kind", kind);
  if (kind == "correlated")
    s.kind = SyntheticSource::Kind::kCorrelated;
  else if (kind == "unrelated")
    s.kind = SyntheticSource::Kind::kUnrelated;
  else if (kind == "blobs")
    s.kind = SyntheticSource::Kind::kBlobs;
  else
    config_error("unknown synthetic kind '" + kind + "'");
  auto& c = s.correlated;
  auto& b = s.blobs;
  read(j, "classes", c.classes);
  read(j, "per_class", c.per_class);
  read(j, "latent_dim", c.latent_dim);
  read(j, "dim", c.dim);
  read(j, "modality_noise", c.modality_noise);
  read(j, "sample_noise", c.sample_noise);
  read(j, "seed", c.seed);
  if (s.kind == SyntheticSource::Kind::kBlobs) {
    read(j, "classes", b.classes);
    read(j, "per_class", b.per_class);
    read(j, "latent_dim", b.latent_dim);
    read(j, "dim", b.dim);
    read(j, "spread", b.spread);
    read(j, "seed", b.seed);
  }
}

}  // namespace

DistortionSpec ExperimentConfig::spec() const {
  return distortion ? DistortionSpec{*distortion} : DistortionSpec::for_kernel(kernel);
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) config_error("seeds must be non-empty");
  if (!synthetic) {
    if (x_manifest.empty() || y_manifest.empty()) config_error("data.x and data.y manifests are required");
    for (const auto& p : {x_manifest, y_manifest})
      if (!std::filesystem::exists(p)) throw Error(ErrorCode::kMissingFile, "manifest not found: " + p.string());
  }
  if (!spec().accepts(kernel))
    config_error(std::string(to_string(spec().kind)) + " distortion does not accept " +
                 std::string(to_string(kernel)) + " kernels");
  if (!(fraction > 0.0 && fraction <= 1.0)) config_error("fraction must be in (0, 1]");
  if (knn_k < 1) config_error("knn_k must be >= 1");
  if (num_classes && *num_classes < 1) config_error("num_classes must be >= 1");
  if (workers < 1) config_error("workers must be >= 1");
  solver.hahn_grant.validate();
  if (solver.faq_seeds < 1) config_error("faq_seeds must be >= 1");
  auto known = [](const std::string& n) {
    return std::find(known_solvers().begin(), known_solvers().end(), n) != known_solvers().end();
  };
  if (!known(solver.name)) config_error("unknown solver '" + solver.name + "'");
  switch (kind) {
    case ExperimentKind::kSmallScale:
      break;
    case ExperimentKind::kLargerScale:
      if (subset.sizes.empty()) config_error("larger_scale needs subset.sizes");
      if (subset.top_m < 1) config_error("subset.top_m must be >= 1");
      if (std::find(subset.sizes.begin(), subset.sizes.end(), 0u) != subset.sizes.end())
        config_error("subset sizes must be >= 1");
      break;
    case ExperimentKind::kSolverBench:
      if (solvers.empty()) config_error("solver_bench needs a non-empty solvers list");
      for (const auto& s : solvers)
        if (!known(s)) config_error("unknown solver '" + s + "'");
      break;
    case ExperimentKind::kUnsupClassify:
      if (kmeans_init < 1) config_error("kmeans_init must be >= 1");
      break;
    case ExperimentKind::kShuffle:
      if (shuffle.kernels.empty()) config_error("shuffle.kernels must be non-empty");
      if (shuffle.seeds < 1) config_error("shuffle.seeds must be >= 1");
      for (double a : shuffle.levels)
        if (!(a >= 0.0 && a <= 1.0)) config_error("shuffle levels must lie in [0, 1]");
      break;
  }
}

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(j, "config",
             {"experiment", "data", "kernel", "knn_k", "distortion", "classes", "num_classes", "fraction", "seeds",
              "solver", "solvers", "subset", "shuffle", "kmeans_init", "workers"});
  ExperimentConfig cfg;
  if (!j.contains("experiment")) config_error("missing 'experiment'");
  cfg.kind = parse_experiment_kind(j.at("experiment").get<std::string>());
  if (cfg.kind == ExperimentKind::kSmallScale) cfg.solver.name = "enumeration";

  if (!j.contains("data")) config_error("missing 'data'");
  const json& data = j.at("data");
  allow_keys(data, "data", {"x", "y", "synthetic"});
  if (data.contains("synthetic")) {
    cfg.synthetic.emplace();
    parse_synthetic(data.at("synthetic"), *cfg.synthetic);
  } else {
    auto resolve = [&](const char* key) {
      if (!data.contains(key)) config_error(std::string("missing data.") + key);
      std::filesystem::path p = data.at(key).get<std::string>();
      return p.is_absolute() ? p : base_dir / p;
    };
    cfg.x_manifest = resolve("x");
    cfg.y_manifest = resolve("y");
  }

  if (j.contains("kernel")) cfg.kernel = parse_kernel_kind(j.at("kernel").get<std::string>());
  read(j, "knn_k", cfg.knn_k);
  if (j.contains("distortion")) cfg.distortion = parse_distortion_kind(j.at("distortion").get<std::string>());
  read(j, "classes", cfg.classes);
  if (j.contains("num_classes")) cfg.num_classes = j.at("num_classes").get<std::size_t>();
  read(j, "fraction", cfg.fraction);
  read(j, "seeds", cfg.seeds);
  if (j.contains("solver")) parse_solver(j.at("solver"), cfg.solver);
  read(j, "solvers", cfg.solvers);
  if (j.contains("subset")) {
    const json& s = j.at("subset");
    allow_keys(s, "subset", {"sizes", "top_m", "mode", "restarts", "max_swaps", "seed"});
    read(s, "sizes", cfg.subset.sizes);
    read(s, "top_m", cfg.subset.top_m);
    if (s.contains("mode")) {
      const auto mode = s.at("mode").get<std::string>();
      if (mode == "exact")
        cfg.subset.mode = SubsetMode::kExact;
      else if (mode == "heuristic")
        cfg.subset.mode = SubsetMode::kHeuristic;
      else
        config_error("subset.mode must be 'exact' or 'heuristic'");
    }
    read(s, "restarts", cfg.subset.search.restarts);
    read(s, "max_swaps", cfg.subset.search.max_swaps);
    read(s, "seed", cfg.subset.search.seed);
  }
  if (j.contains("shuffle")) {
    const json& s = j.at("shuffle");
    allow_keys(s, "shuffle", {"kernels", "levels", "seeds"});
    if (s.contains("kernels")) {
      cfg.shuffle.kernels.clear();
      for (const auto& k : s.at("kernels")) cfg.shuffle.kernels.push_back(parse_kernel_kind(k.get<std::string>()));
    }
    if (s.contains("levels")) {
      const json& lv = s.at("levels");
      if (lv.is_number_integer()) {
        const int count = lv.get<int>();
        if (count < 2) config_error("shuffle.levels count must be >= 2");
        cfg.shuffle.levels.clear();
        for (int i = 0; i < count; ++i) cfg.shuffle.levels.push_back(static_cast<double>(i) / (count - 1));
      } else {
        read(s, "levels", cfg.shuffle.levels);
      }
    }
    read(s, "seeds", cfg.shuffle.seeds);
  }
  read(j, "kmeans_init", cfg.kmeans_init);
  read(j, "workers", cfg.workers);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Data

ModalityPair load_modalities(const ExperimentConfig& cfg) {
  ModalityPair pair;
  if (cfg.synthetic) {
    switch (cfg.synthetic->kind) {
      case SyntheticSource::Kind::kCorrelated: pair = make_correlated_modalities(cfg.synthetic->correlated); break;
      case SyntheticSource::Kind::kUnrelated: pair = make_unrelated_modalities(cfg.synthetic->correlated); break;
      case SyntheticSource::Kind::kBlobs: pair = make_blobs(cfg.synthetic->blobs); break;
    }
  } else {
    pair.x = load_embeddings(cfg.x_manifest);
    pair.y = load_embeddings(cfg.y_manifest);
  }
  if (!pair.x.labels || !pair.y.labels)
    throw Error(ErrorCode::kUnlabeled, "both modalities need class labels");
  if (pair.x.num_classes() != pair.y.num_classes())
    throw Error(ErrorCode::kSizeMismatch, "modalities have " + std::to_string(pair.x.num_classes()) + " and " +
                                              std::to_string(pair.y.num_classes()) + " classes");
  pair.x = normalize_rows(pair.x);
  pair.y = normalize_rows(pair.y);
  return pair;
}

double matching_accuracy(const Permutation& perm, const Permutation& gt) {
  if (perm.size() != gt.size()) throw Error(ErrorCode::kSizeMismatch, "permutation lengths differ");
  if (perm.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) hits += perm[i] == gt[i] ? 1u : 0u;
  return static_cast<double>(hits) / static_cast<double>(perm.size());
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - a.mean) * (v - a.mean);
  a.stddev = std::sqrt(var / static_cast<double>(values.size()));
  return a;
}

// ---------------------------------------------------------------------------
// Runners

namespace {

// Runs fn(0..count-1) on up to `workers` threads; results keep index order.
template <typename T>
std::vector<T> parallel_map(std::size_t count, int workers, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<int> selected_classes(const ExperimentConfig& cfg, int available) {
  std::vector<int> classes = cfg.classes;
  if (classes.empty()) {
    const int n = cfg.num_classes ? static_cast<int>(*cfg.num_classes) : available;
    if (n > available)
      throw Error(ErrorCode::kInvalidConfig, "num_classes = " + std::to_string(n) + " but only " +
                                                 std::to_string(available) + " classes exist");
    for (int c = 0; c < n; ++c) classes.push_back(c);
  }
  std::set<int> seen;
  for (int c : classes) {
    if (c < 0 || c >= available) throw Error(ErrorCode::kInvalidConfig, "class id " + std::to_string(c) + " out of range");
    if (!seen.insert(c).second) throw Error(ErrorCode::kInvalidConfig, "class id " + std::to_string(c) + " repeated");
  }
  if (classes.size() < 2) throw Error(ErrorCode::kInvalidConfig, "matching needs at least two classes");
  return classes;
}

struct Instance {
  SimilarityMatrix x;
  SimilarityMatrix y;
  FactorizedQap qap;
};

Instance build_instance(const ExperimentConfig& cfg, const ClassPrototypes& px, const ClassPrototypes& py) {
  Instance inst;
  inst.x = build_kernel(px, cfg.kernel, cfg.knn_k);
  inst.y = build_kernel(py, cfg.kernel, cfg.knn_k);
  inst.qap = to_qap(inst.x, inst.y, cfg.spec());
  return inst;
}

Instance seeded_instance(const ExperimentConfig& cfg, const ModalityPair& data, const std::vector<int>& classes,
                         std::uint64_t seed) {
  return build_instance(cfg, class_prototypes(data.x, cfg.fraction, seed, classes),
                        class_prototypes(data.y, cfg.fraction, seed, classes));
}

MatchRow make_row(const QapSolveReport& r, std::uint64_t seed, const std::vector<int>& classes) {
  MatchRow row;
  row.seed = seed;
  row.size = classes.size();
  row.classes = classes;
  row.solver = r.solver;
  row.perm = r.primal_perm;
  row.accuracy = matching_accuracy(r.primal_perm, identity_permutation(r.primal_perm.size()));
  row.cost = r.primal_cost;
  row.dual_bound = r.dual_bound;
  row.gap = r.gap();
  row.converged = r.converged;
  row.global = r.converged;
  row.wall_time = r.wall_time;
  row.history = r.history;
  return row;
}

void summarize(MatchReport& report) {
  std::vector<double> acc, cost;
  for (const auto& r : report.rows) {
    acc.push_back(r.accuracy);
    cost.push_back(r.cost);
  }
  report.accuracy = aggregate(acc);
  report.cost = aggregate(cost);
}

}  // namespace

QapSolveReport solve_named(const std::string& name, const FactorizedQap& qap, const SimilarityMatrix& x,
                           const SimilarityMatrix& y, const DistortionSpec& spec, const SolverSettings& settings,
                           std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  auto since = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  if (name == "enumeration") return solve_enumeration(qap);
  if (name == "hahn_grant" || name == "hahn_grant_auction") {
    HahnGrantConfig hg = settings.hahn_grant;
    hg.seed = seed;
    if (name == "hahn_grant_auction") hg.lap = LapBackend::kAuction;
    return solve_factorized_hahn_grant(qap, hg);
  }
  if (name == "faq") {
    auto p = solve_faq(qap, settings.faq_seeds, seed);
    return report_for_permutation(qap, std::move(p), name, since());
  }
  if (name == "2opt") {
    Rng rng = Rng(seed).fork(0x2097);
    auto p = solve_2opt(qap, random_permutation(qap.size(), rng));
    return report_for_permutation(qap, std::move(p), name, since());
  }
  if (name == "primal_heuristic") {
    auto p = primal_heuristic(qap, settings.faq_seeds, seed);
    return report_for_permutation(qap, std::move(p), name, since());
  }
  if (name == "entropic_gw") {
    auto r = solve_entropic_gw(x, y, spec, settings.entropic_gw);
    auto rep = report_for_permutation(qap, std::move(r.perm), name, since());
    rep.iterations = r.outer_iterations;
    return rep;
  }
  if (name == "random") {
    Rng rng = Rng(seed).fork(0xa11);
    return report_for_permutation(qap, random_permutation(qap.size(), rng), name, since());
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown solver '" + name + "'");
}

MatchReport run_small_scale(const ExperimentConfig& cfg, const ModalityPair& data) {
  cfg.validate();
  const auto classes = selected_classes(cfg, data.x.num_classes());
  if (classes.size() > kMaxEnumerationSize && cfg.solver.name == "enumeration")
    throw Error(ErrorCode::kTooLarge, "small_scale enumerates at most " + std::to_string(kMaxEnumerationSize) +
                                          " classes");
  MatchReport report;
  report.kind = ExperimentKind::kSmallScale;
  report.rows = parallel_map<MatchRow>(cfg.seeds.size(), cfg.workers, [&](std::size_t i) {
    const auto seed = cfg.seeds[i];
    const Instance inst = seeded_instance(cfg, data, classes, seed);
    return make_row(solve_named(cfg.solver.name, inst.qap, inst.x, inst.y, cfg.spec(), cfg.solver, seed), seed,
                    classes);
  });
  summarize(report);
  return report;
}

MatchReport run_larger_scale(const ExperimentConfig& cfg, const ModalityPair& data) {
  cfg.validate();
  const auto pool = selected_classes(cfg, data.x.num_classes());
  const auto px = class_prototypes(data.x, 1.0, 0, pool);
  const auto py = class_prototypes(data.y, 1.0, 0, pool);
  const SimilarityMatrix kx = build_kernel(px, cfg.kernel, cfg.knn_k);
  const SimilarityMatrix ky = build_kernel(py, cfg.kernel, cfg.knn_k);

  struct Job {
    std::size_t size;
    int subset_index;
    std::vector<int> classes;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t n : cfg.subset.sizes) {
    if (n > pool.size())
      throw Error(ErrorCode::kInvalidConfig, "subset size " + std::to_string(n) + " exceeds the class pool");
    const auto prob = make_alignment_problem(kx, ky, cfg.spec(), n);
    const auto list = top_m_subsets(prob, cfg.subset.top_m, cfg.subset.mode, cfg.subset.search);
    for (std::size_t s = 0; s < list.subsets.size(); ++s) {
      std::vector<int> classes;
      for (int m : list.subsets[s].members) classes.push_back(pool[static_cast<std::size_t>(m)]);
      for (auto seed : cfg.seeds) jobs.push_back({n, static_cast<int>(s), classes, seed});
    }
  }
  MatchReport report;
  report.kind = ExperimentKind::kLargerScale;
  report.rows = parallel_map<MatchRow>(jobs.size(), cfg.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const Instance inst = seeded_instance(cfg, data, job.classes, job.seed);
    MatchRow row = make_row(solve_named(cfg.solver.name, inst.qap, inst.x, inst.y, cfg.spec(), cfg.solver, job.seed),
                            job.seed, job.classes);
    row.subset_index = job.subset_index;
    return row;
  });
  summarize(report);
  return report;
}

BenchmarkTable run_solver_benchmark(const ExperimentConfig& cfg, const ModalityPair& data) {
  cfg.validate();
  const auto classes = selected_classes(cfg, data.x.num_classes());
  BenchmarkTable table;
  table.optimum_known = classes.size() <= 10;
  const std::size_t per_seed = cfg.solvers.size();

  auto per_seed_rows = parallel_map<std::vector<MatchRow>>(cfg.seeds.size(), cfg.workers, [&](std::size_t i) {
    const auto seed = cfg.seeds[i];
    const Instance inst = seeded_instance(cfg, data, classes, seed);
    std::optional<double> optimum;
    if (table.optimum_known) optimum = solve_enumeration(inst.qap).qap_primal;
    std::vector<MatchRow> rows;
    double best_bound = -std::numeric_limits<double>::infinity();
    for (const auto& name : cfg.solvers) {
      try {
        const auto rep = solve_named(name, inst.qap, inst.x, inst.y, cfg.spec(), cfg.solver, seed);
        if (rep.converged) best_bound = std::max(best_bound, rep.qap_dual);
        rows.push_back(make_row(rep, seed, classes));
        rows.back().solver = name;
      } catch (const std::exception& e) {
        MatchRow failed;
        failed.seed = seed;
        failed.size = classes.size();
        failed.classes = classes;
        failed.solver = name;
        failed.error = e.what();
        rows.push_back(std::move(failed));
      }
    }
    for (auto& row : rows) {
      if (!row.error.empty()) continue;
      const double primal = inst.qap.to_qap_units(row.cost);
      const double reference = optimum ? *optimum : best_bound;
      row.global = primal <= reference + 1e-9 * std::max(1.0, std::abs(reference));
    }
    return rows;
  });

  for (auto& rows : per_seed_rows)
    for (auto& r : rows) table.rows.push_back(std::move(r));
  for (std::size_t s = 0; s < per_seed; ++s) {
    SolverSummary sum;
    sum.solver = cfg.solvers[s];
    std::vector<double> acc, cost;
    std::size_t global = 0;
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      const MatchRow& r = table.rows[i * per_seed + s];
      if (!r.error.empty()) {
        ++sum.failures;
        continue;
      }
      acc.push_back(r.accuracy);
      cost.push_back(r.cost);
      global += r.global ? 1u : 0u;
    }
    sum.accuracy = aggregate(acc);
    sum.cost = aggregate(cost);
    sum.global_frequency = acc.empty() ? 0.0 : static_cast<double>(global) / static_cast<double>(acc.size());
    table.summary.push_back(sum);
  }
  return table;
}

UnsupReport run_unsupervised_classifier(const ExperimentConfig& cfg, const ModalityPair& data) {
  cfg.validate();
  const int k = data.y.num_classes();
  if (data.x.num_classes() != k)
    throw Error(ErrorCode::kSizeMismatch, "cluster count must equal the number of language prototypes");
  const auto language = class_prototypes(data.y, 1.0, 0);
  const auto& labels = *data.x.labels;
  const auto n = static_cast<int>(data.x.n());

  UnsupReport report;
  report.rows = parallel_map<UnsupRow>(cfg.seeds.size(), cfg.workers, [&](std::size_t si) {
    const auto seed = cfg.seeds[si];
    Rng rng = Rng(seed).fork(0x5eed);
    const int take = std::max(k, static_cast<int>(std::floor(cfg.fraction * n)));
    auto rows = rng.sample_without_replacement(n, std::min(take, n));
    std::sort(rows.begin(), rows.end());
    Matrix points(rows.size(), data.x.d());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto src = data.x.data.row(static_cast<std::size_t>(rows[r]));
      std::copy(src.begin(), src.end(), points.row(r).begin());
    }
    const ClusterModel model = kmeans_pp(points, k, cfg.kmeans_init, seed);

    Matrix centres = model.centroids;
    for (std::size_t c = 0; c < centres.rows(); ++c) {
      double norm = 0.0;
      for (double v : centres.row(c)) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < 1e-12) throw Error(ErrorCode::kZeroRow, "cluster centroid " + std::to_string(c) + " is zero");
      for (double& v : centres.row(c)) v /= norm;
    }
    const Instance inst = build_instance(cfg, prototypes_from_rows(centres), language);
    const auto rep = solve_named(cfg.solver.name, inst.qap, inst.x, inst.y, cfg.spec(), cfg.solver, seed);

    const auto kk = static_cast<std::size_t>(k);
    Matrix contingency(kk, kk, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r)
      contingency(static_cast<std::size_t>(model.assignments[r]),
                  static_cast<std::size_t>(labels[static_cast<std::size_t>(rows[r])])) -= 1.0;
    const Permutation oracle = solve_lap_jv(contingency).assignment;

    UnsupRow row;
    row.seed = seed;
    row.cluster_to_class = rep.primal_perm;
    row.oracle_cluster_to_class = oracle;
    std::size_t blind = 0, best = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto c = static_cast<std::size_t>(model.assignments[r]);
      const int truth = labels[static_cast<std::size_t>(rows[r])];
      blind += rep.primal_perm[c] == truth ? 1u : 0u;
      best += oracle[c] == truth ? 1u : 0u;
    }
    row.blind_accuracy = static_cast<double>(blind) / static_cast<double>(rows.size());
    row.oracle_accuracy = static_cast<double>(best) / static_cast<double>(rows.size());
    row.agreement = matching_accuracy(rep.primal_perm, oracle);
    row.cost = rep.primal_cost;
    row.dual_bound = rep.dual_bound;
    row.inertia = model.inertia;
    return row;
  });
  std::vector<double> b, o, a;
  for (const auto& r : report.rows) {
    b.push_back(r.blind_accuracy);
    o.push_back(r.oracle_accuracy);
    a.push_back(r.agreement);
  }
  report.blind_accuracy = aggregate(b);
  report.oracle_accuracy = aggregate(o);
  report.agreement = aggregate(a);
  return report;
}

std::vector<ShuffleCurve> run_shuffle_experiment(const ExperimentConfig& cfg, const ModalityPair& data) {
  cfg.validate();
  const auto classes = selected_classes(cfg, data.x.num_classes());
  const auto seed = cfg.seeds.front();
  const auto px = class_prototypes(data.x, cfg.fraction, seed, classes);
  const auto py = class_prototypes(data.y, cfg.fraction, seed, classes);
  std::vector<ShuffleCurve> curves;
  for (KernelKind kind : cfg.shuffle.kernels) {
    ShuffleCurve curve;
    curve.kernel = kind;
    curve.spec = DistortionSpec::for_kernel(kind);
    const auto x = build_kernel(px, kind, cfg.knn_k);
    const auto y = build_kernel(py, kind, cfg.knn_k);
    curve.points = shuffle_curve(x, y, curve.spec, cfg.shuffle.levels, cfg.shuffle.seeds, seed);
    curves.push_back(std::move(curve));
  }
  return curves;
}

MatchReport run_small_scale(const ExperimentConfig& cfg) { return run_small_scale(cfg, load_modalities(cfg)); }
MatchReport run_larger_scale(const ExperimentConfig& cfg) { return run_larger_scale(cfg, load_modalities(cfg)); }
BenchmarkTable run_solver_benchmark(const ExperimentConfig& cfg) {
  return run_solver_benchmark(cfg, load_modalities(cfg));
}
UnsupReport run_unsupervised_classifier(const ExperimentConfig& cfg) {
  return run_unsupervised_classifier(cfg, load_modalities(cfg));
}
std::vector<ShuffleCurve> run_shuffle_experiment(const ExperimentConfig& cfg) {
  return run_shuffle_experiment(cfg, load_modalities(cfg));
}

}  // namespace blindmatch
