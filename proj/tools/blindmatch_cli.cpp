#include <chrono>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blindmatch/embedding_store.hpp"
#include "blindmatch/error.hpp"
#include "blindmatch/pipeline.hpp"
#include "blindmatch/report_io.hpp"

namespace fs = std::filesystem;
using namespace blindmatch;

namespace {

struct Options {
  std::string config;
  std::string out = "blindmatch_out";
  std::vector<std::uint64_t> seeds;
  double time_limit = -1.0;
  std::string solver;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void apply_overrides(ExperimentConfig& cfg, const Options& opt) {
  if (!opt.seeds.empty()) cfg.seeds = opt.seeds;
  if (opt.time_limit > 0.0) cfg.solver.hahn_grant.time_limit = opt.time_limit;
  if (!opt.solver.empty()) {
    cfg.solver.name = opt.solver;
    if (cfg.kind == ExperimentKind::kSolverBench) cfg.solvers = {opt.solver};
  }
  cfg.validate();
}

// Runs the experiment and writes its reports; returns output file names.
std::vector<std::string> run(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text_file(out / name, text);
    written.push_back(name);
  };
  emit("config.json", config_echo_json(cfg));
  switch (cfg.kind) {
    case ExperimentKind::kSmallScale: {
      const auto report = run_small_scale(cfg);
      emit("match_report.json", match_report_json(report));
      std::printf("accuracy %.4f +- %.4f over %zu runs\n", report.accuracy.mean, report.accuracy.stddev,
                  report.accuracy.count);
      break;
    }
    case ExperimentKind::kLargerScale: {
      const auto report = run_larger_scale(cfg);
      emit("match_report.json", match_report_json(report));
      std::printf("accuracy %.4f +- %.4f over %zu runs\n", report.accuracy.mean, report.accuracy.stddev,
                  report.accuracy.count);
      break;
    }
    case ExperimentKind::kSolverBench: {
      const auto table = run_solver_benchmark(cfg);
      emit("benchmark.json", benchmark_json(table));
      for (const auto& s : table.summary)
        std::printf("%-20s accuracy %.4f cost %.6f global %.2f\n", s.solver.c_str(), s.accuracy.mean,
                    s.cost.mean, s.global_frequency);
      break;
    }
    case ExperimentKind::kUnsupClassify: {
      const auto report = run_unsupervised_classifier(cfg);
      emit("unsup_report.json", unsup_report_json(report));
      std::printf("blind %.4f oracle %.4f agreement %.4f\n", report.blind_accuracy.mean,
                  report.oracle_accuracy.mean, report.agreement.mean);
      break;
    }
    case ExperimentKind::kShuffle: {
      for (const auto& curve : run_shuffle_experiment(cfg)) {
        const std::string name = "shuffle_" + std::string(to_string(curve.kernel)) + ".csv";
        emit(name, shuffle_csv(curve.points));
        std::printf("%s: %.6f -> %.6f\n", std::string(to_string(curve.kernel)).c_str(),
                    curve.points.front().mean, curve.points.back().mean);
      }
      break;
    }
  }
  return written;
}

int execute(ExperimentKind kind, const Options& opt, const std::vector<std::string>& argv) {
  RunManifest manifest;
  manifest.experiment = std::string(to_string(kind));
  manifest.config_path = opt.config;
  manifest.command_line = argv;
  manifest.started = std::chrono::system_clock::now();
  const fs::path out = opt.out;
  int status = 0;
  try {
    const std::string text = read_file(opt.config);
    manifest.config_hash = crc32_hex(text.data(), text.size());
    ExperimentConfig cfg = parse_experiment_config(text, fs::path(opt.config).parent_path());
    if (cfg.kind != kind)
      throw Error(ErrorCode::kInvalidConfig, "config describes '" + std::string(to_string(cfg.kind)) +
                                                 "' but the command is '" + manifest.experiment + "'");
    apply_overrides(cfg, opt);
    manifest.seeds = cfg.seeds;
    manifest.outputs = run(cfg, out);
  } catch (const std::exception& e) {
    manifest.success = false;
    manifest.error = e.what();
    std::fprintf(stderr, "blindmatch: %s\n", e.what());
    status = 1;
  }
  manifest.finished = std::chrono::system_clock::now();
  try {
    write_text_file(out / "run_manifest.json", run_manifest_json(manifest));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "blindmatch: %s\n", e.what());
    status = 1;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind matching of two embedding sets by quadratic assignment"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  Options opt;
  std::vector<std::pair<CLI::App*, ExperimentKind>> commands;
  const std::pair<const char*, ExperimentKind> kinds[] = {
      {"shuffle", ExperimentKind::kShuffle},
      {"small_scale", ExperimentKind::kSmallScale},
      {"larger_scale", ExperimentKind::kLargerScale},
      {"solver_bench", ExperimentKind::kSolverBench},
      {"unsup_classify", ExperimentKind::kUnsupClassify},
  };
  for (const auto& [name, kind] : kinds) {
    CLI::App* sub = app.add_subcommand(name, std::string("Run the ") + name + " experiment");
    sub->add_option("--config", opt.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
    sub->add_option("--seeds", opt.seeds, "Comma-separated seeds overriding the config")->delimiter(',');
    sub->add_option("--time-limit", opt.time_limit, "Per-solve time limit in seconds")
        ->check(CLI::PositiveNumber);
    sub->add_option("--solver", opt.solver, "Solver overriding the config");
    commands.emplace_back(sub, kind);
  }

  CLI11_PARSE(app, argc, argv);

  const std::vector<std::string> args(argv, argv + argc);
  for (const auto& [sub, kind] : commands)
    if (sub->parsed()) return execute(kind, opt, args);
  return 2;
}
