#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "blindmatch/pipeline.hpp"
#include "blindmatch/qap.hpp"
#include "blindmatch/subset.hpp"

namespace blindmatch {

// JSON documents carry "schema": "blindmatch.<name>" and "schema_version": 1.
std::string qap_report_json(const QapSolveReport& report);
std::string qap_report_json(const QapSolveReport& report, const HahnGrantConfig& config);

// `class_ids` maps subset members (problem indices) to dataset class ids;
// empty means the identity.
std::string subset_list_json(const SubsetList& list, const std::vector<int>& class_ids = {});

std::string match_report_json(const MatchReport& report);
std::string benchmark_json(const BenchmarkTable& table);
std::string unsup_report_json(const UnsupReport& report);

// "alpha,mean,std" header plus one row per level.
std::string shuffle_csv(const std::vector<ShufflePoint>& points);

std::string config_echo_json(const ExperimentConfig& cfg);

struct RunManifest {
  std::string experiment;
  std::string config_path;
  std::string config_hash;  // crc32 of the config file bytes
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> command_line;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<std::string> outputs;  // relative to the output directory
  bool success = true;
  std::string error;
};

std::string run_manifest_json(const RunManifest& manifest);

std::string iso8601_utc(std::chrono::system_clock::time_point t);

// Creates parent directories; raises kIo on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace blindmatch
