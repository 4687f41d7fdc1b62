#include "blindmatch/report_io.hpp"

#include <charconv>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "blindmatch/error.hpp"
#include <nlohmann/json.hpp>

namespace blindmatch {

using nlohmann::json;

namespace {

json header(const char* name) { return json{{"schema", std::string("blindmatch.") + name}, {"schema_version", 1}}; }

json aggregate_json(const Aggregate& a) { return {{"mean", a.mean}, {"std", a.stddev}, {"count", a.count}}; }

json history_json(const std::vector<HistoryEntry>& history) {
  json h = json::array();
  for (const auto& e : history)
    h.push_back({{"iteration", e.iteration}, {"qap_dual", e.qap_dual}, {"qap_primal", e.qap_primal},
                 {"elapsed", e.elapsed}});
  return h;
}

json hahn_grant_json(const HahnGrantConfig& c) {
  return {{"lap", to_string(c.lap)},
          {"tol_abs", c.tol_abs},
          {"tol_rel", c.tol_rel},
          {"tol_gap", c.tol_gap},
          {"auction_eps0", c.auction_eps0},
          {"auction_decay", c.auction_decay},
          {"auction_eps_min", c.auction_eps_min},
          {"max_iters", c.max_iters},
          {"time_limit", c.time_limit},
          {"primal_heuristic_seeds", c.primal_heuristic_seeds},
          {"seed", c.seed}};
}

json qap_json(const QapSolveReport& r) {
  json j = header("qap_report");
  j["solver"] = r.solver;
  j["n"] = r.primal_perm.size();
  j["primal_perm"] = r.primal_perm;
  j["primal_cost"] = r.primal_cost;
  j["dual_bound"] = r.dual_bound;
  j["qap_primal"] = r.qap_primal;
  j["qap_dual"] = r.qap_dual;
  j["gap"] = r.gap();
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["stop_reason"] = to_string(r.stop_reason);
  j["wall_time"] = r.wall_time;
  j["history"] = history_json(r.history);
  return j;
}

json row_json(const MatchRow& r) {
  json j{{"seed", r.seed},         {"size", r.size},           {"subset_index", r.subset_index},
         {"classes", r.classes},   {"solver", r.solver},       {"perm", r.perm},
         {"accuracy", r.accuracy}, {"cost", r.cost},           {"dual_bound", r.dual_bound},
         {"gap", r.gap},           {"converged", r.converged}, {"global", r.global},
         {"wall_time", r.wall_time}};
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.history.empty()) j["history"] = history_json(r.history);
  return j;
}

}  // namespace

std::string qap_report_json(const QapSolveReport& report) { return qap_json(report).dump(2); }

std::string qap_report_json(const QapSolveReport& report, const HahnGrantConfig& config) {
  json j = qap_json(report);
  j["config"] = hahn_grant_json(config);
  return j.dump(2);
}

std::string subset_list_json(const SubsetList& list, const std::vector<int>& class_ids) {
  json j = header("subsets");
  j["truncated"] = list.truncated;
  json items = json::array();
  for (const auto& s : list.subsets) {
    std::vector<int> ids;
    for (int m : s.members) ids.push_back(class_ids.empty() ? m : class_ids.at(static_cast<std::size_t>(m)));
    items.push_back({{"classes", ids}, {"score", s.score}});
  }
  j["subsets"] = std::move(items);
  return j.dump(2);
}

std::string match_report_json(const MatchReport& report) {
  json j = header("match_report");
  j["experiment"] = to_string(report.kind);
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(row_json(r));
  j["rows"] = std::move(rows);
  j["accuracy"] = aggregate_json(report.accuracy);
  j["cost"] = aggregate_json(report.cost);
  return j.dump(2);
}

std::string benchmark_json(const BenchmarkTable& table) {
  json j = header("solver_benchmark");
  j["optimum_known"] = table.optimum_known;
  json summary = json::array();
  for (const auto& s : table.summary)
    summary.push_back({{"solver", s.solver},
                       {"accuracy", aggregate_json(s.accuracy)},
                       {"cost", aggregate_json(s.cost)},
                       {"global_frequency", s.global_frequency},
                       {"failures", s.failures}});
  j["summary"] = std::move(summary);
  json rows = json::array();
  for (const auto& r : table.rows) rows.push_back(row_json(r));
  j["rows"] = std::move(rows);
  return j.dump(2);
}

std::string unsup_report_json(const UnsupReport& report) {
  json j = header("unsup_report");
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"seed", r.seed},
                    {"cluster_to_class", r.cluster_to_class},
                    {"oracle_cluster_to_class", r.oracle_cluster_to_class},
                    {"blind_accuracy", r.blind_accuracy},
                    {"oracle_accuracy", r.oracle_accuracy},
                    {"agreement", r.agreement},
                    {"cost", r.cost},
                    {"dual_bound", r.dual_bound},
                    {"inertia", r.inertia}});
  j["rows"] = std::move(rows);
  j["blind_accuracy"] = aggregate_json(report.blind_accuracy);
  j["oracle_accuracy"] = aggregate_json(report.oracle_accuracy);
  j["agreement"] = aggregate_json(report.agreement);
  return j.dump(2);
}

namespace {

// Shortest text that reads back as the same double.
std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string shuffle_csv(const std::vector<ShufflePoint>& points) {
  std::string out = "alpha,mean,std\n";
  for (const auto& p : points)
    out += shortest(p.alpha) + ',' + shortest(p.mean) + ',' + shortest(p.stddev) + '\n';
  return out;
}

std::string config_echo_json(const ExperimentConfig& cfg) {
  json j{{"experiment", to_string(cfg.kind)},
         {"kernel", to_string(cfg.kernel)},
         {"distortion", to_string(cfg.spec().kind)},
         {"knn_k", cfg.knn_k},
         {"classes", cfg.classes},
         {"fraction", cfg.fraction},
         {"seeds", cfg.seeds},
         {"solver", cfg.solver.name},
         {"hahn_grant", hahn_grant_json(cfg.solver.hahn_grant)},
         {"faq_seeds", cfg.solver.faq_seeds},
         {"solvers", cfg.solvers},
         {"workers", cfg.workers}};
  if (cfg.num_classes) j["num_classes"] = *cfg.num_classes;
  if (cfg.synthetic)
    j["data"] = "synthetic";
  else
    j["data"] = {{"x", cfg.x_manifest.string()}, {"y", cfg.y_manifest.string()}};
  return j.dump(2);
}

std::string iso8601_utc(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string run_manifest_json(const RunManifest& m) {
  json j = header("run_manifest");
  j["tool"] = "blindmatch";
  j["version"] = library_version();
  j["experiment"] = m.experiment;
  j["config_path"] = m.config_path;
  j["config_hash"] = m.config_hash;
  j["seeds"] = m.seeds;
  j["command_line"] = m.command_line;
  j["started_at"] = iso8601_utc(m.started);
  j["finished_at"] = iso8601_utc(m.finished);
  j["elapsed_seconds"] = std::chrono::duration<double>(m.finished - m.started).count();
  j["outputs"] = m.outputs;
  j["success"] = m.success;
  if (!m.error.empty()) j["error"] = m.error;
  return j.dump(2);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace blindmatch
