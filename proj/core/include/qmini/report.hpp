#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmini/cluster.hpp"
#include "qmini/engine.hpp"

namespace qmini {

inline constexpr const char* kReportSchemaVersion = "1";

/// Timing block for one pipeline stage.
struct StageReport {
  std::string name;
  std::vector<std::string> depends_on;
  double start = 0.0;
  double end = 0.0;
  double makespan = 0.0;
  std::size_t task_count = 0;
};

struct MetricsReport {
  std::string schema_version = kReportSchemaVersion;
  /// Echo of {miniapp, parameters, resources, seed}.
  nlohmann::json config = nlohmann::json::object();
  ResourceSpec resources;
  std::vector<TaskResult> tasks;
  double makespan = 0.0;
  double throughput = 0.0;
  std::optional<double> baseline_makespan;
  std::optional<double> speedup;
  std::optional<double> efficiency;
  std::optional<ExchangeStats> exchange;
  /// Order-sensitive digest of every per-task circuit hash (task-id order).
  std::string circuit_digest;
  /// Mini-app specific results (fitted values, traces, per-job tables, ...).
  nlohmann::json results = nlohmann::json::object();
  std::vector<StageReport> stages;
};

/// makespan = max end - min start; throughput = tasks / makespan; speedup and
/// efficiency are filled when a baseline report is supplied.
MetricsReport build_report(nlohmann::json config, const ResourceSpec& resources,
                           std::vector<TaskResult> results,
                           const MetricsReport* baseline = nullptr);

/// Recomputes speedup / efficiency of `report` against `baseline`.
void attach_baseline(MetricsReport& report, const MetricsReport& baseline);

std::uint64_t digest_task_hashes(std::span<const TaskResult> results);

nlohmann::json to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

/// Structural validation against the version-1 schema. Empty means valid.
std::vector<std::string> validate_report(const nlohmann::json& j);

/// One row per task: id,kind,worker_id,start,end,wall_time,ok,value.
std::string report_to_csv(const MetricsReport& r);

/// iteration,cost rows from a variational trace stored in results.trace.
std::string trace_to_csv(const MetricsReport& r);

}  // namespace qmini
