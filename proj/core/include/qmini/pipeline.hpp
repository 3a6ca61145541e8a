#pragma once

// Staged DAG runner. Stages whose dependencies have finished run
// concurrently; values flow between stages through a keyed context where
// every entry is owned by the stage that produced it ("train.params").

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmini/engine.hpp"
#include "qmini/report.hpp"

namespace qmini {

struct StageSpec {
  std::string name;
  /// A mini-app name, or one of the synthetic kinds: sleep, encode, train, evaluate.
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> depends_on;
  std::optional<ResourceSpec> resources;
  /// Explicit input wiring: local key -> "producer.key".
  std::map<std::string, std::string> inputs;
};

struct PipelineSpec {
  std::vector<StageSpec> stages;

  /// Unique names, known kinds and dependencies, no cycles, dependencies
  /// declared earlier in the list, and explicit inputs that read only from
  /// upstream stages. Throws ConfigError.
  void validate() const;
};

PipelineSpec pipeline_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineSpec& p);

/// encode -> train -> evaluate on a small transverse-field Ising problem.
PipelineSpec default_pipeline(std::size_t qubits, std::size_t layers, std::size_t max_iterations);

class StageContext {
 public:
  void put(const std::string& stage, const std::string& key, nlohmann::json value);
  /// Value of `producer.key`; PipelineWiringError names producer and consumer when absent.
  nlohmann::json get(const std::string& producer, const std::string& key,
                     const std::string& consumer) const;
  bool has(const std::string& producer, const std::string& key) const;
  nlohmann::json snapshot() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, nlohmann::json> values_;
};

struct PipelineRun {
  std::vector<TaskResult> tasks;
  std::vector<StageReport> stages;
  nlohmann::json context;
  nlohmann::json stage_results = nlohmann::json::object();
  std::optional<ExchangeStats> exchange;
};

PipelineRun execute_pipeline(const PipelineSpec& spec, const ResourceSpec& resources,
                             std::uint64_t seed);

}  // namespace qmini
