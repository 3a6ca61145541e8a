#pragma once

// Mini-app layer: one runnable application per execution motif plus the
// staged pipeline, each producing a MetricsReport.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmini/engine.hpp"
#include "qmini/report.hpp"

namespace qmini {

struct CatalogEntry {
  std::string name;
  std::string motif;
  /// HPC-for-Quantum, Quantum-in-HPC or Quantum-about-HPC.
  std::string integration;
  std::string interaction;
  std::string coupling;
  std::string middleware;
};

/// The seven shipped mini-apps in a fixed order.
const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(std::string_view name);

struct MiniAppConfig {
  std::string name;
  /// Validated parameters with defaults filled in.
  nlohmann::json parameters = nlohmann::json::object();
  ResourceSpec resources;
  std::optional<std::string> output;

  std::uint64_t seed() const;
};

/// Parses {miniapp, parameters, resources, output} and validates it against
/// the per-app schema. Throws ConfigError naming the offending field.
MiniAppConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MiniAppConfig& c);

/// Checks and normalizes `parameters` for mini-app `name` (defaults filled).
nlohmann::json validate_parameters(std::string_view name, const nlohmann::json& parameters);

/// Runs the configured mini-app. Execution failures surface as ExecutionError
/// (or the motif's own error types); configuration problems as ConfigError.
MetricsReport run_miniapp(const MiniAppConfig& config);

MetricsReport run_circuit_execution(const MiniAppConfig& config);
MetricsReport run_dist_sv(const MiniAppConfig& config);
MetricsReport run_cutting(const MiniAppConfig& config);
MetricsReport run_zne(const MiniAppConfig& config);
MetricsReport run_vqe(const MiniAppConfig& config);
MetricsReport run_qaoa(const MiniAppConfig& config);
MetricsReport run_pipeline(const MiniAppConfig& config);

/// The {miniapp, parameters, resources, seed} block echoed into reports.
nlohmann::json config_echo(const MiniAppConfig& config);

}  // namespace qmini
