#include "qmini/miniapps.hpp"

#include <algorithm>
#include <cmath>

#include "qmini/cutting.hpp"
#include "qmini/distributed.hpp"
#include "qmini/errors.hpp"
#include "qmini/mitigation.hpp"
#include "qmini/pipeline.hpp"
#include "qmini/rng.hpp"
#include "qmini/tasks.hpp"
#include "qmini/vqa.hpp"

namespace qmini {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Catalog

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"circuit-execution", "circuit execution", "HPC-for-Quantum",
       "concurrent computation for different parameters", "loosely coupled, homogeneous tasks",
       "workload management across heterogeneous resources"},
      {"dist-sv", "distributed state vector simulation", "HPC-for-Quantum",
       "concurrent state vector updates and synchronization across all tasks",
       "tightly coupled, static and homogeneous tasks", "integration with HPC communication"},
      {"cutting", "circuit cutting", "HPC-for-Quantum",
       "concurrent execution and reconstruction of fragment tasks", "medium-to-tight coupling",
       "partitioning and placement of tasks and cuts"},
      {"zne", "error mitigation", "HPC-for-Quantum",
       "loosely coupled execution of circuit variants and result aggregation", "loosely coupled",
       "allocation across classical and quantum resources"},
      {"vqe", "variational quantum algorithms", "Quantum-in-HPC",
       "interleaved classical optimization and quantum evaluation",
       "coupling outside the coherence window", "collocation of quantum and classical resources"},
      {"qaoa", "variational quantum algorithms", "Quantum-in-HPC",
       "interleaved classical optimization and quantum evaluation",
       "coupling outside the coherence window", "collocation of quantum and classical resources"},
      {"pipeline", "multistage pipeline", "Quantum-about-HPC",
       "encapsulated stages with control and data flow",
       "heterogeneous, varying resource demands between stages",
       "resource estimation for pipeline stages"},
  };
  return entries;
}

const CatalogEntry& catalog_entry(std::string_view name) {
  for (const auto& e : catalog()) {
    if (e.name == name) return e;
  }
  throw ConfigError("miniapp", "unknown mini-app '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Parameter schemas

namespace {

enum class PType { integer, number, string, boolean, int_list, graph, stages };

struct ParamSpec {
  std::string name;
  PType type;
  bool required = false;
  json fallback = nullptr;  // null with required=false means "optional, no default"
  std::optional<double> min;
  std::optional<double> max;
  std::vector<std::string> choices;
};

constexpr double kMaxSeed = 18446744073709551615.0;

ParamSpec seed_param() { return {"seed", PType::integer, false, 1, 0.0, kMaxSeed, {}}; }

std::vector<ParamSpec> optimizer_params(double lr, int iterations) {
  return {
      {"optimizer", PType::string, false, "gradient_descent", {}, {}, {"gradient_descent", "gd", "spsa"}},
      {"learning_rate", PType::number, false, lr, 1e-12, 1e6, {}},
      {"max_iterations", PType::integer, false, iterations, 1.0, 1e6, {}},
      {"tolerance", PType::number, false, 1e-8, 0.0, 1e6, {}},
      {"init_range", PType::number, false, 0.1, 0.0, 10.0, {}},
      {"mode", PType::string, false, "sequential", {}, {}, {"sequential", "concurrent"}},
  };
}

std::vector<ParamSpec> schema_for(std::string_view name) {
  const double cap = static_cast<double>(kDefaultMaxQubits);
  std::vector<ParamSpec> s;
  if (name == "circuit-execution") {
    s = {{"num_tasks", PType::integer, true, nullptr, 1.0, 1e7, {}},
         {"qubits", PType::integer, true, nullptr, 1.0, cap, {}},
         {"depth", PType::integer, true, nullptr, 1.0, 1e5, {}},
         {"shots", PType::integer, false, 0, 0.0, 1e9, {}},
         {"workers", PType::integer, false, nullptr, 1.0, 1024.0, {}}};
  } else if (name == "dist-sv") {
    s = {{"qubits", PType::integer, true, nullptr, 1.0, cap, {}},
         {"depth", PType::integer, true, nullptr, 1.0, 1e5, {}},
         {"workers", PType::integer, false, 2, 1.0, 1024.0, {}},
         {"verify", PType::boolean, false, true, {}, {}, {}}};
  } else if (name == "cutting") {
    s = {{"qubits", PType::integer, false, 5, 2.0, 20.0, {}},
         {"depth", PType::integer, false, 4, 1.0, 1e4, {}},
         {"shots", PType::integer, false, 0, 0.0, 1e9, {}},
         {"observable", PType::string, false, nullptr, {}, {}, {}}};
  } else if (name == "zne") {
    s = {{"qubits", PType::integer, false, 5, 1.0, 16.0, {}},
         {"depth", PType::integer, false, 8, 1.0, 1e4, {}},
         {"circuit_seed", PType::integer, false, 1, 0.0, kMaxSeed, {}},
         {"noise_p", PType::number, false, 0.01, 0.0, 1.0, {}},
         {"scales", PType::int_list, false, json::array({1, 3, 5}), 1.0, 101.0, {}},
         {"trajectories", PType::integer, false, 2000, 1.0, 1e8, {}},
         {"extrapolation", PType::string, false, "linear", {}, {}, {"linear", "richardson"}}};
  } else if (name == "vqe") {
    s = {{"qubits", PType::integer, true, nullptr, 1.0, 16.0, {}},
         {"layers", PType::integer, true, nullptr, 1.0, 64.0, {}},
         {"coupling", PType::number, false, 1.0, -1e6, 1e6, {}},
         {"field", PType::number, false, 1.0, -1e6, 1e6, {}}};
    for (auto& p : optimizer_params(0.2, 500)) s.push_back(std::move(p));
  } else if (name == "qaoa") {
    s = {{"graph", PType::graph, false, "triangle", {}, {}, {}},
         {"rounds", PType::integer, false, 1, 1.0, 64.0, {}},
         {"shots", PType::integer, false, 1024, 1.0, 1e9, {}}};
    for (auto& p : optimizer_params(0.1, 200)) s.push_back(std::move(p));
  } else if (name == "pipeline") {
    s = {{"stages", PType::stages, false, nullptr, {}, {}, {}},
         {"qubits", PType::integer, false, 2, 1.0, 12.0, {}},
         {"layers", PType::integer, false, 1, 1.0, 16.0, {}},
         {"max_iterations", PType::integer, false, 100, 1.0, 1e6, {}}};
  } else {
    throw ConfigError("miniapp", "unknown mini-app '" + std::string(name) + "'");
  }
  s.push_back(seed_param());
  return s;
}

std::string type_name(PType t) {
  switch (t) {
    case PType::integer: return "an integer";
    case PType::number: return "a number";
    case PType::string: return "a string";
    case PType::boolean: return "a boolean";
    case PType::int_list: return "a list of integers";
    case PType::graph: return "a graph preset name or {num_nodes, edges} object";
    case PType::stages: return "a list of stage objects";
  }
  return "?";
}

bool type_matches(PType t, const json& v) {
  switch (t) {
    case PType::integer: return v.is_number_integer();
    case PType::number: return v.is_number();
    case PType::string: return v.is_string();
    case PType::boolean: return v.is_boolean();
    case PType::int_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) {
               return x.is_number_integer();
             });
    case PType::graph: return v.is_string() || v.is_object();
    case PType::stages: return v.is_array();
  }
  return false;
}

void check_range(const ParamSpec& spec, const json& v) {
  const auto in_range = [&](double x) {
    return (!spec.min || x >= *spec.min) && (!spec.max || x <= *spec.max);
  };
  const auto describe = [&] {
    std::string r;
    if (spec.min) r += " >= " + json(*spec.min).dump();
    if (spec.max) r += (r.empty() ? "" : " and") + std::string(" <= ") + json(*spec.max).dump();
    return r;
  };
  if (spec.type == PType::integer || spec.type == PType::number) {
    const double x = v.is_number_unsigned() ? static_cast<double>(v.get<std::uint64_t>())
                                            : v.get<double>();
    if (!std::isfinite(x) || !in_range(x)) {
      throw ConfigError(spec.name, "parameter '" + spec.name + "' must be" + describe() +
                                       ", got " + v.dump());
    }
  }
  if (spec.type == PType::int_list) {
    for (const auto& x : v) {
      if (!in_range(x.get<double>())) {
        throw ConfigError(spec.name, "parameter '" + spec.name + "' entries must be" + describe());
      }
    }
  }
  if (!spec.choices.empty()) {
    const auto s = v.get<std::string>();
    if (std::find(spec.choices.begin(), spec.choices.end(), s) == spec.choices.end()) {
      std::string options;
      for (const auto& c : spec.choices) options += (options.empty() ? "" : ", ") + c;
      throw ConfigError(spec.name, "parameter '" + spec.name + "' must be one of {" + options +
                                       "}, got '" + s + "'");
    }
  }
}

Graph graph_preset(const std::string& name) {
  if (name == "edge") return {2, {{0, 1, 1.0}}};
  if (name == "triangle") return {3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}};
  if (name == "square") return {4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}}};
  if (name.rfind("empty-", 0) == 0) return {static_cast<std::size_t>(std::stoul(name.substr(6))), {}};
  if (name.rfind("ring-", 0) == 0) {
    Graph g{static_cast<std::size_t>(std::stoul(name.substr(5))), {}};
    for (Qubit q = 0; q < g.num_nodes; ++q) {
      g.edges.push_back({q, static_cast<Qubit>((q + 1) % g.num_nodes), 1.0});
    }
    return g;
  }
  throw ConfigError("graph", "unknown graph preset '" + name +
                                 "' (edge, triangle, square, ring-N, empty-N)");
}

Graph graph_param(const json& v) {
  try {
    Graph g = v.is_string() ? graph_preset(v.get<std::string>()) : graph_from_json(v);
    g.validate();
    if (g.num_nodes < 2) throw ConfigError("graph", "graph needs at least two nodes");
    return g;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("graph", std::string("invalid graph: ") + e.what());
  }
}

void check_semantics(std::string_view name, const json& p) {
  if (name == "dist-sv") {
    const auto w = p.at("workers").get<std::size_t>();
    if ((w & (w - 1)) != 0) {
      throw ConfigError("workers", "parameter 'workers' must be a power of two, got " +
                                       std::to_string(w));
    }
    if ((std::size_t{1} << p.at("qubits").get<std::size_t>()) < w) {
      throw ConfigError("workers", "parameter 'workers' exceeds 2^qubits");
    }
  } else if (name == "cutting") {
    if (p.contains("observable")) {
      const auto text = p.at("observable").get<std::string>();
      try {
        if (PauliString::parse(text).num_qubits() != p.at("qubits").get<std::size_t>()) {
          throw ConfigError("observable", "parameter 'observable' must have one Pauli per qubit");
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError("observable", std::string("parameter 'observable': ") + e.what());
      }
    }
  } else if (name == "zne") {
    const auto& scales = p.at("scales");
    std::vector<int> seen;
    for (const auto& s : scales) {
      const int v = s.get<int>();
      if (v % 2 == 0) throw ConfigError("scales", "parameter 'scales' must contain odd integers");
      if (std::find(seen.begin(), seen.end(), v) != seen.end()) {
        throw ConfigError("scales", "parameter 'scales' contains a duplicate");
      }
      seen.push_back(v);
    }
    if (seen.size() < 2) throw ConfigError("scales", "parameter 'scales' needs at least two entries");
  } else if (name == "qaoa") {
    graph_param(p.at("graph"));
  } else if (name == "pipeline") {
    if (p.contains("stages")) pipeline_from_json(p.at("stages")).validate();
  }
}

ResourceSpec resources_param(const json& j) {
  if (!j.is_object()) throw ConfigError("resources", "'resources' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "nodes" && key != "pes_per_node" && key != "backend" && key != "worker_class") {
      throw ConfigError("resources." + key, "unknown resource key '" + key + "'");
    }
  }
  for (const char* key : {"nodes", "pes_per_node"}) {
    if (j.contains(key) && (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 1)) {
      throw ConfigError(std::string("resources.") + key,
                        std::string("resources.") + key + " must be an integer >= 1");
    }
  }
  if (j.contains("backend") && !j.at("backend").is_string()) {
    throw ConfigError("resources.backend", "resources.backend must be a string");
  }
  try {
    ResourceSpec r = resource_spec_from_json(j);
    r.validate();
    return r;
  } catch (const Error& e) {
    throw ConfigError("resources", e.what());
  }
}

}  // namespace

json validate_parameters(std::string_view name, const json& parameters) {
  if (!parameters.is_object()) throw ConfigError("parameters", "'parameters' must be an object");
  const auto specs = schema_for(name);
  for (const auto& [key, value] : parameters.items()) {
    const bool known = std::any_of(specs.begin(), specs.end(),
                                   [&](const ParamSpec& s) { return s.name == key; });
    if (!known) {
      throw ConfigError(key, "unknown parameter '" + key + "' for mini-app '" + std::string(name) + "'");
    }
  }
  json out = json::object();
  for (const auto& spec : specs) {
    if (!parameters.contains(spec.name)) {
      if (spec.required) {
        throw ConfigError(spec.name, "missing required parameter '" + spec.name +
                                         "' for mini-app '" + std::string(name) + "'");
      }
      if (!spec.fallback.is_null()) out[spec.name] = spec.fallback;
      continue;
    }
    const json& v = parameters.at(spec.name);
    if (!type_matches(spec.type, v)) {
      throw ConfigError(spec.name, "parameter '" + spec.name + "' must be " + type_name(spec.type) +
                                       ", got " + v.dump());
    }
    check_range(spec, v);
    out[spec.name] = v;
  }
  check_semantics(name, out);
  return out;
}

std::uint64_t MiniAppConfig::seed() const { return parameters.value("seed", std::uint64_t{1}); }

MiniAppConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "miniapp" && key != "parameters" && key != "resources" && key != "output") {
      throw ConfigError(key, "unknown configuration key '" + key + "'");
    }
  }
  if (!j.contains("miniapp")) throw ConfigError("miniapp", "missing 'miniapp'");
  if (!j.at("miniapp").is_string()) throw ConfigError("miniapp", "'miniapp' must be a string");
  MiniAppConfig c;
  c.name = j.at("miniapp").get<std::string>();
  catalog_entry(c.name);
  c.parameters = validate_parameters(c.name, j.value("parameters", json::object()));
  if (j.contains("resources")) c.resources = resources_param(j.at("resources"));
  if (j.contains("output")) {
    if (!j.at("output").is_string()) throw ConfigError("output", "'output' must be a string");
    c.output = j.at("output").get<std::string>();
  }
  return c;
}

json to_json(const MiniAppConfig& c) {
  json j = {{"miniapp", c.name}, {"parameters", c.parameters}, {"resources", to_json(c.resources)}};
  if (c.output) j["output"] = *c.output;
  return j;
}

json config_echo(const MiniAppConfig& c) {
  return {{"miniapp", c.name},
          {"parameters", c.parameters},
          {"resources", to_json(c.resources)},
          {"seed", c.seed()}};
}

// ---------------------------------------------------------------------------
// Runners

namespace {

std::size_t uparam(const json& p, const char* key) { return p.at(key).get<std::size_t>(); }

OptimizerConfig optimizer_from_params(const json& p) {
  OptimizerConfig oc;
  oc.kind = optimizer_from_string(p.at("optimizer").get<std::string>());
  oc.learning_rate = p.at("learning_rate").get<double>();
  oc.max_iterations = uparam(p, "max_iterations");
  oc.tolerance = p.at("tolerance").get<double>();
  oc.init_range = p.at("init_range").get<double>();
  oc.validate();
  return oc;
}

/// Serial executor for sequential mode, otherwise the configured resources.
std::pair<std::unique_ptr<Executor>, ResourceSpec> mode_executor(const MiniAppConfig& cfg) {
  ResourceSpec spec = cfg.resources;
  if (cfg.parameters.at("mode").get<std::string>() == "sequential") spec = ResourceSpec{};
  return {create_executor(spec), spec};
}

MetricsReport finish(const MiniAppConfig& cfg, const ResourceSpec& used,
                     std::vector<TaskResult> results, json app_results) {
  MiniAppConfig echo = cfg;
  echo.resources = used;
  MetricsReport r = build_report(config_echo(echo), used, std::move(results));
  r.results = std::move(app_results);
  return r;
}

}  // namespace

MetricsReport run_circuit_execution(const MiniAppConfig& cfg) {
  const json& p = cfg.parameters;
  const std::size_t tasks = uparam(p, "num_tasks");
  const std::size_t qubits = uparam(p, "qubits");
  const std::size_t depth = uparam(p, "depth");
  const std::uint64_t shots = p.at("shots").get<std::uint64_t>();
  const std::uint64_t seed = cfg.seed();

  const Observable obs = random_z_observable(qubits, seed);
  std::vector<Task> batch;
  batch.reserve(tasks);
  for (std::size_t i = 0; i < tasks; ++i) {
    std::optional<ShotOptions> so;
    if (shots > 0) so = ShotOptions{shots, seed + i};
    batch.push_back(make_expectation_task(indexed_id("task-", i),
                                          random_circuit(qubits, depth, seed + i), obs, so));
  }
  // `workers` is shorthand for a single-node pool of that size.
  ResourceSpec used = cfg.resources;
  if (p.contains("workers")) used = ResourceSpec{1, uparam(p, "workers"), Backend::pool, "cpu"};
  auto exec = create_executor(used);
  auto results = exec->submit_all(std::move(batch));
  exec->shutdown();

  std::size_t failed = 0;
  for (const auto& r : results) failed += r.ok() ? 0 : 1;
  if (failed > 0) {
    throw ExecutionError(std::to_string(failed) + " of " + std::to_string(tasks) +
                         " circuit tasks failed; first error: " +
                         *std::find_if(results.begin(), results.end(),
                                       [](const TaskResult& r) { return !r.ok(); })->error);
  }
  const double mean = std::get<double>(aggregate(results, Reducer::mean));
  return finish(cfg, used, std::move(results),
                {{"observable", obs.terms().front().to_string()}, {"mean_expectation", mean}});
}

MetricsReport run_dist_sv(const MiniAppConfig& cfg) {
  const json& p = cfg.parameters;
  const std::size_t qubits = uparam(p, "qubits");
  const std::size_t depth = uparam(p, "depth");
  const std::size_t workers = uparam(p, "workers");
  const std::uint64_t seed = cfg.seed();

  const Circuit c = random_circuit(qubits, depth, seed);
  const Observable obs = random_z_observable(qubits, seed);
  const ExchangeStats analytic = [&] {
    ExchangeStats s;
    for (const Gate& g : c.gates()) s += expected_exchange(g, qubits, workers);
    return s;
  }();

  RankCluster cluster(static_cast<int>(workers));
  TaskResult record;
  record.task_id = "dist-run";
  record.kind = TaskKind::expectation;
  record.start = monotonic_seconds();
  DistRunResult run_result = dist_run(cluster, c);
  const DistExpectation ev = dist_expectation(cluster, run_result.state, obs);
  record.end = monotonic_seconds();
  record.wall_time = record.end - record.start;
  record.value = ev.value;
  record.circuit_hash = circuit_hash(c);
  cluster.shutdown();

  json out = {{"observable", obs.terms().front().to_string()},
              {"expectation", ev.value},
              {"gate_exchange", to_json(run_result.stats)},
              {"analytic_gate_exchange", to_json(analytic)},
              {"exchange_matches_analytic", run_result.stats.messages_sent == analytic.messages_sent}};
  if (p.at("verify").get<bool>() && qubits <= 22) {
    const StateVector single = run(c);
    const StateVector gathered = gather(run_result.state);
    double diff = 0.0;
    for (std::size_t i = 0; i < single.dimension(); ++i) {
      diff = std::max(diff, std::abs(single[i] - gathered[i]));
    }
    out["max_abs_diff_vs_single_node"] = diff;
    out["state_digest"] = hex_digest(state_digest(gathered));
  }

  ExchangeStats total = run_result.stats;
  total += ev.stats;
  const ResourceSpec used{1, workers, Backend::sharded_cluster, "cpu"};
  MetricsReport r = finish(cfg, used, {record}, std::move(out));
  r.exchange = total;
  return r;
}

MetricsReport run_cutting(const MiniAppConfig& cfg) {
  const json& p = cfg.parameters;
  const std::size_t qubits = uparam(p, "qubits");
  const std::uint64_t seed = cfg.seed();
  const CutSpec spec = random_cut_instance(qubits, uparam(p, "depth"), seed);
  const Observable obs = [&] {
    if (p.contains("observable")) return Observable::single(p.at("observable").get<std::string>());
    // Mean single-qubit magnetization plus one random string: random
    // high-weight strings alone are often exactly zero on shallow circuits.
    std::vector<PauliString> terms;
    for (Qubit q = 0; q < qubits; ++q) {
      PauliString z{std::vector<Pauli>(qubits, Pauli::I), 1.0 / static_cast<double>(qubits)};
      z.ops[q] = Pauli::Z;
      terms.push_back(std::move(z));
    }
    terms.push_back(random_pauli_observable(qubits, derive_seed(seed, 7)).terms().front());
    return Observable(qubits, std::move(terms));
  }();
  const CutFragments fragments = cut(spec);

  CutRunOptions options;
  if (const auto shots = p.at("shots").get<std::uint64_t>(); shots > 0) {
    options.shots = ShotOptions{shots, seed};
  }
  auto exec = create_executor(cfg.resources);
  Reconstruction rec = reconstruct(*exec, fragments, obs, options);
  exec->shutdown();

  const double uncut = expectation(run(spec.circuit), obs);
  double one_norm = 0.0;
  for (const auto& job : enumerate_jobs()) one_norm += std::abs(job.weight);
  json out = {{"cut", {{"gate_index", spec.point.gate_index}, {"qubit", spec.point.qubit}}},
              {"metadata", to_json(fragments.meta)},
              {"observable", to_json(obs)},
              {"reconstructed", rec.value},
              {"uncut", uncut},
              {"abs_error", std::abs(rec.value - uncut)},
              {"pairs", enumerate_jobs().size()},
              {"quasi_probability_one_norm", one_norm},
              {"jobs", rec.jobs}};
  return finish(cfg, cfg.resources, std::move(rec.results), std::move(out));
}

MetricsReport run_zne(const MiniAppConfig& cfg) {
  const json& p = cfg.parameters;
  const std::size_t qubits = uparam(p, "qubits");
  const Circuit c = random_circuit(qubits, uparam(p, "depth"), p.at("circuit_seed").get<std::uint64_t>());
  PauliString z0{std::vector<Pauli>(qubits, Pauli::I), 1.0};
  z0.ops[0] = Pauli::Z;
  const Observable obs(qubits, {z0});
  const std::vector<int> scales = p.at("scales").get<std::vector<int>>();
  const NoiseModel noise{p.at("noise_p").get<double>()};
  const auto method = extrapolation_from_string(p.at("extrapolation").get<std::string>());

  auto exec = create_executor(cfg.resources);
  std::vector<TaskResult> log;
  const MitigationResult m = zne(*exec, c, obs, noise, scales, uparam(p, "trajectories"),
                                 cfg.seed(), method, &log);
  exec->shutdown();

  const double ideal = expectation(run(c), obs);
  const int lowest = *std::min_element(scales.begin(), scales.end());
  json out = to_json(m);
  out["observable"] = z0.to_string();
  out["ideal"] = ideal;
  out["unmitigated_error"] = std::abs(m.per_scale.at(lowest).mean - ideal);
  out["mitigated_error"] = std::abs(m.mitigated_value - ideal);
  return finish(cfg, cfg.resources, std::move(log), std::move(out));
}

MetricsReport run_vqe(const MiniAppConfig& cfg) {
  const json& p = cfg.parameters;
  const std::size_t qubits = uparam(p, "qubits");
  const Observable h = tfim_hamiltonian(qubits, p.at("coupling").get<double>(), p.at("field").get<double>());
  const Circuit ansatz = hardware_efficient_ansatz(qubits, uparam(p, "layers"));
  auto [exec, used] = mode_executor(cfg);
  CostEvaluator evaluator(ansatz, h, *exec);
  const VqaTrace trace = minimize(evaluator, optimizer_from_params(p), cfg.seed());
  exec->shutdown();
  json out = {{"trace", to_json(trace)},
              {"hamiltonian", to_json(h)},
              {"num_params", ansatz.num_params()},
              {"mode", p.at("mode")}};
  return finish(cfg, used, evaluator.log(), std::move(out));
}

MetricsReport run_qaoa(const MiniAppConfig& cfg) {
  const json& p = cfg.parameters;
  const Graph g = graph_param(p.at("graph"));
  auto [exec, used] = mode_executor(cfg);
  std::vector<TaskResult> log;
  const QaoaResult result = qaoa_maxcut(g, uparam(p, "rounds"), optimizer_from_params(p), cfg.seed(),
                                        *exec, p.at("shots").get<std::uint64_t>(), &log);
  exec->shutdown();
  json out = to_json(result);
  out["graph"] = to_json(g);
  return finish(cfg, used, std::move(log), std::move(out));
}

MetricsReport run_pipeline(const MiniAppConfig& cfg) {
  const json& p = cfg.parameters;
  const PipelineSpec spec =
      p.contains("stages") ? pipeline_from_json(p.at("stages"))
                           : default_pipeline(uparam(p, "qubits"), uparam(p, "layers"),
                                              uparam(p, "max_iterations"));
  spec.validate();
  PipelineRun run_result = execute_pipeline(spec, cfg.resources, cfg.seed());
  json out = {{"pipeline", to_json(spec)},
              {"context", run_result.context},
              {"stages", run_result.stage_results}};
  MetricsReport r = finish(cfg, cfg.resources, std::move(run_result.tasks), std::move(out));
  r.stages = std::move(run_result.stages);
  r.exchange = run_result.exchange;
  return r;
}

MetricsReport run_miniapp(const MiniAppConfig& cfg) {
  // Re-validate so programmatic configs get the same checks as parsed ones.
  MiniAppConfig checked = cfg;
  catalog_entry(checked.name);
  checked.parameters = validate_parameters(checked.name, cfg.parameters);
  try {
    checked.resources.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("resources", e.what());
  }
  if (checked.name == "circuit-execution") return run_circuit_execution(checked);
  if (checked.name == "dist-sv") return run_dist_sv(checked);
  if (checked.name == "cutting") return run_cutting(checked);
  if (checked.name == "zne") return run_zne(checked);
  if (checked.name == "vqe") return run_vqe(checked);
  if (checked.name == "qaoa") return run_qaoa(checked);
  return run_pipeline(checked);
}

}  // namespace qmini
