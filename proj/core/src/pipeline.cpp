#include "qmini/pipeline.hpp"

#include <algorithm>
#include <condition_variable>
#include <exception>
#include <set>
#include <thread>

#include "qmini/errors.hpp"
#include "qmini/miniapps.hpp"
#include "qmini/observable.hpp"
#include "qmini/tasks.hpp"
#include "qmini/vqa.hpp"

namespace qmini {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kSyntheticKinds = {"sleep", "encode", "train", "evaluate"};

bool known_kind(const std::string& kind) {
  if (kSyntheticKinds.count(kind) > 0) return true;
  if (kind == "pipeline") return false;  // no nesting
  return std::any_of(catalog().begin(), catalog().end(),
                     [&](const CatalogEntry& e) { return e.name == kind; });
}

std::pair<std::string, std::string> split_ref(const std::string& ref, const std::string& field) {
  const auto dot = ref.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == ref.size()) {
    throw ConfigError(field, field + " must look like 'producer.key', got '" + ref + "'");
  }
  return {ref.substr(0, dot), ref.substr(dot + 1)};
}

}  // namespace

void PipelineSpec::validate() const {
  if (stages.empty()) throw ConfigError("stages", "pipeline needs at least one stage");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    const std::string field = "stages[" + std::to_string(i) + "]";
    if (s.name.empty()) throw ConfigError(field + ".name", "stage name must not be empty");
    if (s.name.find('/') != std::string::npos || s.name.find('.') != std::string::npos) {
      throw ConfigError(field + ".name", "stage name '" + s.name + "' must not contain '/' or '.'");
    }
    if (!index.emplace(s.name, i).second) {
      throw ConfigError(field + ".name", "duplicate stage name '" + s.name + "'");
    }
    if (!known_kind(s.kind)) {
      throw ConfigError(field + ".kind", "unknown stage kind '" + s.kind + "'");
    }
    if (s.resources) {
      try {
        s.resources->validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(field + ".resources", e.what());
      }
    }
  }
  for (std::size_t i = 0; i < stages.size(); ++i) {
    for (const auto& d : stages[i].depends_on) {
      if (index.count(d) == 0) {
        throw ConfigError("stages[" + std::to_string(i) + "].depends_on",
                          "stage '" + stages[i].name + "' depends on unknown stage '" + d + "'");
      }
      if (d == stages[i].name) {
        throw ConfigError("stages[" + std::to_string(i) + "].depends_on",
                          "stage '" + d + "' depends on itself (cycle)");
      }
    }
  }

  // Kahn's algorithm; anything left over sits on a cycle.
  std::vector<std::size_t> indegree(stages.size(), 0);
  for (std::size_t i = 0; i < stages.size(); ++i) indegree[i] = stages[i].depends_on.size();
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::size_t cur = ready.back();
    ready.pop_back();
    ++visited;
    for (std::size_t j = 0; j < stages.size(); ++j) {
      for (const auto& d : stages[j].depends_on) {
        if (d == stages[cur].name && --indegree[j] == 0) ready.push_back(j);
      }
    }
  }
  if (visited != stages.size()) {
    std::string members;
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (indegree[i] > 0) members += (members.empty() ? "" : ", ") + stages[i].name;
    }
    throw ConfigError("stages", "dependency cycle among stages: " + members);
  }

  for (std::size_t i = 0; i < stages.size(); ++i) {
    for (const auto& d : stages[i].depends_on) {
      if (index.at(d) > i) {
        throw ConfigError("stages[" + std::to_string(i) + "].depends_on",
                          "stage '" + stages[i].name + "' depends on '" + d +
                              "', which is declared later");
      }
    }
  }

  // Explicit inputs may only read from a (transitive) dependency.
  for (std::size_t i = 0; i < stages.size(); ++i) {
    std::set<std::string> ancestors;
    std::vector<std::string> frontier(stages[i].depends_on);
    while (!frontier.empty()) {
      const std::string n = frontier.back();
      frontier.pop_back();
      if (!ancestors.insert(n).second) continue;
      for (const auto& d : stages[index.at(n)].depends_on) frontier.push_back(d);
    }
    for (const auto& [local, ref] : stages[i].inputs) {
      const std::string field = "stages[" + std::to_string(i) + "].inputs." + local;
      const auto [producer, key] = split_ref(ref, field);
      if (ancestors.count(producer) == 0) {
        throw ConfigError(field, "stage '" + stages[i].name + "' reads '" + ref +
                                     "' but does not depend on '" + producer + "'");
      }
    }
  }
}

PipelineSpec pipeline_from_json(const json& j) {
  const json& list = j.is_object() && j.contains("stages") ? j.at("stages") : j;
  if (!list.is_array()) throw ConfigError("stages", "'stages' must be a list");
  PipelineSpec p;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& s = list[i];
    const std::string field = "stages[" + std::to_string(i) + "]";
    if (!s.is_object()) throw ConfigError(field, field + " must be an object");
    for (const auto& [key, value] : s.items()) {
      static const std::set<std::string> allowed = {"name",       "kind",      "params",
                                                    "depends_on", "resources", "inputs"};
      if (allowed.count(key) == 0) throw ConfigError(field + "." + key, "unknown stage key '" + key + "'");
    }
    StageSpec st;
    try {
      st.name = s.at("name").get<std::string>();
      st.kind = s.value("kind", st.name);
      st.params = s.value("params", json::object());
      st.depends_on = s.value("depends_on", std::vector<std::string>{});
      st.inputs = s.value("inputs", std::map<std::string, std::string>{});
    } catch (const json::exception& e) {
      throw ConfigError(field, field + ": " + e.what());
    }
    if (!st.params.is_object()) throw ConfigError(field + ".params", field + ".params must be an object");
    if (s.contains("resources")) {
      try {
        st.resources = resource_spec_from_json(s.at("resources"));
      } catch (const std::exception& e) {
        throw ConfigError(field + ".resources", e.what());
      }
    }
    p.stages.push_back(std::move(st));
  }
  return p;
}

json to_json(const PipelineSpec& p) {
  json out = json::array();
  for (const auto& s : p.stages) {
    json j = {{"name", s.name}, {"kind", s.kind}, {"params", s.params}, {"depends_on", s.depends_on}};
    if (s.resources) j["resources"] = to_json(*s.resources);
    if (!s.inputs.empty()) j["inputs"] = s.inputs;
    out.push_back(std::move(j));
  }
  return out;
}

PipelineSpec default_pipeline(std::size_t qubits, std::size_t layers, std::size_t max_iterations) {
  PipelineSpec p;
  p.stages.push_back({"encode", "encode", {{"qubits", qubits}}, {}, std::nullopt, {}});
  p.stages.push_back({"train", "train",
                      {{"layers", layers}, {"max_iterations", max_iterations}},
                      {"encode"}, std::nullopt, {}});
  p.stages.push_back({"evaluate", "evaluate", json::object(), {"encode", "train"}, std::nullopt, {}});
  return p;
}

// ---------------------------------------------------------------------------

void StageContext::put(const std::string& stage, const std::string& key, json value) {
  std::lock_guard lock(mu_);
  values_[stage + "." + key] = std::move(value);
}

json StageContext::get(const std::string& producer, const std::string& key,
                       const std::string& consumer) const {
  std::lock_guard lock(mu_);
  const auto it = values_.find(producer + "." + key);
  if (it == values_.end()) {
    throw PipelineWiringError("stage '" + consumer + "' expected '" + key +
                              "' from stage '" + producer + "', which did not produce it");
  }
  return it->second;
}

bool StageContext::has(const std::string& producer, const std::string& key) const {
  std::lock_guard lock(mu_);
  return values_.count(producer + "." + key) > 0;
}

json StageContext::snapshot() const {
  std::lock_guard lock(mu_);
  json out = json::object();
  for (const auto& [k, v] : values_) out[k] = v;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct StageOutcome {
  std::vector<TaskResult> tasks;
  json result = json::object();
  std::optional<ExchangeStats> exchange;
};

class StageRunner {
 public:
  StageRunner(const StageSpec& spec, StageContext& ctx, ResourceSpec resources, std::uint64_t seed)
      : spec_(spec), ctx_(ctx), resources_(std::move(resources)), seed_(seed) {}

  StageOutcome run() {
    if (spec_.kind == "sleep") return sleep();
    if (spec_.kind == "encode") return encode();
    if (spec_.kind == "train") return train();
    if (spec_.kind == "evaluate") return evaluate();
    return miniapp();
  }

 private:
  json input(const std::string& key) const {
    if (const auto it = spec_.inputs.find(key); it != spec_.inputs.end()) {
      const auto dot = it->second.find('.');
      return ctx_.get(it->second.substr(0, dot), it->second.substr(dot + 1), spec_.name);
    }
    for (const auto& d : spec_.depends_on) {
      if (ctx_.has(d, key)) return ctx_.get(d, key, spec_.name);
    }
    std::string deps;
    for (const auto& d : spec_.depends_on) deps += (deps.empty() ? "" : ", ") + d;
    throw PipelineWiringError("stage '" + spec_.name + "' expected input '" + key +
                              "' but none of its dependencies produced it (" +
                              (deps.empty() ? "no dependencies" : deps) + ")");
  }

  void output(const std::string& key, json value, StageOutcome& out) {
    out.result[key] = value;
    ctx_.put(spec_.name, key, std::move(value));
  }

  std::vector<TaskResult> submit(std::vector<Task> tasks) {
    auto exec = create_executor(resources_);
    auto results = exec->submit_all(std::move(tasks));
    exec->shutdown();
    for (const auto& r : results) {
      if (!r.ok()) throw ExecutionError("stage '" + spec_.name + "' task " + r.task_id + ": " + *r.error);
    }
    return results;
  }

  StageOutcome sleep() {
    const double seconds = spec_.params.value("seconds", 0.01);
    const std::size_t count = spec_.params.value("count", std::size_t{1});
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < count; ++i) tasks.push_back(make_sleep_task(indexed_id("sleep-", i), seconds));
    StageOutcome out;
    out.tasks = submit(std::move(tasks));
    output("slept", seconds * static_cast<double>(count), out);
    return out;
  }

  StageOutcome encode() {
    const std::size_t qubits = spec_.params.value("qubits", std::size_t{2});
    const double coupling = spec_.params.value("coupling", 1.0);
    const double field = spec_.params.value("field", 1.0);
    const Observable h = tfim_hamiltonian(qubits, coupling, field);
    std::vector<double> features;
    for (const auto& t : h.terms()) features.push_back(t.coeff);
    StageOutcome out;
    output("problem", {{"qubits", qubits}, {"coupling", coupling}, {"field", field}, {"hamiltonian", to_json(h)}}, out);
    output("features", features, out);
    return out;
  }

  StageOutcome train() {
    const json problem = input("problem");
    const Observable h = observable_from_json(problem.at("hamiltonian"));
    const std::size_t layers = spec_.params.value("layers", std::size_t{1});
    json opt = spec_.params;
    opt.erase("layers");
    opt.erase("seed");
    if (!opt.contains("learning_rate")) opt["learning_rate"] = 0.2;
    const OptimizerConfig oc = optimizer_config_from_json(opt);

    auto exec = create_executor(resources_);
    CostEvaluator evaluator(hardware_efficient_ansatz(h.num_qubits(), layers), h, *exec);
    const VqaTrace trace = minimize(evaluator, oc, seed_);
    exec->shutdown();

    StageOutcome out;
    out.tasks = evaluator.log();
    output("params", trace.final_params, out);
    output("energy", trace.final_cost, out);
    out.result["iterations"] = trace.iterations.size();
    out.result["converged"] = trace.converged;
    return out;
  }

  StageOutcome evaluate() {
    const json problem = input("problem");
    const auto params = input("params").get<std::vector<double>>();
    const Observable h = observable_from_json(problem.at("hamiltonian"));
    const std::size_t per_layer = 2 * h.num_qubits();
    if (params.empty() || params.size() % per_layer != 0) {
      throw PipelineWiringError("stage '" + spec_.name + "' received " + std::to_string(params.size()) +
                                " parameters, which does not fit a " + std::to_string(h.num_qubits()) +
                                "-qubit ansatz");
    }
    const Circuit bound =
        bind_params(hardware_efficient_ansatz(h.num_qubits(), params.size() / per_layer), params);
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < h.terms().size(); ++i) {
      tasks.push_back(make_expectation_task(indexed_id("term-", i), bound,
                                            Observable(h.num_qubits(), {h.terms()[i]})));
    }
    StageOutcome out;
    out.tasks = submit(std::move(tasks));
    std::vector<double> per_term;
    double energy = 0.0;
    for (const auto& r : out.tasks) {
      per_term.push_back(r.scalar());
      energy += r.scalar();
    }
    output("energy", energy, out);
    output("per_term", per_term, out);
    return out;
  }

  StageOutcome miniapp() {
    MiniAppConfig cfg;
    cfg.name = spec_.kind;
    cfg.parameters = spec_.params;
    if (!cfg.parameters.contains("seed")) cfg.parameters["seed"] = seed_;
    try {
      cfg.parameters = validate_parameters(cfg.name, cfg.parameters);
    } catch (const ConfigError& e) {
      throw ConfigError("stages." + spec_.name + ".params." + e.field(), e.what());
    }
    cfg.resources = resources_;
    MetricsReport r = run_miniapp(cfg);
    StageOutcome out;
    out.tasks = std::move(r.tasks);
    out.exchange = r.exchange;
    output("results", r.results, out);
    output("makespan", r.makespan, out);
    return out;
  }

  const StageSpec& spec_;
  StageContext& ctx_;
  ResourceSpec resources_;
  std::uint64_t seed_;
};

}  // namespace

PipelineRun execute_pipeline(const PipelineSpec& spec, const ResourceSpec& resources,
                             std::uint64_t seed) {
  spec.validate();
  const std::size_t n = spec.stages.size();
  enum class State { pending, running, done, failed, skipped };
  std::vector<State> state(n, State::pending);
  std::vector<StageOutcome> outcomes(n);
  std::vector<StageReport> reports(n);
  std::exception_ptr first_error;

  StageContext ctx;
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::thread> threads;

  const auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < n; ++i) {
      if (spec.stages[i].name == name) return i;
    }
    return n;
  };

  std::unique_lock lock(mu);
  for (;;) {
    bool progressed = true;
    while (progressed) {
      progressed = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (state[i] != State::pending) continue;
        bool ready = true;
        bool blocked = false;
        for (const auto& d : spec.stages[i].depends_on) {
          const State ds = state[index_of(d)];
          ready = ready && ds == State::done;
          blocked = blocked || ds == State::failed || ds == State::skipped;
        }
        if (blocked) {
          state[i] = State::skipped;
          progressed = true;
        } else if (ready) {
          state[i] = State::running;
          const StageSpec& st = spec.stages[i];
          const std::uint64_t stage_seed = st.params.value("seed", seed + i);
          threads.emplace_back([&, i, stage_seed] {
            const StageSpec& stage = spec.stages[i];
            StageReport rep{stage.name, stage.depends_on, monotonic_seconds(), 0.0, 0.0, 0};
            StageOutcome outcome;
            std::exception_ptr err;
            try {
              outcome = StageRunner(stage, ctx, stage.resources.value_or(resources), stage_seed).run();
            } catch (...) {
              err = std::current_exception();
            }
            rep.end = monotonic_seconds();
            rep.makespan = rep.end - rep.start;
            rep.task_count = outcome.tasks.size();
            std::lock_guard guard(mu);
            reports[i] = std::move(rep);
            outcomes[i] = std::move(outcome);
            state[i] = err ? State::failed : State::done;
            if (err && !first_error) first_error = err;
            cv.notify_all();
          });
        }
      }
    }
    const bool running = std::any_of(state.begin(), state.end(), [](State s) { return s == State::running; });
    if (!running) break;
    cv.wait(lock);
  }
  lock.unlock();
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);

  PipelineRun run;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& t : outcomes[i].tasks) {
      t.task_id = spec.stages[i].name + "/" + t.task_id;
      run.tasks.push_back(std::move(t));
    }
    if (outcomes[i].exchange) {
      if (!run.exchange) run.exchange = ExchangeStats{};
      *run.exchange += *outcomes[i].exchange;
    }
    run.stage_results[spec.stages[i].name] = std::move(outcomes[i].result);
  }
  run.stages = std::move(reports);
  run.context = ctx.snapshot();
  return run;
}

}  // namespace qmini
