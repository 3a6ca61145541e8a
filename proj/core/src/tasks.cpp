#include "qmini/tasks.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#include "qmini/errors.hpp"
#include "qmini/mitigation.hpp"
#include "qmini/rng.hpp"

namespace qmini {

using nlohmann::json;

namespace {

json circuit_payload(const Circuit& c, const std::optional<ShotOptions>& shots) {
  json p = {{"circuit", to_json(c)}};
  if (shots) {
    p["shots"] = shots->shots;
    p["seed"] = shots->seed;
  }
  return p;
}

Task make_task(std::string id, TaskKind kind, json payload) {
  Task t;
  t.id = std::move(id);
  t.kind = kind;
  t.payload = std::move(payload);
  return t;
}

std::optional<ShotOptions> shots_of(const json& p) {
  if (!p.contains("shots")) return std::nullopt;
  return ShotOptions{p.at("shots").get<std::uint64_t>(), p.value("seed", std::uint64_t{0})};
}

double evaluate(const StateVector& s, const Observable& obs, const std::optional<ShotOptions>& shots) {
  if (shots) return estimate_from_shots(s, obs, shots->shots, shots->seed);
  return expectation(s, obs);
}

TaskOutput run_expectation(const json& p) {
  const Circuit c = circuit_from_json(p.at("circuit"));
  const Observable obs = observable_from_json(p.at("observable"));
  const StateVector s = run(c);
  return {evaluate(s, obs, shots_of(p)), circuit_hash(c)};
}

TaskOutput run_circuit(const json& p) {
  const Circuit c = circuit_from_json(p.at("circuit"));
  const StateVector s = run(c);
  if (auto shots = shots_of(p)) return {sample(s, shots->shots, shots->seed), circuit_hash(c)};
  return {hex_digest(state_digest(s)), circuit_hash(c)};
}

TaskOutput run_fragment(const json& p) {
  const Circuit c = circuit_from_json(p.at("circuit"));
  const Observable obs = observable_from_json(p.at("observable"));
  const auto shots = shots_of(p);
  const StateVector s = run(c);
  std::vector<double> values;
  values.reserve(obs.terms().size());
  for (std::size_t i = 0; i < obs.terms().size(); ++i) {
    const Observable term(obs.num_qubits(), {obs.terms()[i]});
    std::optional<ShotOptions> term_shots;
    if (shots) term_shots = ShotOptions{shots->shots, derive_seed(shots->seed, i)};
    values.push_back(evaluate(s, term, term_shots));
  }
  return {std::move(values), circuit_hash(c)};
}

TaskOutput run_trajectories(const json& p) {
  const Circuit c = circuit_from_json(p.at("circuit"));
  const Observable obs = observable_from_json(p.at("observable"));
  NoiseModel noise{p.at("noise_p").get<double>()};
  noise.validate();
  auto values = trajectory_expectations(c, obs, noise, p.at("seed").get<std::uint64_t>(),
                                        p.at("first").get<std::uint64_t>(),
                                        p.at("count").get<std::uint64_t>());
  return {std::move(values), circuit_hash(c)};
}

TaskOutput run_stage_step(const json& p) {
  const std::string op = p.at("op").get<std::string>();
  if (op == "sleep") {
    const double seconds = p.at("seconds").get<double>();
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    return {seconds, std::nullopt};
  }
  if (op == "expectation") return run_expectation(p);
  throw InvalidArgument("unknown stage_step op '" + op + "'");
}

}  // namespace

Task make_expectation_task(std::string id, const Circuit& c, const Observable& obs,
                           std::optional<ShotOptions> shots) {
  json p = circuit_payload(c, shots);
  p["observable"] = to_json(obs);
  return make_task(std::move(id), TaskKind::expectation, std::move(p));
}

Task make_cost_task(std::string id, const Circuit& c, const Observable& obs,
                    std::optional<ShotOptions> shots) {
  json p = circuit_payload(c, shots);
  p["observable"] = to_json(obs);
  return make_task(std::move(id), TaskKind::cost_eval, std::move(p));
}

Task make_run_task(std::string id, const Circuit& c, std::optional<ShotOptions> shots) {
  return make_task(std::move(id), TaskKind::circuit_run, circuit_payload(c, shots));
}

Task make_fragment_task(std::string id, const Circuit& c, const Observable& obs,
                        std::optional<ShotOptions> shots) {
  json p = circuit_payload(c, shots);
  p["observable"] = to_json(obs);
  return make_task(std::move(id), TaskKind::fragment_job, std::move(p));
}

Task make_trajectory_task(std::string id, const Circuit& c, const Observable& obs,
                          const NoiseModel& noise, std::uint64_t seed, std::uint64_t first,
                          std::uint64_t count) {
  json p = {{"circuit", to_json(c)},
            {"observable", to_json(obs)},
            {"noise_p", noise.depolarizing_p},
            {"seed", seed},
            {"first", first},
            {"count", count}};
  Task t = make_task(std::move(id), TaskKind::noisy_trajectory, std::move(p));
  t.cost_hint = static_cast<double>(count * c.size());
  return t;
}

Task make_sleep_task(std::string id, double seconds) {
  Task t = make_task(std::move(id), TaskKind::stage_step, {{"op", "sleep"}, {"seconds", seconds}});
  t.cost_hint = seconds;
  return t;
}

std::string indexed_id(const std::string& prefix, std::size_t index, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, index);
  return prefix + buf;
}

TaskHandler default_task_handler() {
  return [](const Task& task) -> TaskOutput {
    switch (task.kind) {
      case TaskKind::circuit_run:
        return run_circuit(task.payload);
      case TaskKind::expectation:
      case TaskKind::cost_eval:
        return run_expectation(task.payload);
      case TaskKind::fragment_job:
        return run_fragment(task.payload);
      case TaskKind::noisy_trajectory:
        return run_trajectories(task.payload);
      case TaskKind::stage_step:
        return run_stage_step(task.payload);
    }
    throw InvalidArgument("unhandled task kind");
  };
}

}  // namespace qmini
