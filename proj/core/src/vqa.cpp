#include "qmini/vqa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "qmini/rng.hpp"
#include "qmini/statevector.hpp"

namespace qmini {

using nlohmann::json;

Circuit hardware_efficient_ansatz(std::size_t num_qubits, std::size_t layers) {
  if (num_qubits == 0) throw InvalidArgument("ansatz needs at least one qubit");
  if (layers == 0) throw InvalidArgument("ansatz needs at least one layer");
  Circuit c(num_qubits, "hea-n" + std::to_string(num_qubits) + "-l" + std::to_string(layers));
  std::uint32_t p = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    for (Qubit q = 0; q < num_qubits; ++q) {
      c.add(Gate::symbolic(GateKind::RY, q, {p++}));
      c.add(Gate::symbolic(GateKind::RZ, q, {p++}));
    }
    for (Qubit q = 0; q + 1 < num_qubits; ++q) c.cx(q, q + 1);
  }
  return c;
}

void Graph::validate() const {
  if (num_nodes == 0) throw InvalidArgument("graph needs at least one node");
  if (num_nodes > 24) throw ResourceLimit("graphs above 24 nodes are not supported");
  for (const auto& e : edges) {
    if (e.a >= num_nodes || e.b >= num_nodes) {
      throw InvalidArgument("edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) +
                            ") references a node outside the graph");
    }
    if (e.a == e.b) throw InvalidArgument("self-loop on node " + std::to_string(e.a));
    if (!std::isfinite(e.weight)) throw InvalidArgument("edge weight must be finite");
  }
}

json to_json(const Graph& g) {
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back({e.a, e.b, e.weight});
  return {{"num_nodes", g.num_nodes}, {"edges", edges}};
}

Graph graph_from_json(const json& j) {
  Graph g;
  g.num_nodes = j.at("num_nodes").get<std::size_t>();
  for (const auto& e : j.at("edges")) {
    WeightedEdge edge;
    edge.a = e.at(0).get<Qubit>();
    edge.b = e.at(1).get<Qubit>();
    edge.weight = e.size() > 2 ? e.at(2).get<double>() : 1.0;
    g.edges.push_back(edge);
  }
  g.validate();
  return g;
}

Observable maxcut_hamiltonian(const Graph& g) {
  g.validate();
  std::vector<PauliString> terms;
  double constant = 0.0;
  for (const auto& e : g.edges) {
    PauliString zz{std::vector<Pauli>(g.num_nodes, Pauli::I), e.weight / 2.0};
    zz.ops[e.a] = zz.ops[e.b] = Pauli::Z;
    terms.push_back(std::move(zz));
    constant -= e.weight / 2.0;
  }
  terms.push_back(PauliString{std::vector<Pauli>(g.num_nodes, Pauli::I), constant});
  return Observable(g.num_nodes, std::move(terms));
}

Circuit qaoa_ansatz(const Graph& g, std::size_t rounds) {
  g.validate();
  if (rounds == 0) throw InvalidArgument("QAOA needs at least one round");
  Circuit c(g.num_nodes, "qaoa-p" + std::to_string(rounds));
  for (Qubit q = 0; q < g.num_nodes; ++q) c.h(q);
  for (std::size_t r = 0; r < rounds; ++r) {
    const auto gamma = static_cast<std::uint32_t>(2 * r);
    const auto beta = gamma + 1;
    // exp(-i gamma w/2 Z_a Z_b) as CX, RZ(w * gamma), CX.
    for (const auto& e : g.edges) {
      c.cx(e.a, e.b);
      c.add(Gate::symbolic(GateKind::RZ, e.b, {gamma, e.weight}));
      c.cx(e.a, e.b);
    }
    for (Qubit q = 0; q < g.num_nodes; ++q) c.add(Gate::symbolic(GateKind::RX, q, {beta, 2.0}));
  }
  c.reserve_params(2 * rounds);
  return c;
}

double cut_value(const Graph& g, std::uint64_t assignment) {
  double total = 0.0;
  for (const auto& e : g.edges) {
    if (((assignment >> e.a) ^ (assignment >> e.b)) & 1U) total += e.weight;
  }
  return total;
}

double brute_force_maxcut(const Graph& g) {
  g.validate();
  double best = 0.0;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << g.num_nodes); ++a) {
    best = std::max(best, cut_value(g, a));
  }
  return best;
}

std::string_view to_string(EvalMode m) noexcept {
  return m == EvalMode::sequential ? "sequential" : "concurrent";
}

EvalMode eval_mode_from_string(std::string_view name) {
  if (name == "sequential") return EvalMode::sequential;
  if (name == "concurrent") return EvalMode::concurrent;
  throw InvalidArgument("unknown evaluation mode '" + std::string(name) + "'");
}

CostEvaluator::CostEvaluator(Circuit ansatz, Observable hamiltonian, Executor& exec,
                             std::optional<ShotOptions> shots)
    : ansatz_(std::move(ansatz)), hamiltonian_(std::move(hamiltonian)), exec_(exec),
      shots_(shots) {
  if (hamiltonian_.num_qubits() != ansatz_.num_qubits()) {
    throw InvalidArgument("Hamiltonian acts on " + std::to_string(hamiltonian_.num_qubits()) +
                          " qubits, ansatz on " + std::to_string(ansatz_.num_qubits()));
  }
  for (const Gate& g : ansatz_.gates()) {
    if (g.param_ref() && !is_rotation(g.kind())) {
      throw UnsupportedAnsatz("parameter-shift needs rotation gates, found parameterized " +
                              std::string(to_string(g.kind())));
    }
  }
}

std::vector<double> CostEvaluator::run_batch(std::vector<Circuit> circuits) {
  const std::string prefix = indexed_id("eval-b", batches_++) + "-";
  std::vector<Task> tasks;
  tasks.reserve(circuits.size());
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    std::optional<ShotOptions> shots;
    if (shots_) shots = ShotOptions{shots_->shots, derive_seed(shots_->seed, evaluations_ + i)};
    tasks.push_back(make_cost_task(indexed_id(prefix, i, 5), circuits[i], hamiltonian_, shots));
  }
  auto results = exec_.submit_all(std::move(tasks));
  evaluations_ += circuits.size();
  std::vector<double> values;
  values.reserve(results.size());
  for (const auto& r : results) values.push_back(r.scalar());
  log_.insert(log_.end(), std::make_move_iterator(results.begin()),
              std::make_move_iterator(results.end()));
  return values;
}

double CostEvaluator::cost(std::span<const double> params) {
  return run_batch({bind_params(ansatz_, params)}).front();
}

std::vector<double> CostEvaluator::costs(std::span<const std::vector<double>> points) {
  std::vector<Circuit> circuits;
  circuits.reserve(points.size());
  for (const auto& p : points) circuits.push_back(bind_params(ansatz_, p));
  return run_batch(std::move(circuits));
}

namespace {

struct Occurrence {
  std::size_t gate_index;
  ParamRef ref;
};

std::vector<Occurrence> occurrences(const Circuit& ansatz) {
  std::vector<Occurrence> out;
  for (std::size_t i = 0; i < ansatz.size(); ++i) {
    if (const auto& ref = ansatz.gates()[i].param_ref()) out.push_back({i, *ref});
  }
  return out;
}

/// [bound, occ0+, occ0-, occ1+, occ1-, ...]
std::vector<Circuit> shifted_circuits(const Circuit& ansatz, std::span<const double> params,
                                      const std::vector<Occurrence>& occ) {
  const Circuit bound = bind_params(ansatz, params);
  std::vector<Circuit> out;
  out.reserve(1 + 2 * occ.size());
  out.push_back(bound);
  constexpr double shift = std::numbers::pi / 2;
  for (const auto& o : occ) {
    const Gate& g = bound.gates()[o.gate_index];
    for (double sign : {1.0, -1.0}) {
      Circuit shifted = bound;
      shifted.replace(o.gate_index, g.with_angle(*g.angle() + sign * shift));
      out.push_back(std::move(shifted));
    }
  }
  return out;
}

std::vector<double> assemble_gradient(std::size_t num_params, const std::vector<Occurrence>& occ,
                                      std::span<const double> values) {
  std::vector<double> grad(num_params, 0.0);
  for (std::size_t k = 0; k < occ.size(); ++k) {
    grad[occ[k].ref.index] +=
        occ[k].ref.scale * (values[1 + 2 * k] - values[2 + 2 * k]) / 2.0;
  }
  return grad;
}

}  // namespace

std::pair<double, std::vector<double>> CostEvaluator::cost_and_gradient(
    std::span<const double> params) {
  const auto occ = occurrences(ansatz_);
  const auto values = run_batch(shifted_circuits(ansatz_, params, occ));
  return {values.front(), assemble_gradient(num_params(), occ, values)};
}

double cost(const Circuit& ansatz, std::span<const double> params, const Observable& h) {
  return expectation(run(bind_params(ansatz, params)), h);
}

std::vector<double> parameter_shift_grad(const Circuit& ansatz, std::span<const double> params,
                                         const Observable& h) {
  for (const Gate& g : ansatz.gates()) {
    if (g.param_ref() && !is_rotation(g.kind())) {
      throw UnsupportedAnsatz("parameter-shift needs rotation gates, found parameterized " +
                              std::string(to_string(g.kind())));
    }
  }
  const auto occ = occurrences(ansatz);
  const auto circuits = shifted_circuits(ansatz, params, occ);
  std::vector<double> values;
  values.reserve(circuits.size());
  for (const auto& c : circuits) values.push_back(expectation(run(c), h));
  return assemble_gradient(ansatz.num_params(), occ, values);
}

std::string_view to_string(OptimizerKind k) noexcept {
  return k == OptimizerKind::gradient_descent ? "gradient_descent" : "spsa";
}

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "gradient_descent" || name == "gd") return OptimizerKind::gradient_descent;
  if (name == "spsa") return OptimizerKind::spsa;
  throw InvalidArgument("unknown optimizer '" + std::string(name) + "'");
}

void OptimizerConfig::validate() const {
  if (max_iterations == 0) throw InvalidArgument("max_iterations must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be positive and finite");
  }
  if (!(tolerance >= 0.0)) throw InvalidArgument("tolerance must be >= 0");
  if (window == 0) throw InvalidArgument("convergence window must be >= 1");
  if (!(spsa_a > 0.0) || !(spsa_c > 0.0)) throw InvalidArgument("SPSA gains must be positive");
  if (!(init_range >= 0.0)) throw InvalidArgument("init_range must be >= 0");
}

json to_json(const OptimizerConfig& c) {
  json j = {{"optimizer", to_string(c.kind)},
            {"max_iterations", c.max_iterations},
            {"learning_rate", c.learning_rate},
            {"tolerance", c.tolerance},
            {"window", c.window},
            {"init_range", c.init_range}};
  if (c.kind == OptimizerKind::spsa) {
    j["spsa"] = {{"a", c.spsa_a},
                 {"c", c.spsa_c},
                 {"stability", c.spsa_stability},
                 {"alpha", c.spsa_alpha},
                 {"gamma", c.spsa_gamma}};
  }
  if (!c.initial_params.empty()) j["initial_params"] = c.initial_params;
  return j;
}

OptimizerConfig optimizer_config_from_json(const json& j) {
  OptimizerConfig c;
  if (j.contains("optimizer")) c.kind = optimizer_from_string(j.at("optimizer").get<std::string>());
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.window = j.value("window", c.window);
  c.init_range = j.value("init_range", c.init_range);
  if (j.contains("spsa")) {
    const auto& s = j.at("spsa");
    c.spsa_a = s.value("a", c.spsa_a);
    c.spsa_c = s.value("c", c.spsa_c);
    c.spsa_stability = s.value("stability", c.spsa_stability);
    c.spsa_alpha = s.value("alpha", c.spsa_alpha);
    c.spsa_gamma = s.value("gamma", c.spsa_gamma);
  }
  if (j.contains("initial_params")) c.initial_params = j.at("initial_params").get<std::vector<double>>();
  c.validate();
  return c;
}

json to_json(const VqaTrace& t) {
  json iterations = json::array();
  for (const auto& r : t.iterations) {
    iterations.push_back({{"iteration", r.iteration},
                          {"params", r.params},
                          {"cost", r.cost},
                          {"gradient_norm", r.gradient_norm},
                          {"wall_time", r.wall_time}});
  }
  return {{"iterations", iterations},
          {"final_params", t.final_params},
          {"final_cost", t.final_cost},
          {"converged", t.converged},
          {"evaluations", t.evaluations}};
}

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

VqaTrace minimize(CostEvaluator& evaluator, const OptimizerConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t np = evaluator.num_params();
  Xoshiro256 rng(seed);

  std::vector<double> theta = config.initial_params;
  if (theta.empty()) {
    theta.resize(np);
    for (double& t : theta) t = (2.0 * rng.uniform() - 1.0) * config.init_range;
  } else if (theta.size() != np) {
    throw InvalidArgument("initial_params has " + std::to_string(theta.size()) +
                          " entries, ansatz has " + std::to_string(np) + " parameters");
  }

  VqaTrace trace;
  const auto fail = [&](const std::string& what) {
    trace.final_params = theta;
    trace.evaluations = evaluator.evaluations();
    throw NumericalFailure(what, trace);
  };
  const auto window_converged = [&] {
    const auto& it = trace.iterations;
    if (it.size() <= config.window) return false;
    return std::abs(it.back().cost - it[it.size() - 1 - config.window].cost) < config.tolerance;
  };

  for (std::size_t k = 0; k < config.max_iterations; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iteration = k + 1;
    rec.params = theta;
    std::vector<double> step;

    if (config.kind == OptimizerKind::gradient_descent) {
      auto [c, grad] = evaluator.cost_and_gradient(theta);
      rec.cost = c;
      rec.gradient_norm = max_abs(grad);
      if (!std::isfinite(c) || !all_finite(grad)) {
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace.iterations.push_back(rec);
        fail("cost or gradient became non-finite at iteration " + std::to_string(k + 1));
      }
      step.resize(np);
      for (std::size_t i = 0; i < np; ++i) step[i] = config.learning_rate * grad[i];
    } else {
      const double kk = static_cast<double>(k);
      const double ak = config.spsa_a / std::pow(kk + 1.0 + config.spsa_stability, config.spsa_alpha);
      const double ck = config.spsa_c / std::pow(kk + 1.0, config.spsa_gamma);
      std::vector<double> delta(np);
      for (double& d : delta) d = rng.coin() ? 1.0 : -1.0;
      std::vector<std::vector<double>> points(2, theta);
      for (std::size_t i = 0; i < np; ++i) {
        points[0][i] += ck * delta[i];
        points[1][i] -= ck * delta[i];
      }
      const auto y = evaluator.costs(points);
      rec.cost = 0.5 * (y[0] + y[1]);
      std::vector<double> ghat(np);
      for (std::size_t i = 0; i < np; ++i) ghat[i] = (y[0] - y[1]) / (2.0 * ck * delta[i]);
      rec.gradient_norm = max_abs(ghat);
      if (!std::isfinite(rec.cost) || !all_finite(ghat)) {
        trace.iterations.push_back(rec);
        fail("SPSA estimate became non-finite at iteration " + std::to_string(k + 1));
      }
      step.resize(np);
      for (std::size_t i = 0; i < np; ++i) step[i] = ak * ghat[i];
    }

    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    trace.iterations.push_back(std::move(rec));

    const bool stationary = config.kind == OptimizerKind::gradient_descent &&
                            trace.iterations.back().gradient_norm < config.tolerance;
    if (stationary || window_converged()) {
      trace.converged = true;
      break;
    }
    for (std::size_t i = 0; i < np; ++i) theta[i] -= step[i];
  }

  trace.final_params = theta;
  trace.final_cost = evaluator.cost(theta);
  if (!std::isfinite(trace.final_cost)) fail("final cost is non-finite");
  trace.evaluations = evaluator.evaluations();
  return trace;
}

VqaTrace minimize(const Circuit& ansatz, const Observable& h, const OptimizerConfig& config,
                  std::uint64_t seed, EvalMode mode, std::size_t workers) {
  ResourceSpec spec;
  if (mode == EvalMode::concurrent) {
    spec.backend = Backend::pool;
    spec.pes_per_node = std::max<std::size_t>(workers, 1);
  }
  auto exec = create_executor(spec);
  CostEvaluator evaluator(ansatz, h, *exec);
  return minimize(evaluator, config, seed);
}

QaoaResult qaoa_maxcut(const Graph& g, std::size_t rounds, const OptimizerConfig& config,
                       std::uint64_t seed, Executor& exec, std::uint64_t shots,
                       std::vector<TaskResult>* log) {
  if (shots == 0) throw InvalidArgument("qaoa_maxcut needs at least one shot");
  const Circuit ansatz = qaoa_ansatz(g, rounds);
  CostEvaluator evaluator(ansatz, maxcut_hamiltonian(g), exec);
  QaoaResult out;
  out.trace = minimize(evaluator, config, seed);
  if (log) *log = evaluator.log();
  out.optimal_cut = brute_force_maxcut(g);

  const StateVector s = run(bind_params(ansatz, out.trace.final_params));
  double best_p = -1.0;
  std::uint64_t best_i = 0;
  for (std::uint64_t i = 0; i < s.dimension(); ++i) {
    const double p = std::norm(s[i]);
    if (std::abs(cut_value(g, i) - out.optimal_cut) < 1e-9) out.optimal_probability += p;
    if (p > best_p + 1e-15) {
      best_p = p;
      best_i = i;
    }
  }
  out.most_likely_bitstring = bitstring(best_i, g.num_nodes);
  out.most_likely_cut = cut_value(g, best_i);

  out.samples = sample(s, shots, derive_seed(seed, 1));
  out.best_sampled_cut = -1.0;
  for (const auto& [bits, count] : out.samples) {
    const double value = cut_value(g, std::stoull(bits, nullptr, 2));
    if (value > out.best_sampled_cut) {
      out.best_sampled_cut = value;
      out.best_sampled_bitstring = bits;
    }
  }
  return out;
}

json to_json(const QaoaResult& r) {
  return {{"trace", to_json(r.trace)},
          {"optimal_cut", r.optimal_cut},
          {"optimal_probability", r.optimal_probability},
          {"most_likely_bitstring", r.most_likely_bitstring},
          {"most_likely_cut", r.most_likely_cut},
          {"best_sampled_cut", r.best_sampled_cut},
          {"best_sampled_bitstring", r.best_sampled_bitstring},
          {"samples", r.samples}};
}

}  // namespace qmini
