#pragma once

// Variational loop: parameterized ansatz, Hamiltonian cost, parameter-shift
// gradients and two optimizers (gradient descent, SPSA).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmini/circuit.hpp"
#include "qmini/engine.hpp"
#include "qmini/errors.hpp"
#include "qmini/observable.hpp"
#include "qmini/tasks.hpp"

namespace qmini {

/// Hardware-efficient ansatz: per layer RY then RZ on every qubit followed by
/// a CX ladder. 2 * n * layers parameters.
Circuit hardware_efficient_ansatz(std::size_t num_qubits, std::size_t layers);

struct WeightedEdge {
  Qubit a = 0;
  Qubit b = 0;
  double weight = 1.0;
};

struct Graph {
  std::size_t num_nodes = 0;
  std::vector<WeightedEdge> edges;

  void validate() const;
};

nlohmann::json to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

/// Cost whose minimum is minus the maximum cut: sum_e w_e (Z_a Z_b - 1) / 2.
Observable maxcut_hamiltonian(const Graph& g);

/// QAOA with p rounds. Parameters are ordered [gamma_1, beta_1, ..., gamma_p, beta_p].
Circuit qaoa_ansatz(const Graph& g, std::size_t rounds);

double cut_value(const Graph& g, std::uint64_t assignment);
/// Exhaustive maximum cut (graphs up to 24 nodes).
double brute_force_maxcut(const Graph& g);

enum class EvalMode { sequential, concurrent };

std::string_view to_string(EvalMode m) noexcept;
EvalMode eval_mode_from_string(std::string_view name);

/// Evaluates bound copies of an ansatz as cost_eval tasks. Sequential mode
/// uses an in-line executor, concurrent mode the supplied pool; the numeric
/// path is the same either way.
class CostEvaluator {
 public:
  CostEvaluator(Circuit ansatz, Observable hamiltonian, Executor& exec,
                std::optional<ShotOptions> shots = std::nullopt);

  const Circuit& ansatz() const noexcept { return ansatz_; }
  std::size_t num_params() const noexcept { return ansatz_.num_params(); }

  double cost(std::span<const double> params);
  /// Cost at `params` and its parameter-shift gradient, in one batch.
  std::pair<double, std::vector<double>> cost_and_gradient(std::span<const double> params);
  /// Costs of several parameter vectors in one batch.
  std::vector<double> costs(std::span<const std::vector<double>> points);

  std::size_t evaluations() const noexcept { return evaluations_; }
  /// Every task result produced so far.
  const std::vector<TaskResult>& log() const noexcept { return log_; }

 private:
  std::vector<double> run_batch(std::vector<Circuit> circuits);

  Circuit ansatz_;
  Observable hamiltonian_;
  Executor& exec_;
  std::optional<ShotOptions> shots_;
  std::size_t evaluations_ = 0;
  std::size_t batches_ = 0;
  std::vector<TaskResult> log_;
};

/// Exact cost of a parameterized circuit.
double cost(const Circuit& ansatz, std::span<const double> params, const Observable& h);

/// Parameter-shift gradient, evaluated directly. Each occurrence of a
/// parameter contributes scale * [C(+pi/2) - C(-pi/2)] / 2.
std::vector<double> parameter_shift_grad(const Circuit& ansatz, std::span<const double> params,
                                         const Observable& h);

enum class OptimizerKind { gradient_descent, spsa };

std::string_view to_string(OptimizerKind k) noexcept;
OptimizerKind optimizer_from_string(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::gradient_descent;
  std::size_t max_iterations = 200;
  double learning_rate = 0.1;
  /// Converged when |c_k - c_{k-window}| < tolerance, or (gradient descent)
  /// when every gradient component is below it.
  double tolerance = 1e-8;
  std::size_t window = 5;
  /// SPSA gain schedule a_k = a / (k + 1 + A)^alpha, c_k = c / (k + 1)^gamma.
  double spsa_a = 0.2;
  double spsa_c = 0.1;
  double spsa_stability = 10.0;
  double spsa_alpha = 0.602;
  double spsa_gamma = 0.101;
  /// Starting point; drawn uniformly from [-init_range, init_range] when empty.
  std::vector<double> initial_params;
  double init_range = 0.1;

  void validate() const;
};

nlohmann::json to_json(const OptimizerConfig& c);
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

struct IterationRecord {
  std::size_t iteration = 0;
  std::vector<double> params;
  double cost = 0.0;
  double gradient_norm = 0.0;
  double wall_time = 0.0;
};

struct VqaTrace {
  std::vector<IterationRecord> iterations;
  std::vector<double> final_params;
  double final_cost = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
};

nlohmann::json to_json(const VqaTrace& t);

/// Raised when the cost turns non-finite; carries the trace up to that point.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& message, VqaTrace trace)
      : Error(message), trace_(std::move(trace)) {}
  const VqaTrace& trace() const noexcept { return trace_; }

 private:
  VqaTrace trace_;
};

VqaTrace minimize(CostEvaluator& evaluator, const OptimizerConfig& config, std::uint64_t seed);

/// Convenience form that builds the executor for `mode` (a pool of
/// `workers` threads for concurrent mode).
VqaTrace minimize(const Circuit& ansatz, const Observable& h, const OptimizerConfig& config,
                  std::uint64_t seed, EvalMode mode, std::size_t workers = 4);

struct QaoaResult {
  VqaTrace trace;
  double optimal_cut = 0.0;
  /// Probability mass of the final state on maximum-cut assignments.
  double optimal_probability = 0.0;
  std::string most_likely_bitstring;
  double most_likely_cut = 0.0;
  /// Best cut among `shots` samples of the final state.
  double best_sampled_cut = 0.0;
  std::string best_sampled_bitstring;
  Histogram samples;
};

QaoaResult qaoa_maxcut(const Graph& g, std::size_t rounds, const OptimizerConfig& config,
                       std::uint64_t seed, Executor& exec, std::uint64_t shots = 1024,
                       std::vector<TaskResult>* log = nullptr);

nlohmann::json to_json(const QaoaResult& r);

}  // namespace qmini
