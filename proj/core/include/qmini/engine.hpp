#pragma once

// Mini-app executor and cluster manager.
//
// Work is described as serializable Tasks; an Executor created from a
// ResourceSpec runs them on a backend (in-line, a FIFO worker pool, or the
// fixed-rank cluster used by distributed simulation) and returns one timed
// TaskResult per task, ordered by task id.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmini/cluster.hpp"
#include "qmini/statevector.hpp"

namespace qmini {

enum class TaskKind {
  circuit_run,
  expectation,
  fragment_job,
  noisy_trajectory,
  cost_eval,
  stage_step,
};

std::string_view to_string(TaskKind kind) noexcept;
TaskKind task_kind_from_string(std::string_view name);

struct Task {
  std::string id;
  TaskKind kind = TaskKind::circuit_run;
  nlohmann::json payload;
  std::optional<double> cost_hint;
};

nlohmann::json to_json(const Task& t);
Task task_from_json(const nlohmann::json& j);

/// Expectation value, vector of values, histogram, or a hex state digest.
using Outcome = std::variant<double, std::vector<double>, Histogram, std::string>;

nlohmann::json outcome_to_json(const Outcome& o);
Outcome outcome_from_json(const nlohmann::json& j);

/// What a task handler hands back to the executor.
struct TaskOutput {
  Outcome value;
  std::optional<std::uint64_t> circuit_hash;
};

struct TaskResult {
  std::string task_id;
  TaskKind kind = TaskKind::circuit_run;
  std::optional<Outcome> value;
  std::optional<std::string> error;
  std::optional<std::uint64_t> circuit_hash;
  int worker_id = 0;
  double start = 0.0;  ///< seconds on the process monotonic clock
  double end = 0.0;
  double wall_time = 0.0;

  bool ok() const noexcept { return !error.has_value(); }
  /// The double outcome; throws ExecutionError carrying the task's error.
  double scalar() const;
  const std::vector<double>& vector() const;
};

/// Seconds since the first call in this process, from a steady clock.
double monotonic_seconds();

using TaskHandler = std::function<TaskOutput(const Task&)>;

enum class Backend { serial, pool, sharded_cluster };

std::string_view to_string(Backend b) noexcept;
Backend backend_from_string(std::string_view name);

struct ResourceSpec {
  std::size_t nodes = 1;
  std::size_t pes_per_node = 1;
  Backend backend = Backend::serial;
  /// Heterogeneity tag (cpu/gpu/qpu); every shipped worker is "cpu".
  std::string worker_class = "cpu";

  std::size_t total_pes() const noexcept { return nodes * pes_per_node; }
  void validate() const;

  friend bool operator==(const ResourceSpec&, const ResourceSpec&) = default;
};

nlohmann::json to_json(const ResourceSpec& r);
ResourceSpec resource_spec_from_json(const nlohmann::json& j);

/// Environment variable that caps pool worker threads (e.g. on CI).
inline constexpr const char* kMaxWorkersEnv = "QMINI_MAX_WORKERS";

/// Picks which queued task a free worker runs next. FIFO is the only shipped
/// policy; cost-aware placement would plug in here.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  /// Index into `queue` of the task `worker_id` should run. Queue is non-empty.
  virtual std::size_t pick(std::span<const Task* const> queue, int worker_id) = 0;
};

class FifoScheduler final : public Scheduler {
 public:
  std::size_t pick(std::span<const Task* const>, int) override { return 0; }
};

/// Replays a scheduler over tasks with known durations on `workers` virtual
/// workers (ties go to the lowest worker id). Returns the worker id per task.
std::vector<int> simulate_schedule(Scheduler& scheduler, std::span<const Task> tasks,
                                   std::span<const double> durations, std::size_t workers);

class Executor {
 public:
  virtual ~Executor() = default;

  const ResourceSpec& spec() const noexcept { return spec_; }
  virtual std::size_t worker_count() const noexcept = 0;

  /// Runs every task and blocks until all finish. Task failures are captured
  /// in the corresponding result. Duplicate ids are rejected up front.
  std::vector<TaskResult> submit_all(std::vector<Task> tasks);

  /// Joins all workers. Further submissions throw.
  virtual void shutdown() = 0;

  /// Rank cluster backing a sharded_cluster executor, otherwise null.
  virtual RankCluster* cluster() noexcept { return nullptr; }

 protected:
  Executor(ResourceSpec spec, TaskHandler handler)
      : spec_(std::move(spec)), handler_(std::move(handler)) {}

  /// Backend hook: execute tasks (ids already validated), any order.
  virtual std::vector<TaskResult> execute(std::vector<Task> tasks) = 0;
  TaskResult run_one(const Task& task, int worker_id) const;

 private:
  ResourceSpec spec_;
  TaskHandler handler_;
};

/// Builtin handler for every TaskKind (defined alongside the task payloads).
TaskHandler default_task_handler();

std::unique_ptr<Executor> create_executor(const ResourceSpec& spec,
                                          TaskHandler handler = default_task_handler(),
                                          std::shared_ptr<Scheduler> scheduler = nullptr);

/// Free-function form of Executor::submit_all.
std::vector<TaskResult> submit_all(Executor& exec, std::vector<Task> tasks);

enum class Reducer { sum, weighted_sum, mean, histogram_merge };

Reducer reducer_from_string(std::string_view name);

/// Deterministic fold over results in task-id order.
Outcome aggregate(std::span<const TaskResult> results, Reducer reducer,
                  std::span<const double> weights = {});

}  // namespace qmini
