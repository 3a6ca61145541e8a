#include "qmini/engine.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <queue>
#include <set>
#include <thread>

#include "qmini/errors.hpp"

namespace qmini {

namespace {

constexpr std::array<std::string_view, 6> kTaskKindNames = {
    "circuit_run", "expectation", "fragment_job", "noisy_trajectory", "cost_eval", "stage_step"};
constexpr std::array<std::string_view, 3> kBackendNames = {"serial", "pool", "sharded_cluster"};

std::size_t capped_worker_count(std::size_t requested) {
  if (const char* env = std::getenv(kMaxWorkersEnv)) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) return std::min(requested, static_cast<std::size_t>(cap));
  }
  return requested;
}

void sort_by_id(std::vector<TaskResult>& results) {
  std::sort(results.begin(), results.end(),
            [](const TaskResult& a, const TaskResult& b) { return a.task_id < b.task_id; });
}

class SerialExecutor final : public Executor {
 public:
  SerialExecutor(ResourceSpec spec, TaskHandler handler)
      : Executor(std::move(spec), std::move(handler)) {}

  std::size_t worker_count() const noexcept override { return 1; }
  void shutdown() override { stopped_ = true; }

 protected:
  std::vector<TaskResult> execute(std::vector<Task> tasks) override {
    if (stopped_) throw ExecutionError("executor has been shut down");
    std::vector<TaskResult> results;
    results.reserve(tasks.size());
    for (const Task& t : tasks) results.push_back(run_one(t, 0));
    return results;
  }

 private:
  bool stopped_ = false;
};

/// Greedy pull scheduling: idle workers take the next task the scheduler
/// picks from a shared queue.
class PoolExecutor final : public Executor {
 public:
  PoolExecutor(ResourceSpec spec, TaskHandler handler, std::shared_ptr<Scheduler> scheduler)
      : Executor(std::move(spec), std::move(handler)), scheduler_(std::move(scheduler)) {
    const std::size_t n = capped_worker_count(this->spec().total_pes());
    workers_.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
      workers_.emplace_back(
          [this, w, live = std::make_shared<detail::WorkerThreadScope>()] { loop(static_cast<int>(w)); });
    }
  }

  ~PoolExecutor() override { shutdown(); }

  std::size_t worker_count() const noexcept override { return workers_.size(); }

  void shutdown() override {
    {
      std::lock_guard lock(mutex_);
      if (stopping_) return;
      stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) {
      if (t.joinable()) t.join();
    }
  }

 protected:
  std::vector<TaskResult> execute(std::vector<Task> tasks) override {
    Batch batch;
    batch.results.resize(tasks.size());
    batch.remaining = tasks.size();
    {
      std::lock_guard lock(mutex_);
      if (stopping_) throw ExecutionError("executor has been shut down");
      for (std::size_t i = 0; i < tasks.size(); ++i) queue_.push_back({&tasks[i], &batch, i});
    }
    cv_.notify_all();
    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [&] { return batch.remaining == 0; });
    return std::move(batch.results);
  }

 private:
  struct Batch {
    std::vector<TaskResult> results;
    std::size_t remaining = 0;
  };
  struct Pending {
    const Task* task;
    Batch* batch;
    std::size_t index;
  };

  void loop(int worker_id) {
    for (;;) {
      Pending job{};
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (queue_.empty()) return;  // stopping and drained
        std::vector<const Task*> view;
        view.reserve(queue_.size());
        for (const auto& p : queue_) view.push_back(p.task);
        const std::size_t pick = std::min(scheduler_->pick(view, worker_id), queue_.size() - 1);
        job = queue_[pick];
        queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      TaskResult r = run_one(*job.task, worker_id);
      {
        std::lock_guard lock(mutex_);
        job.batch->results[job.index] = std::move(r);
        if (--job.batch->remaining == 0) done_cv_.notify_all();
      }
    }
  }

  std::shared_ptr<Scheduler> scheduler_;
  std::vector<std::thread> workers_;
  std::deque<Pending> queue_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  bool stopping_ = false;
};

/// Fixed-rank workers; batches run as an SPMD job in which every rank pulls
/// from the shared queue. The same ranks back distributed state vectors.
class ShardedClusterExecutor final : public Executor {
 public:
  ShardedClusterExecutor(ResourceSpec spec, TaskHandler handler,
                         std::shared_ptr<Scheduler> scheduler)
      : Executor(std::move(spec), std::move(handler)),
        scheduler_(std::move(scheduler)),
        cluster_(std::make_unique<RankCluster>(static_cast<int>(this->spec().total_pes()))) {}

  std::size_t worker_count() const noexcept override {
    return static_cast<std::size_t>(cluster_->size());
  }
  void shutdown() override { cluster_->shutdown(); }
  RankCluster* cluster() noexcept override { return cluster_.get(); }

 protected:
  std::vector<TaskResult> execute(std::vector<Task> tasks) override {
    std::vector<TaskResult> results(tasks.size());
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < tasks.size(); ++i) queue.push_back(i);
    std::mutex mutex;
    cluster_->spmd([&](Communicator& comm) {
      for (;;) {
        std::size_t index = 0;
        {
          std::lock_guard lock(mutex);
          if (queue.empty()) return;
          std::vector<const Task*> view;
          for (std::size_t i : queue) view.push_back(&tasks[i]);
          const std::size_t pick = std::min(scheduler_->pick(view, comm.rank()), queue.size() - 1);
          index = queue[pick];
          queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        results[index] = run_one(tasks[index], comm.rank());
      }
    });
    return results;
  }

 private:
  std::shared_ptr<Scheduler> scheduler_;
  std::unique_ptr<RankCluster> cluster_;
};

}  // namespace

std::string_view to_string(TaskKind kind) noexcept {
  return kTaskKindNames[static_cast<std::size_t>(kind)];
}

TaskKind task_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kTaskKindNames.size(); ++i) {
    if (kTaskKindNames[i] == name) return static_cast<TaskKind>(i);
  }
  throw InvalidArgument("unknown task kind '" + std::string(name) + "'");
}

std::string_view to_string(Backend b) noexcept { return kBackendNames[static_cast<std::size_t>(b)]; }

Backend backend_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kBackendNames.size(); ++i) {
    if (kBackendNames[i] == name) return static_cast<Backend>(i);
  }
  throw InvalidArgument("unknown backend '" + std::string(name) + "'");
}

nlohmann::json to_json(const Task& t) {
  nlohmann::json j{{"id", t.id}, {"kind", to_string(t.kind)}, {"payload", t.payload}};
  if (t.cost_hint) j["cost_hint"] = *t.cost_hint;
  return j;
}

Task task_from_json(const nlohmann::json& j) {
  Task t;
  t.id = j.at("id").get<std::string>();
  t.kind = task_kind_from_string(j.at("kind").get<std::string>());
  t.payload = j.value("payload", nlohmann::json::object());
  if (j.contains("cost_hint")) t.cost_hint = j.at("cost_hint").get<double>();
  return t;
}

nlohmann::json outcome_to_json(const Outcome& o) {
  return std::visit([](const auto& v) -> nlohmann::json { return v; }, o);
}

Outcome outcome_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_object()) return j.get<Histogram>();
  if (j.is_string()) return j.get<std::string>();
  throw InvalidArgument("unrecognized outcome JSON");
}

double TaskResult::scalar() const {
  if (error) throw ExecutionError("task " + task_id + " failed: " + *error);
  if (!value || !std::holds_alternative<double>(*value)) {
    throw InvalidArgument("task " + task_id + " has no scalar outcome");
  }
  return std::get<double>(*value);
}

const std::vector<double>& TaskResult::vector() const {
  if (error) throw ExecutionError("task " + task_id + " failed: " + *error);
  if (!value || !std::holds_alternative<std::vector<double>>(*value)) {
    throw InvalidArgument("task " + task_id + " has no vector outcome");
  }
  return std::get<std::vector<double>>(*value);
}

double monotonic_seconds() {
  static const auto epoch = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch).count();
}

void ResourceSpec::validate() const {
  if (nodes < 1) throw InvalidArgument("resources: nodes must be >= 1");
  if (pes_per_node < 1) throw InvalidArgument("resources: pes_per_node must be >= 1");
  if (backend == Backend::sharded_cluster) {
    const std::size_t n = total_pes();
    if ((n & (n - 1)) != 0) {
      throw InvalidArgument("sharded_cluster needs a power-of-two PE count, got " +
                            std::to_string(n));
    }
  }
}

nlohmann::json to_json(const ResourceSpec& r) {
  return {{"nodes", r.nodes},
          {"pes_per_node", r.pes_per_node},
          {"backend", to_string(r.backend)},
          {"worker_class", r.worker_class}};
}

ResourceSpec resource_spec_from_json(const nlohmann::json& j) {
  ResourceSpec r;
  r.nodes = j.value("nodes", std::size_t{1});
  r.pes_per_node = j.value("pes_per_node", std::size_t{1});
  r.backend = backend_from_string(j.value("backend", std::string("serial")));
  r.worker_class = j.value("worker_class", std::string("cpu"));
  return r;
}

std::vector<int> simulate_schedule(Scheduler& scheduler, std::span<const Task> tasks,
                                   std::span<const double> durations, std::size_t workers) {
  if (durations.size() != tasks.size()) {
    throw InvalidArgument("simulate_schedule: one duration per task required");
  }
  if (workers == 0) throw InvalidArgument("simulate_schedule: workers must be >= 1");
  std::vector<std::size_t> queue(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) queue[i] = i;
  std::vector<int> assignment(tasks.size(), -1);
  // (time the worker becomes free, worker id); earliest then lowest id first.
  using Slot = std::pair<double, int>;
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> free;
  for (std::size_t w = 0; w < workers; ++w) free.push({0.0, static_cast<int>(w)});
  while (!queue.empty()) {
    const auto [t, w] = free.top();
    free.pop();
    std::vector<const Task*> view;
    for (std::size_t i : queue) view.push_back(&tasks[i]);
    const std::size_t pick = std::min(scheduler.pick(view, w), queue.size() - 1);
    const std::size_t index = queue[pick];
    queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(pick));
    assignment[index] = w;
    free.push({t + durations[index], w});
  }
  return assignment;
}

std::vector<TaskResult> Executor::submit_all(std::vector<Task> tasks) {
  std::set<std::string> seen;
  for (const Task& t : tasks) {
    if (!seen.insert(t.id).second) throw InvalidArgument("duplicate task id '" + t.id + "'");
  }
  std::vector<TaskResult> results = execute(std::move(tasks));
  sort_by_id(results);
  return results;
}

TaskResult Executor::run_one(const Task& task, int worker_id) const {
  TaskResult r;
  r.task_id = task.id;
  r.kind = task.kind;
  r.worker_id = worker_id;
  r.start = monotonic_seconds();
  try {
    TaskOutput out = handler_(task);
    r.value = std::move(out.value);
    r.circuit_hash = out.circuit_hash;
  } catch (const std::exception& e) {
    r.error = e.what();
  } catch (...) {
    r.error = "unknown failure";
  }
  r.end = monotonic_seconds();
  r.wall_time = std::max(0.0, r.end - r.start);
  return r;
}

std::unique_ptr<Executor> create_executor(const ResourceSpec& spec, TaskHandler handler,
                                          std::shared_ptr<Scheduler> scheduler) {
  spec.validate();
  if (!handler) throw InvalidArgument("create_executor: empty task handler");
  if (!scheduler) scheduler = std::make_shared<FifoScheduler>();
  switch (spec.backend) {
    case Backend::serial:
      return std::make_unique<SerialExecutor>(spec, std::move(handler));
    case Backend::pool:
      return std::make_unique<PoolExecutor>(spec, std::move(handler), std::move(scheduler));
    case Backend::sharded_cluster:
      return std::make_unique<ShardedClusterExecutor>(spec, std::move(handler),
                                                      std::move(scheduler));
  }
  throw InvalidArgument("unknown backend");
}

std::vector<TaskResult> submit_all(Executor& exec, std::vector<Task> tasks) {
  return exec.submit_all(std::move(tasks));
}

Reducer reducer_from_string(std::string_view name) {
  if (name == "sum") return Reducer::sum;
  if (name == "weighted_sum") return Reducer::weighted_sum;
  if (name == "mean") return Reducer::mean;
  if (name == "histogram_merge") return Reducer::histogram_merge;
  throw InvalidArgument("unknown reducer '" + std::string(name) + "'");
}

Outcome aggregate(std::span<const TaskResult> results, Reducer reducer,
                  std::span<const double> weights) {
  std::vector<const TaskResult*> ordered;
  ordered.reserve(results.size());
  for (const auto& r : results) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const TaskResult* a, const TaskResult* b) { return a->task_id < b->task_id; });

  for (const TaskResult* r : ordered) {
    if (!r->ok()) throw InvalidArgument("cannot aggregate failed task " + r->task_id);
    if (!r->value) throw InvalidArgument("task " + r->task_id + " has no outcome");
  }

  if (reducer == Reducer::histogram_merge) {
    Histogram merged;
    for (const TaskResult* r : ordered) {
      const auto* h = std::get_if<Histogram>(&*r->value);
      if (!h) throw InvalidArgument("histogram_merge over non-histogram outcome " + r->task_id);
      for (const auto& [bits, count] : *h) merged[bits] += count;
    }
    return merged;
  }

  if (reducer == Reducer::weighted_sum && weights.size() != ordered.size()) {
    throw InvalidArgument("weighted_sum needs one weight per result");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const auto* v = std::get_if<double>(&*ordered[i]->value);
    if (!v) throw InvalidArgument("numeric reducer over non-scalar outcome " + ordered[i]->task_id);
    total += reducer == Reducer::weighted_sum ? weights[i] * *v : *v;
  }
  if (reducer == Reducer::mean) {
    if (ordered.empty()) throw InvalidArgument("mean of zero results");
    total /= static_cast<double>(ordered.size());
  }
  return total;
}

}  // namespace qmini
