#include <benchmark/benchmark.h>

#include "qmini/engine.hpp"
#include "qmini/tasks.hpp"

using namespace qmini;

namespace {

std::vector<Task> circuit_tasks(std::size_t count, std::size_t qubits) {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < count; ++i) {
    tasks.push_back(make_run_task(indexed_id("t", i), random_circuit(qubits, 4, i + 1)));
  }
  return tasks;
}

// Per-task scheduling overhead: trivially small circuits.
void BM_ExecutorOverhead(benchmark::State& state) {
  const auto workers = static_cast<std::size_t>(state.range(0));
  auto exec = create_executor({1, workers, workers == 1 ? Backend::serial : Backend::pool, "cpu"});
  const auto tasks = circuit_tasks(256, 2);
  for (auto _ : state) benchmark::DoNotOptimize(exec->submit_all(tasks));
  state.SetItemsProcessed(state.iterations() * 256);
  exec->shutdown();
}
BENCHMARK(BM_ExecutorOverhead)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

// Throughput on the circuit-execution workload shape.
void BM_ExecutorThroughput(benchmark::State& state) {
  const auto workers = static_cast<std::size_t>(state.range(0));
  auto exec = create_executor({1, workers, workers == 1 ? Backend::serial : Backend::pool, "cpu"});
  const auto tasks = circuit_tasks(32, 14);
  for (auto _ : state) benchmark::DoNotOptimize(exec->submit_all(tasks));
  state.SetItemsProcessed(state.iterations() * 32);
  exec->shutdown();
}
BENCHMARK(BM_ExecutorThroughput)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
