#include <benchmark/benchmark.h>

#include "qmini/distributed.hpp"
#include "qmini/statevector.hpp"

using namespace qmini;

namespace {

void BM_ApplyHadamard(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  StateVector s = StateVector::zero(n);
  const Gate low = Gate::single(GateKind::H, 0);
  const Gate high = Gate::single(GateKind::H, static_cast<Qubit>(n - 1));
  for (auto _ : state) {
    apply_gate(s, low);
    apply_gate(s, high);
    benchmark::DoNotOptimize(s.amplitudes().data());
  }
  state.SetItemsProcessed(2 * state.iterations());
  state.SetBytesProcessed(2 * state.iterations() * static_cast<std::int64_t>(s.dimension() * sizeof(StateVector::Amplitude)));
}
BENCHMARK(BM_ApplyHadamard)->DenseRange(10, 22, 4);

void BM_ApplyCX(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  StateVector s = run(random_circuit(n, 1, 1));
  const Gate g = Gate::two(GateKind::CX, 0, static_cast<Qubit>(n - 1));
  for (auto _ : state) {
    apply_gate(s, g);
    benchmark::DoNotOptimize(s.amplitudes().data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ApplyCX)->DenseRange(10, 22, 4);

void BM_RandomCircuit(benchmark::State& state) {
  const Circuit c = random_circuit(static_cast<std::size_t>(state.range(0)), 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(run(c));
}
BENCHMARK(BM_RandomCircuit)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Expectation(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const StateVector s = run(random_circuit(n, 4, 2));
  const Observable h = tfim_hamiltonian(n, 1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(expectation(s, h));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(h.terms().size()));
}
BENCHMARK(BM_Expectation)->Arg(8)->Arg(14)->Arg(18);

// Global-qubit gate on a sharded state: one full-shard exchange per rank.
void BM_DistributedGlobalGate(benchmark::State& state) {
  const std::size_t n = 16;
  const auto w = static_cast<std::size_t>(state.range(0));
  RankCluster cluster(static_cast<int>(w));
  ShardedState ds = shard(run(random_circuit(n, 2, 3)), w);
  const Gate g = Gate::single(GateKind::H, static_cast<Qubit>(n - 1));
  std::uint64_t bytes = 0;
  for (auto _ : state) bytes += dist_apply_gate(cluster, ds, g).bytes_exchanged;
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
  cluster.shutdown();
}
BENCHMARK(BM_DistributedGlobalGate)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

}  // namespace
