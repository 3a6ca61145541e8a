#pragma once

// Distributed state-vector simulation over W = 2^g ranks.
//
// Rank r owns global amplitude indices [r * 2^(n-g), (r+1) * 2^(n-g)).
// Qubits 0..n-g-1 are local; qubit n-g+b is global and equals bit b of the
// rank. Gates that mix amplitudes across a global qubit are realized by a
// full-shard exchange with the partner rank r ^ (1 << b).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qmini/circuit.hpp"
#include "qmini/cluster.hpp"
#include "qmini/observable.hpp"
#include "qmini/statevector.hpp"

namespace qmini {

class ShardedState {
 public:
  using Amplitude = StateVector::Amplitude;

  static ShardedState zero(std::size_t num_qubits, std::size_t num_workers,
                           std::size_t max_qubits = kDefaultMaxQubits);

  std::size_t num_qubits() const noexcept { return num_qubits_; }
  std::size_t num_workers() const noexcept { return shards_.size(); }
  std::size_t global_bits() const noexcept { return global_bits_; }
  std::size_t local_qubits() const noexcept { return num_qubits_ - global_bits_; }
  std::size_t shard_size() const noexcept { return std::size_t{1} << local_qubits(); }
  bool is_global(Qubit q) const noexcept { return q >= local_qubits(); }

  const std::vector<Amplitude>& shard(std::size_t rank) const { return shards_.at(rank); }
  std::vector<Amplitude>& shard(std::size_t rank) { return shards_.at(rank); }

 private:
  friend ShardedState shard(const StateVector& s, std::size_t num_workers);
  ShardedState(std::size_t n, std::size_t g) : num_qubits_(n), global_bits_(g) {}

  std::size_t num_qubits_;
  std::size_t global_bits_;
  std::vector<std::vector<Amplitude>> shards_;
};

/// Splits a state into W contiguous rank-ordered blocks.
ShardedState shard(const StateVector& s, std::size_t num_workers);

/// Rank-order concatenation; inverse of shard().
StateVector gather(const ShardedState& ds);

/// Messages the exchange protocol sends for `g` on an n-qubit state over W
/// ranks. Closed form, independent of the runtime implementation.
ExchangeStats expected_exchange(const Gate& g, std::size_t num_qubits, std::size_t num_workers);

/// Applies one gate on `cluster` (whose size must equal the shard count).
ExchangeStats dist_apply_gate(RankCluster& cluster, ShardedState& ds, const Gate& g);
/// Convenience overload that spins up a temporary cluster.
ExchangeStats dist_apply_gate(ShardedState& ds, const Gate& g);

struct DistRunResult {
  ShardedState state;
  ExchangeStats stats;
};

/// Executes a bound circuit from |0...0> with one long-lived worker per rank
/// and a barrier between consecutive gates.
DistRunResult dist_run(RankCluster& cluster, const Circuit& c);
DistRunResult dist_run(const Circuit& c, std::size_t num_workers);

struct DistExpectation {
  double value = 0.0;
  /// Basis-rotation exchanges plus W-1 reduction messages (to rank 0) per term.
  ExchangeStats stats;
};

DistExpectation dist_expectation(RankCluster& cluster, const ShardedState& ds,
                                 const Observable& obs);
DistExpectation dist_expectation(const ShardedState& ds, const Observable& obs);

}  // namespace qmini
