#include "qmini/distributed.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "qmini/errors.hpp"
#include "qmini/kernels.hpp"

namespace qmini {

namespace {

using Amplitude = ShardedState::Amplitude;
using Shard = std::vector<Amplitude>;

std::size_t checked_global_bits(std::size_t num_qubits, std::size_t num_workers) {
  if (num_workers == 0 || !std::has_single_bit(num_workers)) {
    throw InvalidArgument("worker count " + std::to_string(num_workers) +
                          " is not a power of two");
  }
  const auto g = static_cast<std::size_t>(std::countr_zero(num_workers));
  if (g > num_qubits) {
    throw InvalidArgument(std::to_string(num_workers) + " workers exceed 2^" +
                          std::to_string(num_qubits) + " amplitudes");
  }
  return g;
}

/// Executes the exchange protocol for one gate on one rank.
class RankProtocol {
 public:
  RankProtocol(Communicator& comm, Shard& shard, std::size_t local_qubits)
      : comm_(comm), shard_(shard), local_(local_qubits), rank_(comm.rank()) {}

  /// Exchange steps executed cluster-wide, counted identically on every rank
  /// whether or not this rank took part.
  std::uint64_t rounds() const noexcept { return rounds_; }

  void apply(const Gate& g) {
    switch (g.kind()) {
      case GateKind::CX:
        cx(g.target(0), g.target(1));
        return;
      case GateKind::CZ:
        cz(g.target(0), g.target(1));
        return;
      case GateKind::SWAP:
        cx(g.target(0), g.target(1));
        cx(g.target(1), g.target(0));
        cx(g.target(0), g.target(1));
        return;
      default:
        single(g);
    }
  }

 private:
  bool global(Qubit q) const noexcept { return q >= local_; }
  int rank_bit(Qubit q) const noexcept { return (rank_ >> (q - local_)) & 1; }
  int partner(Qubit q) const noexcept { return rank_ ^ (1 << (q - local_)); }

  Shard exchange(int with) {
    comm_.send(with, shard_);
    return comm_.recv(with);
  }

  void single(const Gate& g) {
    const auto m = kernels::single_qubit_matrix(g);
    const Qubit q = g.target(0);
    if (!global(q)) {
      if (is_diagonal(g.kind())) {
        kernels::apply_diagonal(shard_, q, m[0], m[3]);
      } else {
        kernels::apply_matrix(shard_, q, m);
      }
      return;
    }
    if (is_diagonal(g.kind())) {
      const Amplitude phase = rank_bit(q) ? m[3] : m[0];
      for (auto& a : shard_) a *= phase;
      return;
    }
    ++rounds_;
    const Shard other = exchange(partner(q));
    if (rank_bit(q) == 0) {
      for (std::size_t i = 0; i < shard_.size(); ++i) shard_[i] = m[0] * shard_[i] + m[1] * other[i];
    } else {
      for (std::size_t i = 0; i < shard_.size(); ++i) shard_[i] = m[2] * other[i] + m[3] * shard_[i];
    }
  }

  void cx(Qubit control, Qubit target) {
    if (!global(control) && !global(target)) {
      kernels::apply_cx(shard_, control, target);
    } else if (global(control) && !global(target)) {
      if (rank_bit(control)) kernels::apply_matrix(shard_, target, {0.0, 1.0, 1.0, 0.0});
    } else if (!global(control)) {
      // Target is global: the flipped amplitude lives on the partner rank.
      ++rounds_;
      const Shard other = exchange(partner(target));
      const std::size_t cbit = std::size_t{1} << control;
      for (std::size_t i = 0; i < shard_.size(); ++i) {
        if (i & cbit) shard_[i] = other[i];
      }
    } else {
      ++rounds_;
      if (rank_bit(control)) shard_ = exchange(partner(target));
    }
  }

  void cz(Qubit a, Qubit b) {
    if (global(a) && !global(b)) std::swap(a, b);
    if (!global(b)) {
      kernels::apply_cz(shard_, a, b);
    } else if (!global(a)) {
      if (rank_bit(b)) kernels::apply_diagonal(shard_, a, 1.0, -1.0);
    } else if (rank_bit(a) && rank_bit(b)) {
      for (auto& amp : shard_) amp = -amp;
    }
  }

  Communicator& comm_;
  Shard& shard_;
  std::size_t local_;
  int rank_;
  std::uint64_t rounds_ = 0;
};

void check_cluster(const RankCluster& cluster, const ShardedState& ds) {
  if (static_cast<std::size_t>(cluster.size()) != ds.num_workers()) {
    throw InvalidArgument("cluster has " + std::to_string(cluster.size()) + " ranks but state has " +
                          std::to_string(ds.num_workers()) + " shards");
  }
}

void check_gate(const Gate& g, std::size_t num_qubits) {
  if (!g.is_bound()) throw InvalidArgument("distributed gate has an unbound parameter");
  for (Qubit q : g.targets()) {
    if (q >= num_qubits) {
      throw InvalidArgument("gate targets qubit " + std::to_string(q) + " of a " +
                            std::to_string(num_qubits) + "-qubit state");
    }
  }
}

ExchangeStats totals_to_stats(const RankCluster::RankTotals& totals,
                              const std::vector<std::uint64_t>& rounds) {
  ExchangeStats s;
  for (auto m : totals.messages) s.messages_sent += m;
  for (auto b : totals.bytes) s.bytes_exchanged += b;
  s.exchange_rounds = rounds.empty() ? 0 : *std::max_element(rounds.begin(), rounds.end());
  return s;
}

ExchangeStats cx_exchange(Qubit control, Qubit target, std::size_t local, std::size_t workers,
                          std::uint64_t shard_bytes) {
  const bool cg = control >= local;
  const bool tg = target >= local;
  if (!tg) return {};
  const std::uint64_t messages = cg ? workers / 2 : workers;
  return {messages, messages * shard_bytes, 1};
}

}  // namespace

ShardedState ShardedState::zero(std::size_t num_qubits, std::size_t num_workers,
                                std::size_t max_qubits) {
  return qmini::shard(StateVector::zero(num_qubits, max_qubits), num_workers);
}

ShardedState shard(const StateVector& s, std::size_t num_workers) {
  const std::size_t g = checked_global_bits(s.num_qubits(), num_workers);
  ShardedState ds(s.num_qubits(), g);
  const std::size_t len = ds.shard_size();
  const auto amps = s.amplitudes();
  ds.shards_.reserve(num_workers);
  for (std::size_t r = 0; r < num_workers; ++r) {
    ds.shards_.emplace_back(amps.begin() + static_cast<std::ptrdiff_t>(r * len),
                            amps.begin() + static_cast<std::ptrdiff_t>((r + 1) * len));
  }
  return ds;
}

StateVector gather(const ShardedState& ds) {
  std::vector<Amplitude> amps;
  amps.reserve(ds.shard_size() * ds.num_workers());
  for (std::size_t r = 0; r < ds.num_workers(); ++r) {
    const auto& block = ds.shard(r);
    amps.insert(amps.end(), block.begin(), block.end());
  }
  return StateVector::from_amplitudes(std::move(amps));
}

ExchangeStats expected_exchange(const Gate& g, std::size_t num_qubits, std::size_t num_workers) {
  const std::size_t local = num_qubits - checked_global_bits(num_qubits, num_workers);
  const std::uint64_t shard_bytes = (std::uint64_t{1} << local) * sizeof(Amplitude);
  switch (g.kind()) {
    case GateKind::CX:
      return cx_exchange(g.target(0), g.target(1), local, num_workers, shard_bytes);
    case GateKind::CZ:
      return {};
    case GateKind::SWAP: {
      ExchangeStats s = cx_exchange(g.target(0), g.target(1), local, num_workers, shard_bytes);
      s += cx_exchange(g.target(1), g.target(0), local, num_workers, shard_bytes);
      s += cx_exchange(g.target(0), g.target(1), local, num_workers, shard_bytes);
      return s;
    }
    default:
      if (g.target(0) < local || is_diagonal(g.kind())) return {};
      return {num_workers, num_workers * shard_bytes, 1};
  }
}

ExchangeStats dist_apply_gate(RankCluster& cluster, ShardedState& ds, const Gate& g) {
  check_cluster(cluster, ds);
  check_gate(g, ds.num_qubits());
  std::vector<std::uint64_t> rounds(ds.num_workers(), 0);
  const std::size_t local = ds.local_qubits();
  const auto totals = cluster.spmd([&](Communicator& comm) {
    const auto r = static_cast<std::size_t>(comm.rank());
    RankProtocol protocol(comm, ds.shard(r), local);
    protocol.apply(g);
    rounds[r] = protocol.rounds();
  });
  return totals_to_stats(totals, rounds);
}

ExchangeStats dist_apply_gate(ShardedState& ds, const Gate& g) {
  RankCluster cluster(static_cast<int>(ds.num_workers()));
  return dist_apply_gate(cluster, ds, g);
}

DistRunResult dist_run(RankCluster& cluster, const Circuit& c) {
  if (!c.is_bound()) throw InvalidArgument("dist_run: circuit has unbound parameters");
  for (const Gate& g : c.gates()) check_gate(g, c.num_qubits());
  ShardedState ds = ShardedState::zero(c.num_qubits(), static_cast<std::size_t>(cluster.size()));
  std::vector<std::uint64_t> rounds(ds.num_workers(), 0);
  const std::size_t local = ds.local_qubits();
  const auto totals = cluster.spmd([&](Communicator& comm) {
    const auto r = static_cast<std::size_t>(comm.rank());
    RankProtocol protocol(comm, ds.shard(r), local);
    for (const Gate& g : c.gates()) {
      protocol.apply(g);
      comm.barrier();
    }
    rounds[r] = protocol.rounds();
  });
  ExchangeStats stats = totals_to_stats(totals, rounds);
  return {std::move(ds), stats};
}

DistRunResult dist_run(const Circuit& c, std::size_t num_workers) {
  checked_global_bits(c.num_qubits(), num_workers);
  RankCluster cluster(static_cast<int>(num_workers));
  return dist_run(cluster, c);
}

DistExpectation dist_expectation(RankCluster& cluster, const ShardedState& ds,
                                 const Observable& obs) {
  check_cluster(cluster, ds);
  if (obs.num_qubits() != ds.num_qubits()) {
    throw InvalidArgument("observable spans " + std::to_string(obs.num_qubits()) +
                          " qubits, state has " + std::to_string(ds.num_qubits()));
  }
  const std::size_t local = ds.local_qubits();
  std::vector<std::uint64_t> rounds(ds.num_workers(), 0);
  double result = 0.0;  // written by rank 0 only

  const auto totals = cluster.spmd([&](Communicator& comm) {
    const auto r = static_cast<std::size_t>(comm.rank());
    const std::uint64_t offset = r << local;
    std::uint64_t my_rounds = 0;
    double acc = 0.0;
    for (const auto& term : obs.terms()) {
      Shard work = ds.shard(r);
      RankProtocol protocol(comm, work, local);
      for (const Gate& g : basis_change_gates(term)) {
        protocol.apply(g);
        comm.barrier();
      }
      my_rounds += protocol.rounds() + (comm.size() > 1 ? 1 : 0);
      const double partial = kernels::parity_sum(work, term.support_mask(), offset);
      if (r == 0) {
        double total = partial;
        for (int src = 1; src < comm.size(); ++src) total += comm.recv(src).at(0).real();
        acc += term.coeff * total;
      } else {
        comm.send(0, Shard{Amplitude(partial, 0.0)});
      }
    }
    rounds[r] = my_rounds;
    if (r == 0) result = acc;
  });
  return {result, totals_to_stats(totals, rounds)};
}

DistExpectation dist_expectation(const ShardedState& ds, const Observable& obs) {
  RankCluster cluster(static_cast<int>(ds.num_workers()));
  return dist_expectation(cluster, ds, obs);
}

}  // namespace qmini
