#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "exchange_oracle.hpp"
#include "oracles.hpp"
#include "qmini/cluster.hpp"
#include "qmini/distributed.hpp"
#include "qmini/errors.hpp"

using namespace qmini;

namespace {

using oracle::analytic_messages;

double max_diff(const StateVector& a, const StateVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Sharding, ShardGatherRoundTrip) {
  const StateVector s = run(random_circuit(6, 4, 3));
  for (std::size_t w : {1u, 2u, 4u, 8u}) {
    const ShardedState ds = shard(s, w);
    EXPECT_EQ(ds.num_workers(), w);
    EXPECT_EQ(ds.shard_size() * w, s.dimension());
    EXPECT_EQ(gather(ds), s);
  }
  EXPECT_THROW(shard(s, 3), InvalidArgument);
  EXPECT_THROW(shard(StateVector::zero(2), 8), InvalidArgument);
}

TEST(Distributed, EverySingleGateMatchesSingleNode) {
  const std::size_t n = 4;
  const StateVector start = run(random_circuit(n, 3, 9));
  for (const GateKind kind : kAllGateKinds) {
    for (Qubit a = 0; a < n; ++a) {
      for (Qubit b = 0; b < n; ++b) {
        if (is_two_qubit(kind) == (a == b)) continue;
        if (!is_two_qubit(kind) && b != 0) continue;
        const Gate g = is_rotation(kind) ? Gate::rotation(kind, a, 0.917)
                       : is_two_qubit(kind) ? Gate::two(kind, a, b)
                                            : Gate::single(kind, a);
        StateVector ref = start;
        apply_gate(ref, g);
        for (std::size_t w : {2u, 4u, 8u}) {
          ShardedState ds = shard(start, w);
          const ExchangeStats stats = dist_apply_gate(ds, g);
          ASSERT_LT(max_diff(gather(ds), ref), 1e-12) << to_string(kind) << " w=" << w;
          EXPECT_EQ(stats.messages_sent, analytic_messages(g, n, w)) << to_string(kind) << " w=" << w;
          EXPECT_EQ(stats, expected_exchange(g, n, w));
        }
      }
    }
  }
}

TEST(Distributed, RandomCircuitsMatchSingleNodeAndFormula) {
  for (std::size_t w : {1u, 2u, 4u, 8u}) {
    RankCluster cluster(static_cast<int>(w));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Circuit c = random_circuit(8, 1 + seed % 8, seed);
      const DistRunResult r = dist_run(cluster, c);
      EXPECT_LT(max_diff(gather(r.state), run(c)), 1e-10);
      std::uint64_t expected = 0;
      for (const Gate& g : c.gates()) expected += analytic_messages(g, 8, w);
      EXPECT_EQ(r.stats.messages_sent, expected);
      if (w == 1) EXPECT_EQ(r.stats.messages_sent, 0u);
    }
  }
}

TEST(Distributed, ExpectationMatchesAndCountsReductions) {
  const Circuit c = random_circuit(6, 5, 4);
  const Observable obs(6, {PauliString::parse("XIZIYI", 0.5), PauliString::parse("ZZIIII")});
  const double ref = expectation(run(c), obs);
  for (std::size_t w : {1u, 2u, 4u, 8u}) {
    const DistRunResult r = dist_run(c, w);
    const DistExpectation ev = dist_expectation(r.state, obs);
    EXPECT_NEAR(ev.value, ref, 1e-12) << "w=" << w;
    // Every term reduces W-1 partial sums to rank 0; rotations add exchanges.
    std::uint64_t rotations = 0;
    for (const auto& t : obs.terms()) {
      for (const Gate& g : basis_change_gates(t)) rotations += analytic_messages(g, 6, w);
    }
    EXPECT_EQ(ev.stats.messages_sent, rotations + obs.terms().size() * (w - 1));
  }
}

TEST(Distributed, GlobalDiagonalGatesSendNothing) {
  ShardedState ds = ShardedState::zero(5, 8);
  Circuit c(5);
  c.h(4);
  ExchangeStats s = dist_apply_gate(ds, c.gates()[0]);
  EXPECT_EQ(s.messages_sent, 8u);
  s = dist_apply_gate(ds, Gate::rotation(GateKind::RZ, 4, 0.3));
  EXPECT_EQ(s.messages_sent, 0u);
  s = dist_apply_gate(ds, Gate::two(GateKind::CZ, 3, 4));
  EXPECT_EQ(s.messages_sent, 0u);
}

TEST(Cluster, PointToPointAndBarrier) {
  RankCluster cluster(4);
  const auto totals = cluster.spmd([](Communicator& comm) {
    const int next = (comm.rank() + 1) % comm.size();
    const int prev = (comm.rank() + comm.size() - 1) % comm.size();
    comm.send(next, Payload{std::complex<double>(comm.rank(), 0)});
    const Payload got = comm.recv(prev);
    if (got.at(0).real() != prev) throw std::runtime_error("wrong payload");
    comm.barrier();
  });
  ASSERT_EQ(totals.messages.size(), 4u);
  for (auto m : totals.messages) EXPECT_EQ(m, 1u);
}

TEST(Cluster, RankFailureBecomesExecutionError) {
  RankCluster cluster(4);
  try {
    cluster.spmd([](Communicator& comm) {
      if (comm.rank() == 2) throw std::runtime_error("rank died");
      comm.barrier();
    });
    FAIL() << "expected ExecutionError";
  } catch (const ExecutionError& e) {
    EXPECT_NE(std::string(e.what()).find("rank 2"), std::string::npos) << e.what();
  }
  // The cluster stays usable after a failed job.
  EXPECT_NO_THROW(cluster.spmd([](Communicator& comm) { comm.barrier(); }));
}

TEST(Cluster, ShutdownJoinsEveryThread) {
  const int before = active_worker_threads();
  {
    RankCluster cluster(8);
    EXPECT_EQ(active_worker_threads(), before + 8);
    cluster.shutdown();
    EXPECT_EQ(active_worker_threads(), before);
    cluster.shutdown();
  }
  EXPECT_EQ(active_worker_threads(), before);
}

TEST(Distributed, RejectsMismatchedCluster) {
  RankCluster cluster(2);
  ShardedState ds = ShardedState::zero(4, 4);
  EXPECT_THROW(dist_apply_gate(cluster, ds, Gate::single(GateKind::H, 0)), InvalidArgument);
}
