#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "qmini/errors.hpp"
#include "qmini/rng.hpp"
#include "qmini/statevector.hpp"

using namespace qmini;

namespace {

PauliString random_pauli(std::size_t n, std::mt19937_64& rng) {
  PauliString p{std::vector<Pauli>(n), std::uniform_real_distribution<double>(-2.0, 2.0)(rng)};
  for (auto& op : p.ops) op = static_cast<Pauli>(rng() % 4);
  return p;
}

}  // namespace

TEST(StateVector, ZeroStateAndLimits) {
  const auto s = StateVector::zero(3);
  EXPECT_EQ(s.dimension(), 8u);
  EXPECT_EQ(s[0], StateVector::Amplitude(1.0));
  EXPECT_DOUBLE_EQ(s.norm_squared(), 1.0);
  EXPECT_THROW(StateVector::zero(0), InvalidArgument);
  EXPECT_THROW(StateVector::zero(12, 10), ResourceLimit);
  EXPECT_THROW(StateVector::from_amplitudes(std::vector<StateVector::Amplitude>(3)), InvalidArgument);
}

TEST(StateVector, BellAmplitudesExact) {
  Circuit c(2);
  c.h(0).cx(0, 1);
  const StateVector s = run(c);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_LT(std::abs(s[0] - r), 1e-12);
  EXPECT_LT(std::abs(s[3] - r), 1e-12);
  EXPECT_LT(std::abs(s[1]), 1e-12);
  EXPECT_LT(std::abs(s[2]), 1e-12);
}

TEST(StateVector, GhzAmplitudesExact) {
  for (std::size_t n = 2; n <= 10; ++n) {
    Circuit c(n);
    c.h(0);
    for (Qubit q = 0; q + 1 < n; ++q) c.cx(q, q + 1);
    const StateVector s = run(c);
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < s.dimension(); ++i) {
      const double expected = (i == 0 || i == s.dimension() - 1) ? r : 0.0;
      ASSERT_LT(std::abs(s[i] - expected), 1e-12) << "n=" << n << " i=" << i;
    }
  }
}

TEST(StateVector, QubitZeroIsLeastSignificant) {
  Circuit c(3);
  c.x(0);
  const StateVector s = run(c);
  EXPECT_EQ(s[1], StateVector::Amplitude(1.0));
  EXPECT_EQ(bitstring(1, 3), "001");
}

TEST(StateVector, EveryGateMatchesDenseOracle) {
  std::mt19937_64 rng(11);
  for (const GateKind kind : kAllGateKinds) {
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t n = 4;
      // Random starting state from a random circuit, then the gate under test.
      Circuit c = random_circuit(n, 3, 100 + trial);
      const Qubit a = static_cast<Qubit>(rng() % n);
      Qubit b = static_cast<Qubit>(rng() % n);
      while (b == a) b = static_cast<Qubit>(rng() % n);
      if (is_rotation(kind)) {
        c.add(Gate::rotation(kind, a, std::uniform_real_distribution<double>(-7, 7)(rng)));
      } else if (is_two_qubit(kind)) {
        c.add(Gate::two(kind, a, b));
      } else {
        c.add(Gate::single(kind, a));
      }
      EXPECT_LT(oracle::max_abs_diff(run(c), oracle::final_state(c)), 1e-12) << to_string(kind);
    }
  }
}

TEST(StateVector, NormPreservedOverRandomCircuits) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const std::size_t n = 1 + seed % 10;
    const std::size_t depth = 1 + seed % 20;
    EXPECT_NEAR(run(random_circuit(n, depth, seed)).norm_squared(), 1.0, 1e-10);
  }
}

TEST(StateVector, GateThenInverseRestoresState) {
  for (const GateKind kind : kAllGateKinds) {
    Circuit c = random_circuit(3, 4, 5);
    const StateVector before = run(c);
    Gate g = is_rotation(kind) ? Gate::rotation(kind, 2, 1.234)
                               : is_two_qubit(kind) ? Gate::two(kind, 1, 2) : Gate::single(kind, 0);
    c.add(g);
    c.add(g.inverse());
    const StateVector after = run(c);
    for (std::size_t i = 0; i < before.dimension(); ++i) {
      ASSERT_LT(std::abs(before[i] - after[i]), 1e-12) << to_string(kind);
    }
  }
}

TEST(Expectation, MatchesDenseOracle) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const std::size_t n = 1 + seed % 5;
    const Circuit c = random_circuit(n, 1 + seed % 8, seed);
    std::vector<PauliString> terms;
    for (int t = 0; t < 3; ++t) terms.push_back(random_pauli(n, rng));
    const Observable obs(n, terms);
    EXPECT_NEAR(expectation(run(c), obs), oracle::expectation(c, obs), 1e-10);
  }
}

TEST(Expectation, RejectsQubitMismatch) {
  EXPECT_THROW(expectation(StateVector::zero(2), Observable::single("ZZZ")), InvalidArgument);
}

TEST(Expectation, BasisChangeMapsTermOntoZString) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Circuit c = random_circuit(3, 4, 500 + trial);
    PauliString p = random_pauli(3, rng);
    p.coeff = 1.0;
    Circuit rotated = c;
    for (const Gate& g : basis_change_gates(p)) rotated.add(g);
    PauliString z = p;
    for (auto& op : z.ops) op = op == Pauli::I ? Pauli::I : Pauli::Z;
    EXPECT_NEAR(expectation(run(rotated), z), expectation(run(c), p), 1e-12);
  }
}

TEST(Sampling, CountsWithinFiveSigmaOfBornProbabilities) {
  const Circuit c = random_circuit(3, 5, 21);
  const StateVector s = run(c);
  const std::uint64_t shots = 20000;
  const Histogram h = sample(s, shots, 9);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < s.dimension(); ++i) {
    const double p = std::norm(s[i]);
    const auto it = h.find(bitstring(i, 3));
    const double k = it == h.end() ? 0.0 : static_cast<double>(it->second);
    total += static_cast<std::uint64_t>(k);
    const double sigma = std::sqrt(static_cast<double>(shots) * p * (1 - p));
    EXPECT_LE(std::abs(k - static_cast<double>(shots) * p), 5 * sigma + 1e-9) << bitstring(i, 3);
  }
  EXPECT_EQ(total, shots);
  EXPECT_EQ(sample(s, 100, 4), sample(s, 100, 4));
  EXPECT_THROW(sample(s, 0, 1), InvalidArgument);
}

TEST(Sampling, ShotEstimateWithinFiveSigma) {
  const Circuit c = random_circuit(4, 4, 77);
  const Observable obs(4, {PauliString::parse("XIZY", 0.7), PauliString::parse("IZZI", -1.2)});
  const double exact = expectation(run(c), obs);
  const std::uint64_t shots = 50000;
  // Each term is an independent +-|coeff| variable.
  const double sigma = std::sqrt((0.49 + 1.44) / static_cast<double>(shots));
  EXPECT_NEAR(estimate_from_shots(run(c), obs, shots, 3), exact, 5 * sigma);
}

TEST(Noise, SingleQubitChannelMatchesDensityMatrix) {
  // One qubit, repeated X-rotations: <Z> under the channel is known exactly.
  Circuit c(1);
  for (int i = 0; i < 3; ++i) c.rx(0, 0.4);
  const Observable z = Observable::single("Z");
  for (const double p : {0.05, 0.75, 1.0}) {
    const std::size_t trajectories = 20000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t t = 0; t < trajectories; ++t) {
      const double v = expectation(run(c, NoiseModel{p}, derive_seed(99, t)), z);
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / trajectories;
    const double sd = std::sqrt(std::max(0.0, sum_sq / trajectories - mean * mean));
    const double exact = oracle::noisy_expectation(c, z, p);
    EXPECT_NEAR(mean, exact, 5 * sd / std::sqrt(double(trajectories)) + 1e-12) << "p=" << p;
  }
}

TEST(Noise, FullStrengthChannelShrinksBlochVectorByMinusOneThird) {
  // Each gate maps r -> -r/3 at p = 1, so the channel is not fully mixing;
  // p = 3/4 is. Checked on the density-matrix oracle.
  Circuit c(1);
  c.x(0);
  EXPECT_NEAR(oracle::noisy_expectation(c, Observable::single("Z"), 1.0), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(oracle::noisy_expectation(c, Observable::single("Z"), 0.75), 0.0, 1e-12);
}

TEST(Noise, MultiQubitTrajectoriesMatchDensityMatrix) {
  const Circuit c = random_circuit(3, 4, 13);
  const Observable obs(3, {PauliString::parse("ZZI"), PauliString::parse("IXI", 0.5)});
  const double p = 0.1;
  const std::size_t trajectories = 8000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::uint64_t t = 0; t < trajectories; ++t) {
    const double v = expectation(run(c, NoiseModel{p}, derive_seed(5, t)), obs);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / trajectories;
  const double se = std::sqrt((sum_sq / trajectories - mean * mean) / trajectories);
  EXPECT_NEAR(mean, oracle::noisy_expectation(c, obs, p), 5 * se);
}

TEST(Noise, TrajectoryIsDeterministicInSeed) {
  const Circuit c = random_circuit(4, 6, 2);
  EXPECT_EQ(run(c, NoiseModel{0.2}, 17), run(c, NoiseModel{0.2}, 17));
  EXPECT_EQ(run(c, NoiseModel{0.0}, 17), run(c));
  EXPECT_THROW(run(c, NoiseModel{1.5}, 1), InvalidArgument);
}

TEST(StateDump, RoundTripsExactly) {
  const StateVector s = run(random_circuit(5, 6, 8));
  const auto path = std::filesystem::temp_directory_path() / "qmini_state_dump_test.bin";
  write_state_dump(s, path);
  EXPECT_EQ(read_state_dump(path), s);
  EXPECT_EQ(state_digest(read_state_dump(path)), state_digest(s));
  std::filesystem::remove(path);
}
