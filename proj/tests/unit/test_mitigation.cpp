#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "qmini/errors.hpp"
#include "qmini/mitigation.hpp"

using namespace qmini;

namespace {

Observable z0(std::size_t n) {
  PauliString p{std::vector<Pauli>(n, Pauli::I), 1.0};
  p.ops[0] = Pauli::Z;
  return Observable(n, {p});
}

}  // namespace

TEST(Fold, GateCountScalesAndUnitaryIsUnchanged) {
  const Circuit c = random_circuit(3, 5, 6);
  for (int scale : {1, 3, 5, 7}) {
    const Circuit f = fold(c, scale);
    EXPECT_EQ(f.size(), c.size() * static_cast<std::size_t>(scale));
    const oracle::Mat diff = oracle::circuit_unitary(f) - oracle::circuit_unitary(c);
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-12) << "scale " << scale;
  }
  EXPECT_EQ(fold(c, 1), c);
}

TEST(Fold, EachGateIsFollowedByInversePairs) {
  Circuit c(2);
  c.h(0).cx(0, 1);
  const Circuit f = fold(c, 3);
  ASSERT_EQ(f.size(), 6u);
  EXPECT_EQ(f.gates()[0], c.gates()[0]);
  EXPECT_EQ(f.gates()[1], c.gates()[0].inverse());
  EXPECT_EQ(f.gates()[2], c.gates()[0]);
  EXPECT_EQ(f.gates()[3], c.gates()[1]);
}

TEST(Fold, RejectsEvenAndNonPositiveScales) {
  const Circuit c = random_circuit(2, 2, 1);
  for (int bad : {0, 2, -1, 4}) EXPECT_THROW(fold(c, bad), InvalidArgument) << bad;
}

TEST(Summarize, SampleStandardError) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Estimate e = summarize(v);
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  // sample sd = sqrt(5/3); stderr = sd / 2
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(e.trajectories, 4u);
  EXPECT_EQ(summarize(std::vector<double>{7.0}).std_error, 0.0);
}

TEST(Extrapolate, LinearFitIsExactOnLines) {
  const std::vector<double> x{1, 3, 5};
  const std::vector<double> y{0.8 - 0.1, 0.8 - 0.3, 0.8 - 0.5};
  EXPECT_NEAR(extrapolate_to_zero(x, y, Extrapolation::linear), 0.8, 1e-14);
}

TEST(Extrapolate, LinearIsLeastSquares) {
  // Hand-computed: x = 1,3,5; y = 1,2,2 -> slope 0.25, intercept 11/12.
  const std::vector<double> x{1, 3, 5};
  const std::vector<double> y{1, 2, 2};
  EXPECT_NEAR(extrapolate_to_zero(x, y, Extrapolation::linear), 11.0 / 12.0, 1e-14);
}

TEST(Extrapolate, RichardsonIsExactOnPolynomials) {
  const std::vector<double> x{1, 3, 5};
  std::vector<double> y;
  for (double s : x) y.push_back(0.9 - 0.2 * s + 0.03 * s * s);
  EXPECT_NEAR(extrapolate_to_zero(x, y, Extrapolation::richardson), 0.9, 1e-13);
}

TEST(Extrapolate, Validation) {
  const std::vector<double> one{1};
  const std::vector<double> twice{1, 1};
  EXPECT_THROW(extrapolate_to_zero(one, one, Extrapolation::linear), InvalidArgument);
  EXPECT_THROW(extrapolate_to_zero(twice, twice, Extrapolation::linear), InvalidArgument);
  EXPECT_EQ(extrapolation_from_string(to_string(Extrapolation::richardson)), Extrapolation::richardson);
  EXPECT_THROW(extrapolation_from_string("exp"), InvalidArgument);
}

TEST(Trajectories, ChunkingNeverChangesValues) {
  const Circuit c = random_circuit(3, 4, 2);
  const NoiseModel noise{0.05};
  const auto whole = trajectory_expectations(c, z0(3), noise, 11, 0, 30);
  auto first = trajectory_expectations(c, z0(3), noise, 11, 0, 13);
  const auto rest = trajectory_expectations(c, z0(3), noise, 11, 13, 17);
  first.insert(first.end(), rest.begin(), rest.end());
  EXPECT_EQ(whole, first);
}

TEST(Trajectories, ExecutorAndSerialEstimatesAgreeExactly) {
  const Circuit c = random_circuit(4, 3, 9);
  const NoiseModel noise{0.02};
  const Estimate serial = noisy_estimate(c, z0(4), noise, 600, 3);
  auto exec = create_executor({1, 3, Backend::pool, "cpu"});
  std::vector<TaskResult> log;
  const Estimate pooled = noisy_estimate(*exec, c, z0(4), noise, 600, 3, &log);
  EXPECT_EQ(serial.mean, pooled.mean);
  EXPECT_EQ(serial.std_error, pooled.std_error);
  EXPECT_EQ(log.size(), (600 + kTrajectoryChunk - 1) / kTrajectoryChunk);
}

TEST(Trajectories, MeanAgreesWithDensityMatrixWithinFiveSigma) {
  const Circuit c = random_circuit(3, 3, 40);
  const Observable obs(3, {PauliString::parse("IZZ"), PauliString::parse("XII", 0.5)});
  for (int scale : {1, 3}) {
    const Circuit f = fold(c, scale);
    const Estimate e = noisy_estimate(f, obs, NoiseModel{0.03}, 4000, 8);
    EXPECT_NEAR(e.mean, oracle::noisy_expectation(f, obs, 0.03), 5 * e.std_error + 1e-12);
  }
}

TEST(Zne, DeterministicAndWellFormed) {
  const Circuit c = random_circuit(3, 4, 1);
  const std::vector<int> scales{1, 3, 5};
  auto exec = create_executor({1, 2, Backend::pool, "cpu"});
  std::vector<TaskResult> log;
  const MitigationResult a = zne(*exec, c, z0(3), NoiseModel{0.01}, scales, 300, 5, Extrapolation::linear, &log);
  const MitigationResult b = zne(*exec, c, z0(3), NoiseModel{0.01}, scales, 300, 5);
  EXPECT_EQ(a.mitigated_value, b.mitigated_value);
  ASSERT_EQ(a.per_scale.size(), 3u);
  EXPECT_EQ(log.size(), 6u);
  EXPECT_EQ(log.front().task_id, "zne-s001-c00000");
  std::vector<double> x, y;
  for (const auto& [s, e] : a.per_scale) {
    x.push_back(s);
    y.push_back(e.mean);
  }
  EXPECT_DOUBLE_EQ(a.mitigated_value, extrapolate_to_zero(x, y, Extrapolation::linear));
  const auto j = to_json(a);
  EXPECT_EQ(j.at("per_scale").size(), 3u);
  EXPECT_EQ(j.at("extrapolation"), "linear");
}

TEST(Zne, NoiselessRunRecoversIdealExactly) {
  const Circuit c = random_circuit(3, 4, 17);
  auto exec = create_executor(ResourceSpec{});
  const std::vector<int> scales{1, 3};
  const auto r = zne(*exec, c, z0(3), NoiseModel{0.0}, scales, 10, 1);
  EXPECT_NEAR(r.mitigated_value, expectation(run(c), z0(3)), 1e-12);
}

TEST(Zne, MitigationReducesBiasAgainstDensityOracle) {
  // Exact (trajectory-free) check of the method itself: extrapolating the
  // density-matrix values at scales 1, 3, 5 lands closer to the ideal.
  const Circuit c = random_circuit(3, 6, 1);
  const Observable obs = z0(3);
  const double ideal = oracle::expectation(c, obs);
  std::vector<double> x{1, 3, 5}, y;
  for (double s : x) y.push_back(oracle::noisy_expectation(fold(c, static_cast<int>(s)), obs, 0.01));
  const double mitigated = extrapolate_to_zero(x, y, Extrapolation::linear);
  EXPECT_LT(std::abs(mitigated - ideal), std::abs(y[0] - ideal));
}

TEST(Zne, RejectsBadScaleSets) {
  const Circuit c = random_circuit(2, 2, 1);
  auto exec = create_executor(ResourceSpec{});
  const NoiseModel noise{0.01};
  EXPECT_THROW(zne(*exec, c, z0(2), noise, std::vector<int>{1}, 10, 1), InvalidArgument);
  EXPECT_THROW(zne(*exec, c, z0(2), noise, std::vector<int>{1, 2}, 10, 1), InvalidArgument);
  EXPECT_THROW(zne(*exec, c, z0(2), noise, std::vector<int>{3, 3}, 10, 1), InvalidArgument);
  EXPECT_THROW(zne(*exec, c, z0(2), noise, std::vector<int>{1, 3}, 0, 1), InvalidArgument);
}
