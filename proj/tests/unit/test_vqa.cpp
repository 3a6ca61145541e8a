#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "qmini/errors.hpp"
#include "qmini/vqa.hpp"

using namespace qmini;

namespace {

Graph triangle() { return {3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}}; }

/// Random rotation ansatz with shared parameters and non-unit scales.
Circuit random_ansatz(std::size_t n, std::size_t params, std::mt19937_64& rng) {
  Circuit c = random_circuit(n, 2, rng());
  const GateKind rot[] = {GateKind::RX, GateKind::RY, GateKind::RZ};
  for (int i = 0; i < 12; ++i) {
    const auto q = static_cast<Qubit>(rng() % n);
    const double scale = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    c.add(Gate::symbolic(rot[rng() % 3], q, {static_cast<std::uint32_t>(rng() % params), scale}));
    if (n > 1 && rng() % 2) c.cx(q, static_cast<Qubit>((q + 1) % n));
  }
  c.reserve_params(params);
  return c;
}

Observable random_observable(std::size_t n, std::mt19937_64& rng) {
  std::vector<PauliString> terms;
  for (int t = 0; t < 3; ++t) {
    PauliString p{std::vector<Pauli>(n), std::uniform_real_distribution<double>(-1, 1)(rng)};
    for (auto& op : p.ops) op = static_cast<Pauli>(rng() % 4);
    terms.push_back(p);
  }
  return Observable(n, terms);
}

std::vector<double> random_params(std::size_t k, std::mt19937_64& rng) {
  std::vector<double> v(k);
  for (auto& x : v) x = std::uniform_real_distribution<double>(-3, 3)(rng);
  return v;
}

std::vector<double> finite_difference(const Circuit& a, std::vector<double> theta, const Observable& h) {
  const double step = 1e-5;
  std::vector<double> g(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + step;
    const double up = oracle::expectation(bind_params(a, theta), h);
    theta[i] = keep - step;
    const double down = oracle::expectation(bind_params(a, theta), h);
    theta[i] = keep;
    g[i] = (up - down) / (2 * step);
  }
  return g;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Ansatz, HardwareEfficientShape) {
  for (std::size_t n : {1u, 2u, 4u}) {
    for (std::size_t layers : {1u, 3u}) {
      const Circuit c = hardware_efficient_ansatz(n, layers);
      EXPECT_EQ(c.num_params(), 2 * n * layers);
      EXPECT_EQ(c.size(), layers * (2 * n + (n - 1)));
    }
  }
  EXPECT_THROW(hardware_efficient_ansatz(0, 1), InvalidArgument);
  EXPECT_THROW(hardware_efficient_ansatz(2, 0), InvalidArgument);
}

TEST(Ansatz, QaoaParameterLayout) {
  const Circuit c = qaoa_ansatz(triangle(), 2);
  EXPECT_EQ(c.num_params(), 4u);
  // At gamma = beta = 0 the state is the uniform superposition.
  const StateVector s = run(bind_params(c, std::vector<double>(4, 0.0)));
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(std::norm(s[i]), 1.0 / 8, 1e-12);
}

TEST(Gradient, ParameterShiftMatchesFiniteDifference) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 5;
    const Circuit a = trial % 4 == 0 ? hardware_efficient_ansatz(n, 2) : random_ansatz(n, 3 + trial % 3, rng);
    const Observable h = random_observable(n, rng);
    const auto theta = random_params(a.num_params(), rng);
    EXPECT_LT(max_abs_diff(parameter_shift_grad(a, theta, h), finite_difference(a, theta, h)), 1e-6) << trial;
  }
}

TEST(Gradient, QaoaShiftHandlesWeightedEdges) {
  const Graph g{4, {{0, 1, 0.7}, {1, 2, 1.3}, {2, 3, -0.4}, {0, 3, 2.0}}};
  const Circuit a = qaoa_ansatz(g, 2);
  const Observable h = maxcut_hamiltonian(g);
  const std::vector<double> theta{0.3, -0.8, 1.1, 0.2};
  EXPECT_LT(max_abs_diff(parameter_shift_grad(a, theta, h), finite_difference(a, theta, h)), 1e-6);
}

TEST(Gradient, EvaluatorAgreesWithDirectComputation) {
  const Circuit a = hardware_efficient_ansatz(3, 2);
  const Observable h = tfim_hamiltonian(3, 1.0, 0.7);
  std::mt19937_64 rng(2);
  const auto theta = random_params(a.num_params(), rng);
  auto exec = create_executor({1, 2, Backend::pool, "cpu"});
  CostEvaluator ev(a, h, *exec);
  const auto [c, g] = ev.cost_and_gradient(theta);
  EXPECT_NEAR(c, cost(a, theta, h), 1e-14);
  EXPECT_LT(max_abs_diff(g, parameter_shift_grad(a, theta, h)), 1e-14);
  EXPECT_EQ(ev.evaluations(), 1 + 2 * a.num_params());  // every parameter occurs once in the HEA
}

TEST(Maxcut, HamiltonianDiagonalIsMinusCut) {
  const Graph g{4, {{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 0.5}, {0, 2, 1.5}}};
  const oracle::Mat h = oracle::observable_matrix(maxcut_hamiltonian(g));
  double best = 0.0;
  for (std::uint64_t z = 0; z < 16; ++z) {
    double cut = 0.0;
    for (const auto& e : g.edges) cut += (((z >> e.a) & 1) != ((z >> e.b) & 1)) ? e.weight : 0.0;
    EXPECT_NEAR(h(z, z).real(), -cut, 1e-12);
    EXPECT_DOUBLE_EQ(cut_value(g, z), cut);
    best = std::max(best, cut);
  }
  EXPECT_DOUBLE_EQ(best, 4.0);  // node 2 alone cuts 2 + 0.5 + 1.5
  EXPECT_DOUBLE_EQ(brute_force_maxcut(g), best);
  EXPECT_DOUBLE_EQ(brute_force_maxcut(triangle()), 2.0);
}

TEST(Maxcut, GraphValidation) {
  EXPECT_THROW((Graph{3, {{0, 0, 1.0}}}.validate()), InvalidArgument);
  EXPECT_THROW((Graph{3, {{0, 3, 1.0}}}.validate()), InvalidArgument);
  EXPECT_THROW((Graph{25, {}}.validate()), ResourceLimit);
  const Graph g = triangle();
  const Graph back = graph_from_json(to_json(g));
  EXPECT_EQ(back.num_nodes, 3u);
  EXPECT_EQ(back.edges.size(), 3u);
}

TEST(Optimizer, GradientDescentReachesSmallTfimGround) {
  const Observable h = tfim_hamiltonian(2, 1.0, 1.0);
  OptimizerConfig oc;
  oc.learning_rate = 0.2;
  oc.max_iterations = 500;
  const VqaTrace t = minimize(hardware_efficient_ansatz(2, 2), h, oc, 3, EvalMode::sequential);
  EXPECT_NEAR(t.final_cost, oracle::ground_energy(h), 1e-3);
  EXPECT_EQ(t.final_params.size(), 8u);
  for (std::size_t i = 0; i < t.iterations.size(); ++i) ASSERT_EQ(t.iterations[i].iteration, i + 1);
}

TEST(Optimizer, SequentialAndConcurrentTracesAreIdentical) {
  const Observable h = tfim_hamiltonian(3, 1.0, 0.5);
  OptimizerConfig oc;
  oc.max_iterations = 25;
  const Circuit a = hardware_efficient_ansatz(3, 1);
  const VqaTrace s = minimize(a, h, oc, 9, EvalMode::sequential);
  const VqaTrace c = minimize(a, h, oc, 9, EvalMode::concurrent, 3);
  ASSERT_EQ(s.iterations.size(), c.iterations.size());
  for (std::size_t i = 0; i < s.iterations.size(); ++i) {
    EXPECT_EQ(s.iterations[i].cost, c.iterations[i].cost);
    EXPECT_EQ(s.iterations[i].params, c.iterations[i].params);
  }
}

TEST(Optimizer, SpsaIsSeededAndDescends) {
  const Observable h = tfim_hamiltonian(2, 1.0, 1.0);
  OptimizerConfig oc;
  oc.kind = OptimizerKind::spsa;
  oc.max_iterations = 300;
  oc.tolerance = 0.0;
  const Circuit a = hardware_efficient_ansatz(2, 1);
  const VqaTrace t1 = minimize(a, h, oc, 4, EvalMode::sequential);
  const VqaTrace t2 = minimize(a, h, oc, 4, EvalMode::sequential);
  EXPECT_EQ(t1.final_params, t2.final_params);
  EXPECT_LT(t1.final_cost, t1.iterations.front().cost - 0.5);
  EXPECT_EQ(t1.iterations.size(), 300u);
}

TEST(Optimizer, FlatCostConvergesImmediately) {
  auto exec = create_executor(ResourceSpec{});
  OptimizerConfig oc;
  const QaoaResult r = qaoa_maxcut(Graph{3, {}}, 1, oc, 1, *exec, 16);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_LE(r.trace.iterations.size(), 2u);
  EXPECT_EQ(r.optimal_cut, 0.0);
}

TEST(Optimizer, InitialParamsAreHonoured) {
  OptimizerConfig oc;
  oc.max_iterations = 1;
  oc.initial_params = {0.1, 0.2};
  const VqaTrace t = minimize(hardware_efficient_ansatz(1, 1), Observable::single("Z"), oc, 1, EvalMode::sequential);
  EXPECT_EQ(t.iterations.front().params, oc.initial_params);
  oc.initial_params = {0.1};
  EXPECT_THROW(minimize(hardware_efficient_ansatz(1, 1), Observable::single("Z"), oc, 1, EvalMode::sequential),
               InvalidArgument);
}

TEST(Optimizer, ConfigValidation) {
  OptimizerConfig oc;
  oc.learning_rate = 0.0;
  EXPECT_THROW(oc.validate(), InvalidArgument);
  oc = {};
  oc.max_iterations = 0;
  EXPECT_THROW(oc.validate(), InvalidArgument);
  EXPECT_EQ(optimizer_from_string("gd"), OptimizerKind::gradient_descent);
  EXPECT_THROW(optimizer_from_string("adam"), InvalidArgument);
  const OptimizerConfig back = optimizer_config_from_json(to_json(OptimizerConfig{}));
  EXPECT_EQ(back.learning_rate, OptimizerConfig{}.learning_rate);
}

TEST(Optimizer, NonFiniteCostRaisesWithPartialTrace) {
  int calls = 0;
  auto exec = create_executor(ResourceSpec{}, [&](const Task&) -> TaskOutput {
    ++calls;
    return {calls > 20 ? std::numeric_limits<double>::quiet_NaN() : 1.0 / calls, std::nullopt};
  });
  CostEvaluator ev(hardware_efficient_ansatz(1, 1), Observable::single("Z"), *exec);
  OptimizerConfig oc;
  oc.tolerance = 0.0;
  try {
    minimize(ev, oc, 1);
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    // The offending iteration is the last record; everything before it is finite.
    const auto& its = e.trace().iterations;
    ASSERT_GE(its.size(), 2u);
    EXPECT_FALSE(std::isfinite(its.back().cost) && std::isfinite(its.back().gradient_norm));
    for (std::size_t i = 0; i + 1 < its.size(); ++i) EXPECT_TRUE(std::isfinite(its[i].cost));
  }
}

TEST(Qaoa, TriangleFindsOptimalCut) {
  auto exec = create_executor(ResourceSpec{});
  OptimizerConfig oc;
  const QaoaResult r = qaoa_maxcut(triangle(), 1, oc, 1, *exec);
  EXPECT_GT(r.optimal_probability, 0.9);
  EXPECT_DOUBLE_EQ(r.best_sampled_cut, 2.0);
  EXPECT_DOUBLE_EQ(r.most_likely_cut, 2.0);
  std::uint64_t shots = 0;
  for (const auto& [bits, count] : r.samples) shots += count;
  EXPECT_EQ(shots, 1024u);
  EXPECT_TRUE(to_json(r).contains("trace"));
}
