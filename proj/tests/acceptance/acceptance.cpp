// Acceptance suite. Each criterion prints exactly one line:
//
//   PASS|FAIL C<n> <name> | <measured> (tol ...) ... runtime=<s>s (limit <s>s)
//
// Usage: qmini_acceptance [--criterion N]... [--report-dir DIR] [--skip-underprovisioned]
// Exit status is 0 when every selected criterion passes, 1 otherwise. With
// --skip-underprovisioned, a run whose only failures are criteria that need
// more hardware threads than the host has exits with kSkipCode instead; the
// FAIL line is printed either way.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "exchange_oracle.hpp"
#include "oracles.hpp"
#include "qmini/cutting.hpp"
#include "qmini/distributed.hpp"
#include "qmini/miniapps.hpp"
#include "qmini/report.hpp"
#include "qmini/vqa.hpp"

using namespace qmini;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  /// Records one measured quantity against its bound.
  void check(const std::string& what, double value, double bound, bool ok) {
    detail << ' ' << what << '=' << std::setprecision(4) << value << " (bound " << bound << ')';
    pass = pass && ok;
  }
  void below(const std::string& what, double value, double tol) { check(what, value, tol, value < tol); }
  void at_least(const std::string& what, double value, double min) { check(what, value, min, value >= min); }
  void note(const std::string& text) { detail << ' ' << text; }
  void require(const std::string& what, bool ok) {
    detail << ' ' << what << '=' << (ok ? "yes" : "NO");
    pass = pass && ok;
  }
};

double max_diff(const StateVector& a, const StateVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Gate sample_gate(GateKind kind, Qubit a, Qubit b, double angle) {
  if (is_rotation(kind)) return Gate::rotation(kind, a, angle);
  if (is_two_qubit(kind)) return Gate::two(kind, a, b);
  return Gate::single(kind, a);
}

Observable random_observable(std::size_t n, std::mt19937_64& rng, int terms) {
  std::vector<PauliString> out;
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  for (int t = 0; t < terms; ++t) {
    PauliString p{std::vector<Pauli>(n), coeff(rng)};
    for (auto& op : p.ops) op = static_cast<Pauli>(rng() % 4);
    out.push_back(p);
  }
  return Observable(n, out);
}

// ---------------------------------------------------------------- C1

void simulator_correctness(Verdict& v) {
  const double r = 1.0 / std::sqrt(2.0);
  double ghz_err = 0.0;
  for (std::size_t n = 2; n <= 10; ++n) {
    Circuit c(n);
    c.h(0);
    for (Qubit q = 1; q < n; ++q) c.cx(0, q);
    const StateVector s = run(c);
    for (std::size_t i = 0; i < s.dimension(); ++i) {
      const double want = (i == 0 || i == s.dimension() - 1) ? r : 0.0;
      ghz_err = std::max(ghz_err, std::abs(s[i] - StateVector::Amplitude(want, 0.0)));
    }
  }
  v.below("bell_ghz_amp_err", ghz_err, 1e-12);

  double norm_err = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const std::size_t n = 1 + i % 10;
    const std::size_t depth = 1 + (i * 7) % 20;
    norm_err = std::max(norm_err, std::abs(run(random_circuit(n, depth, 1000 + i)).norm_squared() - 1.0));
  }
  v.below("norm_err_100_circuits", norm_err, 1e-10);

  // Unitarity of the simulator's own action: column j of G is G|j>.
  double unitary_err = 0.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  const std::size_t n = 3;
  const std::size_t dim = std::size_t{1} << n;
  for (const GateKind kind : kAllGateKinds) {
    for (Qubit a = 0; a < n; ++a) {
      for (Qubit b = 0; b < n; ++b) {
        if (is_two_qubit(kind) == (a == b) || (!is_two_qubit(kind) && b != 0)) continue;
        const Gate g = sample_gate(kind, a, b, ang(rng));
        oracle::Mat m(dim, dim);
        for (std::size_t j = 0; j < dim; ++j) {
          std::vector<StateVector::Amplitude> e(dim);
          e[j] = 1.0;
          StateVector s = StateVector::from_amplitudes(std::move(e));
          apply_gate(s, g);
          for (std::size_t i = 0; i < dim; ++i) m(i, j) = s[i];
        }
        const oracle::Mat id = oracle::Mat::Identity(dim, dim);
        unitary_err = std::max(unitary_err, (m * m.adjoint() - id).cwiseAbs().maxCoeff());
      }
    }
  }
  v.below("gate_GGdag_err", unitary_err, 1e-12);

  double exp_err = 0.0;
  for (std::uint64_t i = 0; i < 60; ++i) {
    const std::size_t qubits = 1 + i % 5;
    const Circuit c = random_circuit(qubits, 1 + i % 8, 2000 + i);
    const Observable obs = random_observable(qubits, rng, 4);
    exp_err = std::max(exp_err, std::abs(expectation(run(c), obs) - oracle::expectation(c, obs)));
  }
  v.below("expectation_vs_dense_oracle", exp_err, 1e-10);
}

// ---------------------------------------------------------------- C2

void distributed_equivalence(Verdict& v) {
  const std::size_t n = 12;
  double amp_err = 0.0;
  std::size_t count_mismatches = 0;
  std::uint64_t total_messages = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const Circuit c = random_circuit(n, 1 + i % 12, 3000 + i);
    const StateVector ref = run(c);
    for (std::size_t w : {1u, 2u, 4u, 8u}) {
      const DistRunResult d = dist_run(c, w);
      amp_err = std::max(amp_err, max_diff(gather(d.state), ref));
      std::uint64_t expected = 0;
      for (const Gate& g : c.gates()) expected += oracle::analytic_messages(g, n, w);
      if (d.stats.messages_sent != expected) ++count_mismatches;
      total_messages += d.stats.messages_sent;
    }
  }
  v.below("max_amp_diff", amp_err, 1e-10);
  v.check("message_count_mismatches", static_cast<double>(count_mismatches), 0, count_mismatches == 0);
  v.note("messages_total=" + std::to_string(total_messages));
}

// ---------------------------------------------------------------- C3

void cutting_exactness(Verdict& v) {
  std::mt19937_64 rng(77);
  double err = 0.0;
  double oracle_err = 0.0;
  auto exec = create_executor(ResourceSpec{});
  for (std::uint64_t i = 0; i < 50; ++i) {
    const CutSpec spec = random_cut_instance(5, 2 + i % 5, 4000 + i);
    const Observable obs = random_observable(5, rng, 3);
    const double got = reconstruct(*exec, cut(spec), obs).value;
    err = std::max(err, std::abs(got - expectation(run(spec.circuit), obs)));
    oracle_err = std::max(oracle_err, std::abs(got - oracle::expectation(spec.circuit, obs)));
  }
  v.below("max_abs_reconstructed_minus_uncut", err, 1e-9);
  v.below("max_abs_vs_dense_oracle", oracle_err, 1e-9);
  const auto jobs = enumerate_jobs();
  double one_norm = 0.0;
  for (const auto& j : jobs) one_norm += std::abs(j.weight);
  v.check("pairs", static_cast<double>(jobs.size()), 8, jobs.size() == 8);
  v.check("quasi_prob_one_norm", one_norm, 4, std::abs(one_norm - 4.0) < 1e-15);
}

// ---------------------------------------------------------------- C4

void vqa_convergence(Verdict& v) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  const GateKind rot[] = {GateKind::RX, GateKind::RY, GateKind::RZ};
  double grad_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + trial % 5;
    const std::size_t params = 2 + trial % 4;
    Circuit a = random_circuit(n, 2, 5000 + trial);
    for (int k = 0; k < 10; ++k) {
      const auto q = static_cast<Qubit>(rng() % n);
      a.add(Gate::symbolic(rot[rng() % 3], q, {static_cast<std::uint32_t>(rng() % params), uni(rng) / 1.5}));
      if (n > 1) a.cx(q, static_cast<Qubit>((q + 1) % n));
    }
    a.reserve_params(params);
    const Observable h = random_observable(n, rng, 3);
    std::vector<double> theta(params);
    for (auto& t : theta) t = uni(rng);
    const auto g = parameter_shift_grad(a, theta, h);
    for (std::size_t i = 0; i < params; ++i) {
      const double step = 1e-5;
      auto up = theta, down = theta;
      up[i] += step;
      down[i] -= step;
      const double fd =
          (oracle::expectation(bind_params(a, up), h) - oracle::expectation(bind_params(a, down), h)) / (2 * step);
      grad_err = std::max(grad_err, std::abs(fd - g[i]));
    }
  }
  v.below("param_shift_vs_fd", grad_err, 1e-6);

  const Observable tfim = tfim_hamiltonian(4, 1.0, 1.0);
  OptimizerConfig oc;
  oc.learning_rate = 0.2;
  oc.max_iterations = 500;
  const VqaTrace t = minimize(hardware_efficient_ansatz(4, 2), tfim, oc, 1, EvalMode::sequential);
  const double ground = oracle::ground_energy(tfim);
  v.below("vqe_tfim4_gap", std::abs(t.final_cost - ground), 1e-2);
  v.check("vqe_iterations", static_cast<double>(t.iterations.size()), 500, t.iterations.size() <= 500);

  const Graph tri{3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}};
  auto exec = create_executor(ResourceSpec{});
  const QaoaResult q = qaoa_maxcut(tri, 1, OptimizerConfig{}, 1, *exec);
  // Brute force over the 8 assignments, independent of the library helper.
  double best = 0.0;
  for (std::uint64_t z = 0; z < 8; ++z) {
    double cut = 0.0;
    for (const auto& e : tri.edges) cut += ((z >> e.a) & 1) != ((z >> e.b) & 1) ? e.weight : 0.0;
    best = std::max(best, cut);
  }
  v.require("qaoa_optimal_cut_matches_brute_force", q.optimal_cut == best && q.most_likely_cut == best);
  v.check("qaoa_triangle_p_opt", q.optimal_probability, 0.9, q.optimal_probability > 0.9);
}

// ---------------------------------------------------------------- C5

void zne_efficacy(Verdict& v) {
  // Threshold frozen after the pre-registered sweep on seeds disjoint from these.
  const double threshold = 0.80;
  int wins = 0;
  const int reps = 100;
  for (int seed = 1; seed <= reps; ++seed) {
    const MiniAppConfig cfg = config_from_json(
        {{"miniapp", "zne"},
         {"parameters", {{"qubits", 5}, {"depth", 8}, {"noise_p", 0.01}, {"scales", {1, 3, 5}},
                         {"trajectories", 2000}, {"circuit_seed", 1}, {"seed", seed}}}});
    const MetricsReport r = run_miniapp(cfg);
    if (r.results.at("mitigated_error").get<double>() < r.results.at("unmitigated_error").get<double>()) ++wins;
  }
  v.at_least("win_fraction", static_cast<double>(wins) / reps, threshold);
}

// ---------------------------------------------------------------- C6

void scaling(Verdict& v) {
  const std::vector<std::size_t> workers{1, 2, 4, 8};
  std::vector<double> makespan;
  std::vector<MetricsReport> reports;
  for (std::size_t w : workers) {
    const MiniAppConfig cfg = config_from_json(
        {{"miniapp", "circuit-execution"},
         {"parameters", {{"num_tasks", 256}, {"qubits", 16}, {"depth", 4}, {"seed", 1}}},
         {"resources", {{"nodes", 1}, {"pes_per_node", w}, {"backend", w == 1 ? "serial" : "pool"}}}});
    reports.push_back(run_miniapp(cfg));
    makespan.push_back(reports.back().makespan);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < makespan.size(); ++i) monotone = monotone && makespan[i] <= makespan[i - 1];
  bool identical = true;
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.tasks.size(); ++i) {
      identical = identical && r.tasks[i].task_id == reports[0].tasks[i].task_id &&
                  r.tasks[i].scalar() == reports[0].tasks[i].scalar();
    }
    identical = identical && r.circuit_digest == reports[0].circuit_digest;
  }
  std::ostringstream ms;
  ms << "makespans=";
  for (std::size_t i = 0; i < workers.size(); ++i) {
    ms << (i ? "/" : "") << std::fixed << std::setprecision(3) << makespan[i];
  }
  v.note(ms.str() + "s hardware_threads=" + std::to_string(std::thread::hardware_concurrency()));
  v.require("monotone_non_increasing", monotone);
  v.at_least("speedup_8_workers", makespan[0] / makespan[3], 4.0);
  v.require("values_identical_across_workers", identical);
}

// ---------------------------------------------------------------- C7

json strip_timing(const json& j) {
  static const std::set<std::string> timing{"start",      "end",     "wall_time",  "makespan",
                                            "throughput", "speedup", "efficiency", "worker_id"};
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, val] : j.items()) {
      if (!timing.count(k)) out[k] = strip_timing(val);
    }
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& val : j) out.push_back(strip_timing(val));
    return out;
  }
  return j;
}

int cli_exit(std::vector<std::string> args) {
  args.insert(args.begin(), "qmini");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

void determinism_and_schema(Verdict& v, const fs::path& report_dir) {
  const std::vector<json> configs = {
      {{"miniapp", "circuit-execution"}, {"parameters", {{"num_tasks", 16}, {"qubits", 8}, {"depth", 4}}}},
      {{"miniapp", "dist-sv"}, {"parameters", {{"qubits", 10}, {"depth", 6}, {"workers", 4}}}},
      {{"miniapp", "cutting"}, {"parameters", {{"qubits", 5}, {"depth", 4}}}},
      {{"miniapp", "zne"}, {"parameters", {{"trajectories", 500}}}},
      {{"miniapp", "vqe"}, {"parameters", {{"qubits", 3}, {"layers", 1}, {"max_iterations", 40}}}},
      {{"miniapp", "qaoa"}, {"parameters", {{"graph", "ring-4"}, {"max_iterations", 40}}}},
      {{"miniapp", "pipeline"}, {"parameters", {{"max_iterations", 20}}}},
  };
  std::size_t nondeterministic = 0;
  std::size_t invalid = 0;
  if (!report_dir.empty()) fs::create_directories(report_dir);
  for (const auto& base : configs) {
    for (const char* backend : {"serial", "pool"}) {
      json cfg = base;
      cfg["resources"] = {{"pes_per_node", 2}, {"backend", backend}};
      if (base.at("miniapp") == "dist-sv") cfg.erase("resources");
      const MetricsReport a = run_miniapp(config_from_json(cfg));
      const MetricsReport b = run_miniapp(config_from_json(cfg));
      bool same = a.circuit_digest == b.circuit_digest && a.tasks.size() == b.tasks.size() &&
                  strip_timing(a.results) == strip_timing(b.results);
      for (std::size_t i = 0; same && i < a.tasks.size(); ++i) {
        same = a.tasks[i].task_id == b.tasks[i].task_id && a.tasks[i].value == b.tasks[i].value;
      }
      if (!same) {
        ++nondeterministic;
        std::cerr << "  nondeterministic: " << cfg.dump() << '\n';
      }
      for (const MetricsReport* r : {&a, &b}) {
        const json j = to_json(*r);
        const auto problems = validate_report(j);
        if (!problems.empty()) {
          ++invalid;
          std::cerr << "  invalid report for " << cfg.at("miniapp") << ": " << problems.front() << '\n';
        }
      }
      if (!report_dir.empty()) {
        std::ofstream(report_dir / (base.at("miniapp").get<std::string>() + "-" + backend + ".json"))
            << to_json(a).dump(2);
      }
    }
  }
  v.check("nondeterministic_runs", static_cast<double>(nondeterministic), 0, nondeterministic == 0);
  v.check("schema_violations", static_cast<double>(invalid), 0, invalid == 0);

  // Scripted CLI matrix: (arguments, expected exit code).
  const fs::path tmp = fs::temp_directory_path() / "qmini_acceptance_cli";
  fs::create_directories(tmp);
  const auto write = [&](const std::string& name, const json& j) {
    std::ofstream((tmp / name).string()) << j.dump();
    return (tmp / name).string();
  };
  const std::string good_cfg = write("good.json", configs[0]);
  const std::string bad_cfg = write("bad.json", {{"miniapp", "vqe"}, {"parameters", {{"qubits", 2}}}});
  const std::string miswired = write(
      "miswired.json",
      {{"miniapp", "pipeline"},
       {"parameters",
        {{"stages", json::array({{{"name", "nap"}, {"kind", "sleep"}, {"params", {{"seconds", 0.0}}}},
                                 {{"name", "train"}, {"kind", "train"}, {"depends_on", {"nap"}}}})}}}});
  const std::string report_path = (tmp / "r.json").string();
  const std::vector<std::pair<std::vector<std::string>, int>> matrix = {
      {{"list"}, 0},
      {{"run", "--config", good_cfg, "--out", report_path}, 0},
      {{"validate", "--report", report_path}, 0},
      {{"report", "--in", report_path, "--format", "csv"}, 0},
      {{"run", "vqe", "--qubits", "2", "--layers", "1", "--max-iterations", "5"}, 0},
      {{"validate", "--config", good_cfg}, 0},
      {{"validate", "--config", bad_cfg}, 1},
      {{"run", "--config", bad_cfg}, 1},
      {{"run", "vqe", "--qubits", "2"}, 1},
      {{"run", "qaoa", "--graph", "pentagram"}, 1},
      {{"run", "nope"}, 1},
      {{"frobnicate"}, 1},
      {{"report", "--in", (tmp / "missing.json").string()}, 1},
      {{"run", "circuit-execution", "--num-tasks", "2", "--qubits", "2", "--depth", "1", "--nodes", "0"}, 1},
      {{"run", "--config", miswired}, 2},
  };
  std::size_t wrong = 0;
  for (const auto& [args, want] : matrix) {
    const int got = cli_exit(args);
    if (got != want) {
      ++wrong;
      std::string joined;
      for (const auto& a : args) joined += a + " ";
      std::cerr << "  cli: '" << joined << "' exited " << got << ", expected " << want << '\n';
    }
  }
  fs::remove_all(tmp);
  v.check("cli_exit_code_mismatches_of_" + std::to_string(matrix.size()), static_cast<double>(wrong), 0, wrong == 0);
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<void(Verdict&)> body;
  /// Hardware threads the criterion's bounds assume (0: no requirement).
  unsigned min_hardware_threads = 0;
};

constexpr int kSkipCode = 77;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmini acceptance suite"};
  std::vector<int> selected;
  std::string report_dir;
  app.add_option("--criterion,-c", selected, "Criterion number (repeatable); default runs all")
      ->check(CLI::Range(1, 7));
  app.add_option("--report-dir", report_dir, "Write the criterion 7 reports here for external schema checks");
  bool skip_underprovisioned = false;
  app.add_flag("--skip-underprovisioned", skip_underprovisioned,
               "Exit with code 77 when failures are confined to criteria the host lacks the threads for");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "simulator-correctness", 30, simulator_correctness},
      {2, "distributed-equivalence", 120, distributed_equivalence},
      {3, "cutting-exactness", 60, cutting_exactness},
      {4, "vqa-convergence", 180, vqa_convergence},
      {5, "zne-efficacy", 300, zne_efficacy},
      {6, "scaling", 300, scaling, 8},
      {7, "determinism-and-schema", 60, [&](Verdict& v) { determinism_and_schema(v, report_dir); }},
  };

  const unsigned threads = std::thread::hardware_concurrency();
  bool all_pass = true;
  bool hard_failure = false;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.check("runtime_s", secs, c.limit_seconds, secs < c.limit_seconds);
    const bool underprovisioned = c.min_hardware_threads > threads;
    if (!v.pass && underprovisioned) {
      v.note("underprovisioned: host has " + std::to_string(threads) + " hardware thread(s), criterion assumes " +
             std::to_string(c.min_hardware_threads) + "; attainable speedup is at most " +
             std::to_string(std::max(1u, threads)) + "x");
    }
    hard_failure = hard_failure || (!v.pass && !underprovisioned);
    std::cout << (v.pass ? "PASS" : "FAIL") << " C" << c.id << ' ' << c.name << " |" << v.detail.str() << std::endl;
    all_pass = all_pass && v.pass;
  }
  if (all_pass) return 0;
  return skip_underprovisioned && !hard_failure ? kSkipCode : 1;
}
