#pragma once

// Single wire cut with quasi-probability reconstruction.
//
// Cutting qubit q right after gate k splits the wire into an upstream segment
// (q up to and including gate k) and a downstream segment. The identity
//   rho = 1/2 sum_{O in I,X,Y,Z} Tr(O rho) O
// is expanded into eight (measure O, prepare eigenstate) pairs with weights
// +-1/2, and each fragment is simulated independently.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmini/circuit.hpp"
#include "qmini/engine.hpp"
#include "qmini/observable.hpp"
#include "qmini/tasks.hpp"

namespace qmini {

struct CutPoint {
  std::size_t gate_index = 0;
  Qubit qubit = 0;
};

struct CutSpec {
  Circuit circuit;
  CutPoint point;
};

/// Where each original qubit lives in the fragments (nullopt if absent).
struct CutMetadata {
  std::size_t original_qubits = 0;
  Qubit cut_qubit = 0;
  std::vector<std::optional<Qubit>> upstream_map;
  std::vector<std::optional<Qubit>> downstream_map;
};

struct CutFragments {
  Circuit upstream;
  Circuit downstream;
  CutMetadata meta;
};

/// Throws InvalidCut unless the cut separates the circuit into two fragments.
CutFragments cut(const CutSpec& spec);

/// Random circuit built from two random blocks that share one qubit: block A
/// on qubits [0, k], then block B on [k, n). The returned point cuts the
/// shared wire after A's last gate on it, so it is always valid.
CutSpec random_cut_instance(std::size_t num_qubits, std::size_t depth, std::uint64_t seed);

/// Every (gate_index, qubit) at which a single cut yields two fragments.
std::vector<CutPoint> valid_cut_points(const Circuit& c);

enum class CutBasis { I, X, Y, Z };
enum class CutPrep { zero, one, plus, minus, plus_i, minus_i };

std::string_view to_string(CutBasis b) noexcept;
std::string_view to_string(CutPrep p) noexcept;

/// Gates that prepare `p` from |0>.
std::vector<Gate> preparation_gates(CutPrep p, Qubit q);

struct FragmentJob {
  CutBasis basis;
  CutPrep prep;
  double weight;
};

/// The eight (basis, preparation, weight) pairs of the decomposition.
std::vector<FragmentJob> enumerate_jobs();

/// One concrete pair: the upstream fragment measured in `job.basis` on the
/// cut wire, and the downstream fragment with `job.prep` prepared on it.
struct JobPair {
  Circuit upstream;
  Circuit downstream;
  FragmentJob job;
};

std::vector<JobPair> enumerate_jobs(const CutFragments& f);

struct FactorizedTerm {
  PauliString upstream;
  PauliString downstream;
  double coeff;
};

/// Splits every term into an upstream factor (cut wire left as I) and a
/// downstream factor. Throws UnsupportedObservable if `obs` does not match
/// the cut circuit's qubits.
std::vector<FactorizedTerm> factorize(const CutFragments& f, const Observable& obs);

struct CutRunOptions {
  std::optional<ShotOptions> shots;
};

struct Reconstruction {
  double value = 0.0;
  std::vector<TaskResult> results;
  /// Per-job contributions, one row per (term, pair).
  nlohmann::json jobs = nlohmann::json::array();
};

/// Runs the four upstream and six downstream fragment variants on `exec` and
/// sums the weighted products.
Reconstruction reconstruct(Executor& exec, const CutFragments& f, const Observable& obs,
                           const CutRunOptions& options = {});

nlohmann::json to_json(const CutMetadata& m);

}  // namespace qmini
