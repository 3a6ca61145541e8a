#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmini/circuit.hpp"
#include "qmini/observable.hpp"

namespace qmini {

/// 26 qubits of complex doubles is 1 GiB.
inline constexpr std::size_t kDefaultMaxQubits = 26;

/// Dense n-qubit pure state. Index bit q holds qubit q (qubit 0 is the LSB).
class StateVector {
 public:
  using Amplitude = std::complex<double>;

  /// |0...0> on n qubits; throws ResourceLimit above `max_qubits`.
  static StateVector zero(std::size_t num_qubits, std::size_t max_qubits = kDefaultMaxQubits);
  /// Adopts an amplitude array whose length must be a power of two.
  static StateVector from_amplitudes(std::vector<Amplitude> amps);

  std::size_t num_qubits() const noexcept { return num_qubits_; }
  std::size_t dimension() const noexcept { return amps_.size(); }
  std::span<const Amplitude> amplitudes() const noexcept { return amps_; }
  std::span<Amplitude> amplitudes() noexcept { return amps_; }
  const Amplitude& operator[](std::size_t i) const noexcept { return amps_[i]; }

  double norm_squared() const noexcept;

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  StateVector(std::size_t n, std::vector<Amplitude> amps)
      : num_qubits_(n), amps_(std::move(amps)) {}

  std::size_t num_qubits_;
  std::vector<Amplitude> amps_;
};

/// Stochastic Pauli channel applied after every gate: each touched qubit
/// independently receives a uniformly random X, Y or Z with probability p.
struct NoiseModel {
  double depolarizing_p = 0.0;

  void validate() const;
};

void apply_gate(StateVector& s, const Gate& g);

/// Runs a bound circuit from |0...0>. With a noise model, one Monte Carlo
/// trajectory is drawn, deterministic in `seed`.
StateVector run(const Circuit& c, const std::optional<NoiseModel>& noise = std::nullopt,
                std::uint64_t seed = 0, std::size_t max_qubits = kDefaultMaxQubits);

/// Exact <s|P|s> for one Pauli term, coefficient included.
double expectation(const StateVector& s, const PauliString& term);
double expectation(const StateVector& s, const Observable& obs);

/// Basis changes that map `term` onto a Z-string: H for X, Sdg then H for Y.
std::vector<Gate> basis_change_gates(const PauliString& term);

using Histogram = std::map<std::string, std::uint64_t>;

/// Bitstring keys print qubit n-1 first ("01" means qubit 0 is 1).
std::string bitstring(std::uint64_t index, std::size_t num_qubits);

Histogram sample(const StateVector& s, std::uint64_t shots, std::uint64_t seed);

/// Shot-based estimate of <obs>: each term is measured in its own rotated basis.
double estimate_from_shots(const StateVector& s, const Observable& obs, std::uint64_t shots,
                           std::uint64_t seed);

/// Stable digest of the amplitudes rounded to 12 decimals.
std::uint64_t state_digest(const StateVector& s);

/// Binary dump: "QMSV" magic, u32 version, u32 num_qubits, then little-endian
/// f64 (re, im) pairs.
void write_state_dump(const StateVector& s, const std::filesystem::path& path);
StateVector read_state_dump(const std::filesystem::path& path);

}  // namespace qmini
