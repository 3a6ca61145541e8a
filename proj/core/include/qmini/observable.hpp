#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qmini {

enum class Pauli : std::uint8_t { I, X, Y, Z };

/// Tensor product of single-qubit Paulis with a real coefficient.
///
/// `ops[q]` acts on qubit q. The textual form (`to_string`, `parse`) follows
/// the usual ket convention: the leftmost character is the highest qubit, so
/// "ZI" on two qubits is Z on qubit 1.
struct PauliString {
  std::vector<Pauli> ops;
  double coeff = 1.0;

  static PauliString parse(const std::string& text, double coeff = 1.0);
  std::string to_string() const;
  std::size_t num_qubits() const noexcept { return ops.size(); }
  bool is_identity() const noexcept;
  /// True when the string contains only I and Z (diagonal in the Z basis).
  bool is_diagonal() const noexcept;
  /// Bit mask of qubits carrying a non-identity operator.
  std::uint64_t support_mask() const noexcept;

  friend bool operator==(const PauliString&, const PauliString&) = default;
};

class Observable {
 public:
  Observable(std::size_t num_qubits, std::vector<PauliString> terms);

  /// Single-term convenience: `Observable::single("ZZ")`.
  static Observable single(const std::string& text, double coeff = 1.0);
  static Observable identity(std::size_t num_qubits, double coeff = 1.0);

  std::size_t num_qubits() const noexcept { return num_qubits_; }
  const std::vector<PauliString>& terms() const noexcept { return terms_; }

  friend bool operator==(const Observable&, const Observable&) = default;

 private:
  std::size_t num_qubits_;
  std::vector<PauliString> terms_;
};

/// Random Z-string (at least one Z) used as the fixed observable of the
/// circuit-execution mini-app.
Observable random_z_observable(std::size_t num_qubits, std::uint64_t seed);

/// Uniformly random Pauli string over {I, X, Y, Z}^n with unit coefficient.
Observable random_pauli_observable(std::size_t num_qubits, std::uint64_t seed);

/// Transverse-field Ising chain: -J sum Z_i Z_{i+1} - h sum X_i (open boundary).
Observable tfim_hamiltonian(std::size_t num_qubits, double coupling, double field);

nlohmann::json to_json(const Observable& obs);
Observable observable_from_json(const nlohmann::json& j);

}  // namespace qmini
