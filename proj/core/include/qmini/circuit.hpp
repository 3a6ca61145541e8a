#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace qmini {

using Qubit = std::uint32_t;

enum class GateKind : std::uint8_t { H, X, Y, Z, S, Sdg, T, Tdg, RX, RY, RZ, CX, CZ, SWAP };

inline constexpr std::array<GateKind, 14> kAllGateKinds = {
    GateKind::H,  GateKind::X,  GateKind::Y,  GateKind::Z,  GateKind::S,
    GateKind::Sdg, GateKind::T, GateKind::Tdg, GateKind::RX, GateKind::RY,
    GateKind::RZ, GateKind::CX, GateKind::CZ, GateKind::SWAP};

std::string_view to_string(GateKind kind) noexcept;
GateKind gate_kind_from_string(std::string_view name);

constexpr bool is_rotation(GateKind k) noexcept {
  return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ;
}

constexpr bool is_two_qubit(GateKind k) noexcept {
  return k == GateKind::CX || k == GateKind::CZ || k == GateKind::SWAP;
}

/// True for gates whose matrix is diagonal in the computational basis.
constexpr bool is_diagonal(GateKind k) noexcept {
  switch (k) {
    case GateKind::Z:
    case GateKind::S:
    case GateKind::Sdg:
    case GateKind::T:
    case GateKind::Tdg:
    case GateKind::RZ:
    case GateKind::CZ:
      return true;
    default:
      return false;
  }
}

/// Symbolic reference to a circuit parameter. The realized angle is
/// `scale * values[index]`; scale is 1 for plain ansatz rotations and carries
/// edge weights / mixer factors for QAOA exponentials.
struct ParamRef {
  std::uint32_t index = 0;
  double scale = 1.0;

  friend bool operator==(const ParamRef&, const ParamRef&) = default;
};

class Gate {
 public:
  static Gate single(GateKind kind, Qubit q);
  static Gate rotation(GateKind kind, Qubit q, double angle);
  static Gate symbolic(GateKind kind, Qubit q, ParamRef ref);
  static Gate two(GateKind kind, Qubit first, Qubit second);

  GateKind kind() const noexcept { return kind_; }
  std::size_t arity() const noexcept { return is_two_qubit(kind_) ? 2 : 1; }
  std::span<const Qubit> targets() const noexcept { return {targets_.data(), arity()}; }
  Qubit target(std::size_t i) const noexcept { return targets_[i]; }
  bool touches(Qubit q) const noexcept;

  const std::optional<double>& angle() const noexcept { return angle_; }
  const std::optional<ParamRef>& param_ref() const noexcept { return param_ref_; }
  bool is_bound() const noexcept { return !param_ref_.has_value(); }

  /// Same gate acting on different qubits (used by fragment extraction).
  Gate remapped(std::span<const Qubit> mapping) const;
  /// Copy of a bound rotation with its angle replaced.
  Gate with_angle(double angle) const;
  Gate inverse() const;

  friend bool operator==(const Gate&, const Gate&) = default;

 private:
  Gate() = default;

  GateKind kind_ = GateKind::H;
  std::array<Qubit, 2> targets_{0, 0};
  std::optional<double> angle_;
  std::optional<ParamRef> param_ref_;
};

class Circuit {
 public:
  explicit Circuit(std::size_t num_qubits, std::string label = {});

  std::size_t num_qubits() const noexcept { return num_qubits_; }
  std::size_t num_params() const noexcept { return num_params_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  std::size_t size() const noexcept { return gates_.size(); }
  bool empty() const noexcept { return gates_.empty(); }
  const std::string& label() const noexcept { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  /// Appends a gate after validating its qubits and parameter slots.
  Circuit& add(Gate g);

  Circuit& h(Qubit q) { return add(Gate::single(GateKind::H, q)); }
  Circuit& x(Qubit q) { return add(Gate::single(GateKind::X, q)); }
  Circuit& y(Qubit q) { return add(Gate::single(GateKind::Y, q)); }
  Circuit& z(Qubit q) { return add(Gate::single(GateKind::Z, q)); }
  Circuit& s(Qubit q) { return add(Gate::single(GateKind::S, q)); }
  Circuit& sdg(Qubit q) { return add(Gate::single(GateKind::Sdg, q)); }
  Circuit& t(Qubit q) { return add(Gate::single(GateKind::T, q)); }
  Circuit& rx(Qubit q, double a) { return add(Gate::rotation(GateKind::RX, q, a)); }
  Circuit& ry(Qubit q, double a) { return add(Gate::rotation(GateKind::RY, q, a)); }
  Circuit& rz(Qubit q, double a) { return add(Gate::rotation(GateKind::RZ, q, a)); }
  Circuit& cx(Qubit c, Qubit t) { return add(Gate::two(GateKind::CX, c, t)); }
  Circuit& cz(Qubit a, Qubit b) { return add(Gate::two(GateKind::CZ, a, b)); }
  Circuit& swap(Qubit a, Qubit b) { return add(Gate::two(GateKind::SWAP, a, b)); }

  /// Overwrites gate `index` in place; the replacement is validated like add().
  void replace(std::size_t index, Gate g);

  /// Declares that the circuit has at least `count` symbolic parameters.
  void reserve_params(std::size_t count);

  bool is_bound() const noexcept { return num_params_ == 0; }

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  std::size_t num_qubits_;
  std::size_t num_params_ = 0;
  std::vector<Gate> gates_;
  std::string label_;
};

/// Layered random circuit: each layer shuffles the qubits and splits them into
/// one- and two-qubit slots, so every qubit is touched exactly once per layer.
/// Deterministic in (num_qubits, depth, seed) on every platform.
Circuit random_circuit(std::size_t num_qubits, std::size_t depth, std::uint64_t seed);

/// Replaces every symbolic parameter with `scale * values[index]`.
Circuit bind_params(const Circuit& c, std::span<const double> values);

/// Stable 64-bit content hash (FNV-1a over a canonical byte encoding).
std::uint64_t circuit_hash(const Circuit& c);

/// Folds a sequence of 64-bit digests into one, order-sensitive.
std::uint64_t combine_hashes(std::span<const std::uint64_t> hashes);

std::string hex_digest(std::uint64_t h);

nlohmann::json to_json(const Circuit& c);
Circuit circuit_from_json(const nlohmann::json& j);

}  // namespace qmini
