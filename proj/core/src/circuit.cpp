#include "qmini/circuit.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "qmini/errors.hpp"
#include "qmini/rng.hpp"

namespace qmini {

namespace {

constexpr std::array<std::string_view, 14> kGateNames = {
    "H", "X", "Y", "Z", "S", "Sdg", "T", "Tdg", "RX", "RY", "RZ", "CX", "CZ", "SWAP"};

constexpr std::array<GateKind, 3> kRandomTwoQubit = {GateKind::CX, GateKind::CZ,
                                                     GateKind::SWAP};
constexpr std::array<GateKind, 9> kRandomSingleQubit = {
    GateKind::H, GateKind::X,  GateKind::Y,  GateKind::Z, GateKind::S,
    GateKind::T, GateKind::RX, GateKind::RY, GateKind::RZ};

class Fnv1a {
 public:
  void byte(std::uint8_t b) noexcept {
    h_ ^= b;
    h_ *= 0x100000001B3ULL;
  }
  void u64(std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

}  // namespace

std::string_view to_string(GateKind kind) noexcept {
  return kGateNames[static_cast<std::size_t>(kind)];
}

GateKind gate_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kGateNames.size(); ++i) {
    if (kGateNames[i] == name) return static_cast<GateKind>(i);
  }
  throw InvalidArgument("unknown gate kind '" + std::string(name) + "'");
}

Gate Gate::single(GateKind kind, Qubit q) {
  if (is_two_qubit(kind) || is_rotation(kind)) {
    throw InvalidArgument("gate " + std::string(to_string(kind)) +
                          " is not a fixed single-qubit gate");
  }
  Gate g;
  g.kind_ = kind;
  g.targets_ = {q, q};
  return g;
}

Gate Gate::rotation(GateKind kind, Qubit q, double angle) {
  if (!is_rotation(kind)) {
    throw InvalidArgument("gate " + std::string(to_string(kind)) + " takes no angle");
  }
  if (!std::isfinite(angle)) throw InvalidArgument("rotation angle must be finite");
  Gate g;
  g.kind_ = kind;
  g.targets_ = {q, q};
  g.angle_ = angle;
  return g;
}

Gate Gate::symbolic(GateKind kind, Qubit q, ParamRef ref) {
  if (!is_rotation(kind)) {
    throw InvalidArgument("gate " + std::string(to_string(kind)) +
                          " cannot carry a symbolic parameter");
  }
  Gate g;
  g.kind_ = kind;
  g.targets_ = {q, q};
  g.param_ref_ = ref;
  return g;
}

Gate Gate::two(GateKind kind, Qubit first, Qubit second) {
  if (!is_two_qubit(kind)) {
    throw InvalidArgument("gate " + std::string(to_string(kind)) + " is not a two-qubit gate");
  }
  if (first == second) throw InvalidArgument("two-qubit gate targets must be distinct");
  Gate g;
  g.kind_ = kind;
  g.targets_ = {first, second};
  return g;
}

bool Gate::touches(Qubit q) const noexcept {
  for (Qubit t : targets()) {
    if (t == q) return true;
  }
  return false;
}

Gate Gate::remapped(std::span<const Qubit> mapping) const {
  Gate g = *this;
  for (std::size_t i = 0; i < arity(); ++i) g.targets_[i] = mapping[targets_[i]];
  if (arity() == 1) g.targets_[1] = g.targets_[0];
  return g;
}

Gate Gate::with_angle(double angle) const {
  if (!is_rotation(kind_)) throw InvalidArgument("with_angle on a non-rotation gate");
  return rotation(kind_, targets_[0], angle);
}

Gate Gate::inverse() const {
  switch (kind_) {
    case GateKind::S:
      return single(GateKind::Sdg, targets_[0]);
    case GateKind::Sdg:
      return single(GateKind::S, targets_[0]);
    case GateKind::T:
      return single(GateKind::Tdg, targets_[0]);
    case GateKind::Tdg:
      return single(GateKind::T, targets_[0]);
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      if (!angle_) throw InvalidArgument("cannot invert an unbound rotation");
      return rotation(kind_, targets_[0], -*angle_);
    default:
      return *this;  // H, Paulis, CX, CZ, SWAP are self-inverse
  }
}

Circuit::Circuit(std::size_t num_qubits, std::string label)
    : num_qubits_(num_qubits), label_(std::move(label)) {
  if (num_qubits == 0) throw InvalidArgument("circuit needs at least one qubit");
}

Circuit& Circuit::add(Gate g) {
  for (Qubit q : g.targets()) {
    if (q >= num_qubits_) {
      throw InvalidArgument("gate " + std::string(to_string(g.kind())) + " targets qubit " +
                            std::to_string(q) + " outside a " + std::to_string(num_qubits_) +
                            "-qubit circuit");
    }
  }
  if (const auto& ref = g.param_ref()) {
    num_params_ = std::max<std::size_t>(num_params_, ref->index + 1);
  }
  gates_.push_back(g);
  return *this;
}

void Circuit::replace(std::size_t index, Gate g) {
  if (index >= gates_.size()) {
    throw InvalidArgument("replace: gate index " + std::to_string(index) + " out of range");
  }
  for (Qubit q : g.targets()) {
    if (q >= num_qubits_) throw InvalidArgument("replace: qubit out of range");
  }
  if (const auto& ref = g.param_ref()) {
    num_params_ = std::max<std::size_t>(num_params_, ref->index + 1);
  }
  gates_[index] = g;
}

void Circuit::reserve_params(std::size_t count) { num_params_ = std::max(num_params_, count); }

Circuit random_circuit(std::size_t num_qubits, std::size_t depth, std::uint64_t seed) {
  if (num_qubits == 0) throw InvalidArgument("random_circuit: num_qubits must be >= 1");
  if (depth == 0) throw InvalidArgument("random_circuit: depth must be >= 1");

  Xoshiro256 rng(seed);
  Circuit c(num_qubits, "random-n" + std::to_string(num_qubits) + "-d" +
                            std::to_string(depth) + "-s" + std::to_string(seed));
  std::vector<Qubit> order(num_qubits);

  for (std::size_t layer = 0; layer < depth; ++layer) {
    std::iota(order.begin(), order.end(), Qubit{0});
    for (std::size_t i = num_qubits; i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    std::size_t pos = 0;
    while (pos < num_qubits) {
      const bool pair = (num_qubits - pos >= 2) && rng.coin();
      if (pair) {
        const GateKind kind = kRandomTwoQubit[rng.below(kRandomTwoQubit.size())];
        c.add(Gate::two(kind, order[pos], order[pos + 1]));
        pos += 2;
      } else {
        const GateKind kind = kRandomSingleQubit[rng.below(kRandomSingleQubit.size())];
        if (is_rotation(kind)) {
          c.add(Gate::rotation(kind, order[pos], 2.0 * std::numbers::pi * rng.uniform()));
        } else {
          c.add(Gate::single(kind, order[pos]));
        }
        pos += 1;
      }
    }
  }
  return c;
}

Circuit bind_params(const Circuit& c, std::span<const double> values) {
  if (values.size() != c.num_params()) {
    throw InvalidArgument("bind_params: circuit has " + std::to_string(c.num_params()) +
                          " parameters, got " + std::to_string(values.size()) + " values");
  }
  Circuit bound(c.num_qubits(), c.label());
  for (const Gate& g : c.gates()) {
    if (const auto& ref = g.param_ref()) {
      bound.add(Gate::rotation(g.kind(), g.target(0), ref->scale * values[ref->index]));
    } else {
      bound.add(g);
    }
  }
  return bound;
}

std::uint64_t circuit_hash(const Circuit& c) {
  Fnv1a h;
  h.u64(c.num_qubits());
  h.u64(c.gates().size());
  for (const Gate& g : c.gates()) {
    h.byte(static_cast<std::uint8_t>(g.kind()));
    for (Qubit q : g.targets()) h.u64(q);
    if (const auto& a = g.angle()) {
      h.byte(1);
      h.u64(static_cast<std::uint64_t>(std::llround(*a * 1e12)));
    } else if (const auto& ref = g.param_ref()) {
      h.byte(2);
      h.u64(ref->index);
      h.u64(static_cast<std::uint64_t>(std::llround(ref->scale * 1e12)));
    } else {
      h.byte(0);
    }
  }
  return h.value();
}

std::uint64_t combine_hashes(std::span<const std::uint64_t> hashes) {
  Fnv1a h;
  h.u64(hashes.size());
  for (std::uint64_t v : hashes) h.u64(v);
  return h.value();
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json to_json(const Circuit& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const Gate& g : c.gates()) {
    nlohmann::json jg;
    jg["kind"] = to_string(g.kind());
    jg["targets"] = std::vector<Qubit>(g.targets().begin(), g.targets().end());
    if (g.angle()) jg["param"] = *g.angle();
    if (g.param_ref()) {
      jg["param_ref"] = g.param_ref()->index;
      if (g.param_ref()->scale != 1.0) jg["scale"] = g.param_ref()->scale;
    }
    gates.push_back(std::move(jg));
  }
  nlohmann::json j{{"num_qubits", c.num_qubits()}, {"gates", std::move(gates)},
                   {"label", c.label()}};
  if (c.num_params() > 0) j["num_params"] = c.num_params();
  return j;
}

Circuit circuit_from_json(const nlohmann::json& j) {
  try {
    Circuit c(j.at("num_qubits").get<std::size_t>(), j.value("label", std::string{}));
    for (const auto& jg : j.at("gates")) {
      const GateKind kind = gate_kind_from_string(jg.at("kind").get<std::string>());
      const auto targets = jg.at("targets").get<std::vector<Qubit>>();
      if (targets.size() != (is_two_qubit(kind) ? 2u : 1u)) {
        throw InvalidArgument("gate " + std::string(to_string(kind)) +
                              " has the wrong number of targets");
      }
      if (is_two_qubit(kind)) {
        c.add(Gate::two(kind, targets[0], targets[1]));
      } else if (is_rotation(kind)) {
        const bool has_param = jg.contains("param");
        const bool has_ref = jg.contains("param_ref");
        if (has_param == has_ref) {
          throw InvalidArgument("rotation needs exactly one of param / param_ref");
        }
        if (has_param) {
          c.add(Gate::rotation(kind, targets[0], jg.at("param").get<double>()));
        } else {
          c.add(Gate::symbolic(kind, targets[0],
                               ParamRef{jg.at("param_ref").get<std::uint32_t>(),
                                        jg.value("scale", 1.0)}));
        }
      } else {
        if (jg.contains("param") || jg.contains("param_ref")) {
          throw InvalidArgument("gate " + std::string(to_string(kind)) + " takes no parameter");
        }
        c.add(Gate::single(kind, targets[0]));
      }
    }
    c.reserve_params(j.value("num_params", std::size_t{0}));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed circuit JSON: ") + e.what());
  }
}

}  // namespace qmini
