#include "qmini/observable.hpp"

#include <cmath>

#include "qmini/errors.hpp"
#include "qmini/rng.hpp"

namespace qmini {

PauliString PauliString::parse(const std::string& text, double coeff) {
  if (text.empty()) throw InvalidArgument("empty Pauli string");
  PauliString p;
  p.coeff = coeff;
  p.ops.resize(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    Pauli op;
    switch (text[i]) {
      case 'I': op = Pauli::I; break;
      case 'X': op = Pauli::X; break;
      case 'Y': op = Pauli::Y; break;
      case 'Z': op = Pauli::Z; break;
      default:
        throw InvalidArgument("invalid Pauli character '" + std::string(1, text[i]) + "'");
    }
    p.ops[text.size() - 1 - i] = op;
  }
  return p;
}

std::string PauliString::to_string() const {
  static constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
  std::string s(ops.size(), 'I');
  for (std::size_t q = 0; q < ops.size(); ++q) {
    s[ops.size() - 1 - q] = kChars[static_cast<int>(ops[q])];
  }
  return s;
}

bool PauliString::is_identity() const noexcept {
  for (Pauli p : ops) {
    if (p != Pauli::I) return false;
  }
  return true;
}

bool PauliString::is_diagonal() const noexcept {
  for (Pauli p : ops) {
    if (p == Pauli::X || p == Pauli::Y) return false;
  }
  return true;
}

std::uint64_t PauliString::support_mask() const noexcept {
  std::uint64_t mask = 0;
  for (std::size_t q = 0; q < ops.size(); ++q) {
    if (ops[q] != Pauli::I) mask |= std::uint64_t{1} << q;
  }
  return mask;
}

Observable::Observable(std::size_t num_qubits, std::vector<PauliString> terms)
    : num_qubits_(num_qubits), terms_(std::move(terms)) {
  if (num_qubits_ == 0) throw InvalidArgument("observable needs at least one qubit");
  if (terms_.empty()) throw InvalidArgument("observable needs at least one term");
  for (const auto& t : terms_) {
    if (t.num_qubits() != num_qubits_) {
      throw InvalidArgument("Pauli term '" + t.to_string() + "' does not span " +
                            std::to_string(num_qubits_) + " qubits");
    }
    if (!std::isfinite(t.coeff)) throw InvalidArgument("Pauli coefficient must be finite");
  }
}

Observable Observable::single(const std::string& text, double coeff) {
  return Observable(text.size(), {PauliString::parse(text, coeff)});
}

Observable Observable::identity(std::size_t num_qubits, double coeff) {
  return Observable(num_qubits, {PauliString{std::vector<Pauli>(num_qubits, Pauli::I), coeff}});
}

Observable random_z_observable(std::size_t num_qubits, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  PauliString p{std::vector<Pauli>(num_qubits, Pauli::I), 1.0};
  for (auto& op : p.ops) op = rng.coin() ? Pauli::Z : Pauli::I;
  if (p.is_identity()) p.ops[rng.below(num_qubits)] = Pauli::Z;
  return Observable(num_qubits, {std::move(p)});
}

Observable random_pauli_observable(std::size_t num_qubits, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  PauliString p{std::vector<Pauli>(num_qubits, Pauli::I), 1.0};
  for (auto& op : p.ops) op = static_cast<Pauli>(rng.below(4));
  return Observable(num_qubits, {std::move(p)});
}

Observable tfim_hamiltonian(std::size_t num_qubits, double coupling, double field) {
  std::vector<PauliString> terms;
  for (std::size_t q = 0; q + 1 < num_qubits; ++q) {
    PauliString zz{std::vector<Pauli>(num_qubits, Pauli::I), -coupling};
    zz.ops[q] = zz.ops[q + 1] = Pauli::Z;
    terms.push_back(std::move(zz));
  }
  for (std::size_t q = 0; q < num_qubits; ++q) {
    PauliString x{std::vector<Pauli>(num_qubits, Pauli::I), -field};
    x.ops[q] = Pauli::X;
    terms.push_back(std::move(x));
  }
  return Observable(num_qubits, std::move(terms));
}

nlohmann::json to_json(const Observable& obs) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : obs.terms()) {
    terms.push_back({{"ops", t.to_string()}, {"coeff", t.coeff}});
  }
  return {{"num_qubits", obs.num_qubits()}, {"terms", std::move(terms)}};
}

Observable observable_from_json(const nlohmann::json& j) {
  try {
    std::vector<PauliString> terms;
    for (const auto& jt : j.at("terms")) {
      terms.push_back(PauliString::parse(jt.at("ops").get<std::string>(),
                                         jt.value("coeff", 1.0)));
    }
    return Observable(j.at("num_qubits").get<std::size_t>(), std::move(terms));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed observable JSON: ") + e.what());
  }
}

}  // namespace qmini
