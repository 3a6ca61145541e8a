#include "qmini/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "qmini/errors.hpp"
#include "qmini/kernels.hpp"
#include "qmini/rng.hpp"

namespace qmini {

namespace {

constexpr char kDumpMagic[4] = {'Q', 'M', 'S', 'V'};
constexpr std::uint32_t kDumpVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_le(std::istream& in, int bytes) {
  unsigned char b[8] = {};
  if (!in.read(reinterpret_cast<char*>(b), bytes)) {
    throw InvalidArgument("truncated state dump");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void apply_pauli(StateVector& s, Qubit q, std::uint64_t which) {
  static constexpr GateKind kPaulis[] = {GateKind::X, GateKind::Y, GateKind::Z};
  apply_gate(s, Gate::single(kPaulis[which], q));
}

}  // namespace

StateVector StateVector::zero(std::size_t num_qubits, std::size_t max_qubits) {
  if (num_qubits == 0) throw InvalidArgument("state vector needs at least one qubit");
  if (num_qubits > max_qubits) {
    throw ResourceLimit(std::to_string(num_qubits) + " qubits exceeds the simulator cap of " +
                        std::to_string(max_qubits));
  }
  std::vector<Amplitude> amps(std::size_t{1} << num_qubits);
  amps[0] = 1.0;
  return StateVector(num_qubits, std::move(amps));
}

StateVector StateVector::from_amplitudes(std::vector<Amplitude> amps) {
  if (amps.size() < 2 || !std::has_single_bit(amps.size())) {
    throw InvalidArgument("amplitude array length must be a power of two >= 2");
  }
  const auto n = static_cast<std::size_t>(std::countr_zero(amps.size()));
  return StateVector(n, std::move(amps));
}

double StateVector::norm_squared() const noexcept {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

void NoiseModel::validate() const {
  if (!(depolarizing_p >= 0.0 && depolarizing_p <= 1.0)) {
    throw InvalidArgument("depolarizing probability must lie in [0, 1]");
  }
}

void apply_gate(StateVector& s, const Gate& g) {
  for (Qubit q : g.targets()) {
    if (q >= s.num_qubits()) {
      throw InvalidArgument("gate targets qubit " + std::to_string(q) + " of a " +
                            std::to_string(s.num_qubits()) + "-qubit state");
    }
  }
  auto amps = s.amplitudes();
  switch (g.kind()) {
    case GateKind::CX:
      kernels::apply_cx(amps, g.target(0), g.target(1));
      return;
    case GateKind::CZ:
      kernels::apply_cz(amps, g.target(0), g.target(1));
      return;
    case GateKind::SWAP:
      kernels::apply_swap(amps, g.target(0), g.target(1));
      return;
    default: {
      const auto m = kernels::single_qubit_matrix(g);
      if (is_diagonal(g.kind())) {
        kernels::apply_diagonal(amps, g.target(0), m[0], m[3]);
      } else {
        kernels::apply_matrix(amps, g.target(0), m);
      }
    }
  }
}

StateVector run(const Circuit& c, const std::optional<NoiseModel>& noise, std::uint64_t seed,
                std::size_t max_qubits) {
  if (!c.is_bound()) throw InvalidArgument("run: circuit has unbound parameters");
  if (noise) noise->validate();
  StateVector s = StateVector::zero(c.num_qubits(), max_qubits);
  const bool noisy = noise && noise->depolarizing_p > 0.0;
  Xoshiro256 rng(seed);
  for (const Gate& g : c.gates()) {
    apply_gate(s, g);
    if (!noisy) continue;
    for (Qubit q : g.targets()) {
      if (rng.uniform() < noise->depolarizing_p) apply_pauli(s, q, rng.below(3));
    }
  }
  return s;
}

std::vector<Gate> basis_change_gates(const PauliString& term) {
  std::vector<Gate> gates;
  for (std::size_t q = 0; q < term.ops.size(); ++q) {
    const auto qb = static_cast<Qubit>(q);
    if (term.ops[q] == Pauli::X) {
      gates.push_back(Gate::single(GateKind::H, qb));
    } else if (term.ops[q] == Pauli::Y) {
      gates.push_back(Gate::single(GateKind::Sdg, qb));
      gates.push_back(Gate::single(GateKind::H, qb));
    }
  }
  return gates;
}

double expectation(const StateVector& s, const PauliString& term) {
  if (term.num_qubits() != s.num_qubits()) {
    throw InvalidArgument("observable spans " + std::to_string(term.num_qubits()) +
                          " qubits, state has " + std::to_string(s.num_qubits()));
  }
  if (term.is_identity()) return term.coeff * s.norm_squared();
  if (term.is_diagonal()) {
    return term.coeff * kernels::parity_sum(s.amplitudes(), term.support_mask());
  }
  StateVector rotated = s;
  for (const Gate& g : basis_change_gates(term)) apply_gate(rotated, g);
  return term.coeff * kernels::parity_sum(rotated.amplitudes(), term.support_mask());
}

double expectation(const StateVector& s, const Observable& obs) {
  if (obs.num_qubits() != s.num_qubits()) {
    throw InvalidArgument("observable spans " + std::to_string(obs.num_qubits()) +
                          " qubits, state has " + std::to_string(s.num_qubits()));
  }
  double total = 0.0;
  for (const auto& term : obs.terms()) total += expectation(s, term);
  return total;
}

std::string bitstring(std::uint64_t index, std::size_t num_qubits) {
  std::string bits(num_qubits, '0');
  for (std::size_t q = 0; q < num_qubits; ++q) {
    if ((index >> q) & 1) bits[num_qubits - 1 - q] = '1';
  }
  return bits;
}

namespace {

std::vector<std::uint64_t> draw_indices(std::span<const StateVector::Amplitude> amps,
                                        std::uint64_t shots, std::uint64_t seed) {
  std::vector<double> cdf(amps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    acc += std::norm(amps[i]);
    cdf[i] = acc;
  }
  Xoshiro256 rng(seed);
  std::vector<std::uint64_t> out;
  out.reserve(shots);
  for (std::uint64_t k = 0; k < shots; ++k) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    out.push_back(static_cast<std::uint64_t>(it - cdf.begin()));
  }
  return out;
}

}  // namespace

Histogram sample(const StateVector& s, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw InvalidArgument("sample: shots must be >= 1");
  Histogram h;
  for (std::uint64_t idx : draw_indices(s.amplitudes(), shots, seed)) {
    ++h[bitstring(idx, s.num_qubits())];
  }
  return h;
}

double estimate_from_shots(const StateVector& s, const Observable& obs, std::uint64_t shots,
                           std::uint64_t seed) {
  if (shots == 0) throw InvalidArgument("estimate_from_shots: shots must be >= 1");
  if (obs.num_qubits() != s.num_qubits()) {
    throw InvalidArgument("observable / state qubit count mismatch");
  }
  double total = 0.0;
  std::uint64_t stream = 0;
  for (const auto& term : obs.terms()) {
    if (term.is_identity()) {
      total += term.coeff;
      continue;
    }
    StateVector rotated = s;
    for (const Gate& g : basis_change_gates(term)) apply_gate(rotated, g);
    const std::uint64_t mask = term.support_mask();
    std::int64_t signed_count = 0;
    for (std::uint64_t idx : draw_indices(rotated.amplitudes(), shots, derive_seed(seed, stream++))) {
      signed_count += (std::popcount(idx & mask) & 1) ? -1 : 1;
    }
    total += term.coeff * static_cast<double>(signed_count) / static_cast<double>(shots);
  }
  return total;
}

std::uint64_t state_digest(const StateVector& s) {
  std::vector<std::uint64_t> words;
  words.reserve(2 * s.dimension() + 1);
  words.push_back(s.num_qubits());
  for (const auto& a : s.amplitudes()) {
    words.push_back(static_cast<std::uint64_t>(std::llround(a.real() * 1e12)));
    words.push_back(static_cast<std::uint64_t>(std::llround(a.imag() * 1e12)));
  }
  return combine_hashes(words);
}

void write_state_dump(const StateVector& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(kDumpMagic, 4);
  put_u32(out, kDumpVersion);
  put_u32(out, static_cast<std::uint32_t>(s.num_qubits()));
  for (const auto& a : s.amplitudes()) {
    put_f64(out, a.real());
    put_f64(out, a.imag());
  }
  if (!out) throw Error("failed writing " + path.string());
}

StateVector read_state_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kDumpMagic, 4) != 0) {
    throw InvalidArgument(path.string() + " is not a state dump");
  }
  if (get_le(in, 4) != kDumpVersion) throw InvalidArgument("unsupported state dump version");
  const auto n = static_cast<std::size_t>(get_le(in, 4));
  if (n == 0 || n > 62) throw InvalidArgument("corrupt state dump header");
  std::vector<StateVector::Amplitude> amps(std::size_t{1} << n);
  for (auto& a : amps) {
    const double re = std::bit_cast<double>(get_le(in, 8));
    const double im = std::bit_cast<double>(get_le(in, 8));
    a = {re, im};
  }
  return StateVector::from_amplitudes(std::move(amps));
}

}  // namespace qmini
