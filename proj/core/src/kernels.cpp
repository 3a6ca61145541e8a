#include "qmini/kernels.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <utility>

#include "qmini/errors.hpp"

namespace qmini::kernels {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
const Amplitude kI{0.0, 1.0};

}  // namespace

Matrix2 single_qubit_matrix(const Gate& g) {
  if (!g.is_bound()) {
    throw InvalidArgument("gate " + std::string(to_string(g.kind())) +
                          " has an unbound parameter");
  }
  const double a = g.angle().value_or(0.0);
  const double c = std::cos(a / 2.0);
  const double s = std::sin(a / 2.0);
  switch (g.kind()) {
    case GateKind::H:
      return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
    case GateKind::X:
      return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Y:
      return {0.0, -kI, kI, 0.0};
    case GateKind::Z:
      return {1.0, 0.0, 0.0, -1.0};
    case GateKind::S:
      return {1.0, 0.0, 0.0, kI};
    case GateKind::Sdg:
      return {1.0, 0.0, 0.0, -kI};
    case GateKind::T:
      return {1.0, 0.0, 0.0, std::polar(1.0, std::numbers::pi / 4)};
    case GateKind::Tdg:
      return {1.0, 0.0, 0.0, std::polar(1.0, -std::numbers::pi / 4)};
    case GateKind::RX:
      return {c, -kI * s, -kI * s, c};
    case GateKind::RY:
      return {c, -s, s, c};
    case GateKind::RZ:
      return {std::polar(1.0, -a / 2.0), 0.0, 0.0, std::polar(1.0, a / 2.0)};
    default:
      throw InvalidArgument("gate " + std::string(to_string(g.kind())) +
                            " is not a single-qubit gate");
  }
}

void apply_matrix(std::span<Amplitude> amps, std::size_t qubit, const Matrix2& m) {
  const std::size_t stride = std::size_t{1} << qubit;
  const std::size_t n = amps.size();
  for (std::size_t base = 0; base < n; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const Amplitude a0 = amps[i];
      const Amplitude a1 = amps[i + stride];
      amps[i] = m[0] * a0 + m[1] * a1;
      amps[i + stride] = m[2] * a0 + m[3] * a1;
    }
  }
}

void apply_diagonal(std::span<Amplitude> amps, std::size_t qubit, Amplitude d0, Amplitude d1) {
  const std::size_t bit = std::size_t{1} << qubit;
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= (i & bit) ? d1 : d0;
}

void apply_cx(std::span<Amplitude> amps, std::size_t control, std::size_t target) {
  const std::size_t cbit = std::size_t{1} << control;
  const std::size_t tbit = std::size_t{1} << target;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(amps[i], amps[i | tbit]);
  }
}

void apply_cz(std::span<Amplitude> amps, std::size_t a, std::size_t b) {
  const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & mask) == mask) amps[i] = -amps[i];
  }
}

void apply_swap(std::span<Amplitude> amps, std::size_t a, std::size_t b) {
  const std::size_t abit = std::size_t{1} << a;
  const std::size_t bbit = std::size_t{1} << b;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if ((i & abit) && !(i & bbit)) std::swap(amps[i], amps[(i ^ abit) | bbit]);
  }
}

double parity_sum(std::span<const Amplitude> amps, std::uint64_t mask, std::uint64_t index_offset) {
  double total = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    total += (std::popcount((index_offset + i) & mask) & 1) ? -p : p;
  }
  return total;
}

}  // namespace qmini::kernels
