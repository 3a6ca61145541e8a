#pragma once

// Amplitude-block kernels shared by the single-node and sharded simulators.
// Qubit 0 is the least-significant bit of the amplitude index.

#include <array>
#include <complex>
#include <cstddef>
#include <span>

#include "qmini/circuit.hpp"

namespace qmini::kernels {

using Amplitude = std::complex<double>;
/// Row-major 2x2 unitary {m00, m01, m10, m11}.
using Matrix2 = std::array<Amplitude, 4>;

/// Matrix of a bound single-qubit gate.
Matrix2 single_qubit_matrix(const Gate& g);

void apply_matrix(std::span<Amplitude> amps, std::size_t qubit, const Matrix2& m);

/// Multiplies amplitudes whose `qubit` bit is 0 by d0 and 1 by d1.
void apply_diagonal(std::span<Amplitude> amps, std::size_t qubit, Amplitude d0, Amplitude d1);

void apply_cx(std::span<Amplitude> amps, std::size_t control, std::size_t target);
void apply_cz(std::span<Amplitude> amps, std::size_t a, std::size_t b);
void apply_swap(std::span<Amplitude> amps, std::size_t a, std::size_t b);

/// Sum over the block of sign(i) * |amps[i]|^2, where sign is the parity of
/// the bits of (index_offset + i) selected by `mask`.
double parity_sum(std::span<const Amplitude> amps, std::uint64_t mask,
                  std::uint64_t index_offset = 0);

}  // namespace qmini::kernels
