#pragma once

#include <cstddef>
#include <cstdint>

#include "qmini/circuit.hpp"

namespace oracle {

// Messages per gate, derived from which amplitudes each rank needs: a gate
// mixing pairs across a global qubit b makes every rank ship its shard to
// r ^ (1 << b). A CX whose control is also global only involves the half of
// the ranks whose control bit is set. SWAP is counted as three CX.
inline std::uint64_t analytic_messages(const qmini::Gate& g, std::size_t n, std::size_t w) {
  using qmini::GateKind;
  std::size_t global_bits = 0;
  while ((std::size_t{1} << global_bits) < w) ++global_bits;
  const std::size_t local = n - global_bits;
  const auto cx = [&](qmini::Qubit c, qmini::Qubit t) -> std::uint64_t {
    if (t < local) return 0;
    return c >= local ? w / 2 : w;
  };
  switch (g.kind()) {
    case GateKind::CX: return cx(g.target(0), g.target(1));
    case GateKind::SWAP:
      return cx(g.target(0), g.target(1)) + cx(g.target(1), g.target(0)) + cx(g.target(0), g.target(1));
    case GateKind::CZ: case GateKind::Z: case GateKind::S: case GateKind::Sdg:
    case GateKind::T: case GateKind::Tdg: case GateKind::RZ:
      return 0;
    default: return g.target(0) >= local ? w : 0;
  }
}

}  // namespace oracle
