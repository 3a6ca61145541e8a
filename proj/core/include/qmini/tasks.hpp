#pragma once

// Payload builders for the builtin task kinds. Payloads are plain JSON so the
// same Task could cross a process or network boundary unchanged.
//
//   expectation       {circuit, observable, [shots, seed]}          -> double
//   cost_eval         {circuit, observable, [shots, seed]}          -> double
//   circuit_run       {circuit, [shots, seed]}                      -> histogram | state digest
//   fragment_job      {circuit, observable, [shots, seed]}          -> per-term values
//   noisy_trajectory  {circuit, observable, noise_p, seed, first, count}
//                                                                   -> per-trajectory values
//   stage_step        {op: "sleep", seconds} | {op: "expectation", circuit, observable}

#include <cstdint>
#include <optional>
#include <string>

#include "qmini/circuit.hpp"
#include "qmini/engine.hpp"
#include "qmini/observable.hpp"
#include "qmini/statevector.hpp"

namespace qmini {

struct ShotOptions {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
};

Task make_expectation_task(std::string id, const Circuit& c, const Observable& obs,
                           std::optional<ShotOptions> shots = std::nullopt);
Task make_cost_task(std::string id, const Circuit& c, const Observable& obs,
                    std::optional<ShotOptions> shots = std::nullopt);
Task make_run_task(std::string id, const Circuit& c, std::optional<ShotOptions> shots = std::nullopt);
/// Per-term exact (or shot-estimated) expectations of every term of `obs`.
Task make_fragment_task(std::string id, const Circuit& c, const Observable& obs,
                        std::optional<ShotOptions> shots = std::nullopt);
Task make_trajectory_task(std::string id, const Circuit& c, const Observable& obs,
                          const NoiseModel& noise, std::uint64_t seed, std::uint64_t first,
                          std::uint64_t count);
Task make_sleep_task(std::string id, double seconds);

/// Zero-pads `index` so lexicographic id order matches numeric order.
std::string indexed_id(const std::string& prefix, std::size_t index, int width = 6);

}  // namespace qmini
