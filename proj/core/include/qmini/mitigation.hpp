#pragma once

// Zero-noise extrapolation over the stochastic Pauli noise model.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmini/circuit.hpp"
#include "qmini/engine.hpp"
#include "qmini/observable.hpp"
#include "qmini/statevector.hpp"

namespace qmini {

/// Global unitary folding: every gate G becomes G (G^dagger G)^((scale-1)/2).
Circuit fold(const Circuit& c, int scale);

struct Estimate {
  double mean = 0.0;
  /// Sample standard deviation over sqrt(trajectories); 0 for one trajectory.
  double std_error = 0.0;
  std::size_t trajectories = 0;
};

/// Exact expectations of trajectories [first, first + count). Trajectory t
/// always draws its noise from derive_seed(seed, t), so splitting the range
/// into chunks never changes the values.
std::vector<double> trajectory_expectations(const Circuit& c, const Observable& obs,
                                            const NoiseModel& noise, std::uint64_t seed,
                                            std::uint64_t first, std::uint64_t count);

Estimate summarize(std::span<const double> values);

Estimate noisy_estimate(const Circuit& c, const Observable& obs, const NoiseModel& noise,
                        std::size_t trajectories, std::uint64_t seed);
/// Same estimate, with trajectory chunks fanned out as tasks on `exec`.
Estimate noisy_estimate(Executor& exec, const Circuit& c, const Observable& obs,
                        const NoiseModel& noise, std::size_t trajectories, std::uint64_t seed,
                        std::vector<TaskResult>* log = nullptr);

enum class Extrapolation { linear, richardson };

std::string_view to_string(Extrapolation e) noexcept;
Extrapolation extrapolation_from_string(std::string_view name);

/// Value at scale 0 of the least-squares line (linear) or of the
/// interpolating polynomial through every point (richardson; amplifies variance).
double extrapolate_to_zero(std::span<const double> scales, std::span<const double> values,
                           Extrapolation method);

struct MitigationResult {
  std::map<int, Estimate> per_scale;
  double mitigated_value = 0.0;
  Extrapolation method = Extrapolation::linear;
};

nlohmann::json to_json(const MitigationResult& r);

/// Trajectory chunk size used when fanning out noisy estimates.
inline constexpr std::size_t kTrajectoryChunk = 250;

MitigationResult zne(Executor& exec, const Circuit& c, const Observable& obs,
                     const NoiseModel& noise, std::span<const int> scales,
                     std::size_t trajectories, std::uint64_t seed,
                     Extrapolation method = Extrapolation::linear,
                     std::vector<TaskResult>* log = nullptr);

}  // namespace qmini
