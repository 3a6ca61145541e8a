#include "qmini/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qmini/errors.hpp"
#include "qmini/rng.hpp"
#include "qmini/tasks.hpp"

namespace qmini {

Circuit fold(const Circuit& c, int scale) {
  if (scale < 1 || scale % 2 == 0) {
    throw InvalidArgument("fold: scale must be an odd integer >= 1, got " + std::to_string(scale));
  }
  const int pairs = (scale - 1) / 2;
  Circuit folded(c.num_qubits(), c.label() + (scale > 1 ? "-fold" + std::to_string(scale) : ""));
  for (const Gate& g : c.gates()) {
    folded.add(g);
    const Gate inv = g.inverse();
    for (int k = 0; k < pairs; ++k) {
      folded.add(inv);
      folded.add(g);
    }
  }
  return folded;
}

std::vector<double> trajectory_expectations(const Circuit& c, const Observable& obs,
                                            const NoiseModel& noise, std::uint64_t seed,
                                            std::uint64_t first, std::uint64_t count) {
  std::vector<double> values;
  values.reserve(count);
  for (std::uint64_t t = first; t < first + count; ++t) {
    values.push_back(expectation(run(c, noise, derive_seed(seed, t)), obs));
  }
  return values;
}

Estimate summarize(std::span<const double> values) {
  Estimate e;
  e.trajectories = values.size();
  if (values.empty()) return e;
  // Welford keeps the variance exactly zero for identical samples.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  e.mean = mean;
  if (n > 1) {
    const double var = m2 / static_cast<double>(n - 1);
    e.std_error = std::sqrt(var / static_cast<double>(n));
  }
  return e;
}

Estimate noisy_estimate(const Circuit& c, const Observable& obs, const NoiseModel& noise,
                        std::size_t trajectories, std::uint64_t seed) {
  noise.validate();
  if (trajectories == 0) throw InvalidArgument("noisy_estimate: trajectories must be >= 1");
  const auto values = trajectory_expectations(c, obs, noise, seed, 0, trajectories);
  return summarize(values);
}

Estimate noisy_estimate(Executor& exec, const Circuit& c, const Observable& obs,
                        const NoiseModel& noise, std::size_t trajectories, std::uint64_t seed,
                        std::vector<TaskResult>* log) {
  noise.validate();
  if (trajectories == 0) throw InvalidArgument("noisy_estimate: trajectories must be >= 1");
  std::vector<Task> tasks;
  for (std::size_t first = 0, chunk = 0; first < trajectories; first += kTrajectoryChunk, ++chunk) {
    const std::size_t count = std::min(kTrajectoryChunk, trajectories - first);
    tasks.push_back(make_trajectory_task(indexed_id("traj-", chunk), c, obs, noise, seed, first, count));
  }
  auto results = exec.submit_all(std::move(tasks));
  std::vector<double> values;
  values.reserve(trajectories);
  for (const TaskResult& r : results) {
    const auto& chunk = r.vector();
    values.insert(values.end(), chunk.begin(), chunk.end());
  }
  if (log) log->insert(log->end(), results.begin(), results.end());
  return summarize(values);
}

std::string_view to_string(Extrapolation e) noexcept {
  return e == Extrapolation::linear ? "linear" : "richardson";
}

Extrapolation extrapolation_from_string(std::string_view name) {
  if (name == "linear") return Extrapolation::linear;
  if (name == "richardson") return Extrapolation::richardson;
  throw InvalidArgument("unknown extrapolation '" + std::string(name) + "'");
}

double extrapolate_to_zero(std::span<const double> scales, std::span<const double> values,
                           Extrapolation method) {
  if (scales.size() != values.size()) {
    throw InvalidArgument("extrapolate_to_zero: scales and values differ in length");
  }
  const std::size_t n = scales.size();
  if (n < 2) throw InvalidArgument("extrapolation needs at least two scale factors");
  if (std::set<double>(scales.begin(), scales.end()).size() != n) {
    throw InvalidArgument("extrapolation scale factors must be distinct");
  }

  if (method == Extrapolation::linear) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += scales[i];
      sy += values[i];
      sxx += scales[i] * scales[i];
      sxy += scales[i] * values[i];
    }
    const double dn = static_cast<double>(n);
    const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    return (sy - slope * sx) / dn;
  }

  // Lagrange basis evaluated at zero.
  double result = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double weight = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) weight *= scales[j] / (scales[j] - scales[i]);
    }
    result += weight * values[i];
  }
  return result;
}

nlohmann::json to_json(const MitigationResult& r) {
  nlohmann::json per_scale = nlohmann::json::array();
  for (const auto& [scale, e] : r.per_scale) {
    per_scale.push_back({{"scale", scale},
                         {"mean", e.mean},
                         {"stderr", e.std_error},
                         {"trajectories", e.trajectories}});
  }
  return {{"per_scale", per_scale},
          {"mitigated_value", r.mitigated_value},
          {"extrapolation", to_string(r.method)}};
}

MitigationResult zne(Executor& exec, const Circuit& c, const Observable& obs,
                     const NoiseModel& noise, std::span<const int> scales,
                     std::size_t trajectories, std::uint64_t seed, Extrapolation method,
                     std::vector<TaskResult>* log) {
  noise.validate();
  if (scales.size() < 2) throw InvalidArgument("zne needs at least two scale factors");
  if (trajectories == 0) throw InvalidArgument("zne: trajectories must be >= 1");
  if (std::set<int>(scales.begin(), scales.end()).size() != scales.size()) {
    throw InvalidArgument("zne scale factors must be distinct");
  }
  for (int s : scales) {
    if (s < 1 || s % 2 == 0) {
      throw InvalidArgument("zne scale factors must be odd integers >= 1, got " + std::to_string(s));
    }
  }

  // One batch for every scale so the pool sees all chunks at once.
  std::vector<Task> tasks;
  for (int s : scales) {
    const Circuit folded = fold(c, s);
    const std::uint64_t scale_seed = derive_seed(seed, static_cast<std::uint64_t>(s));
    for (std::size_t first = 0, chunk = 0; first < trajectories; first += kTrajectoryChunk, ++chunk) {
      const std::size_t count = std::min(kTrajectoryChunk, trajectories - first);
      tasks.push_back(make_trajectory_task(
          indexed_id("zne-s" + indexed_id("", static_cast<std::size_t>(s), 3) + "-c", chunk, 5),
          folded, obs, noise, scale_seed, first, count));
    }
  }
  auto results = exec.submit_all(std::move(tasks));

  MitigationResult out;
  out.method = method;
  std::size_t next = 0;
  std::vector<double> xs, ys;
  // Results come back in id order, i.e. grouped by ascending scale.
  std::vector<int> sorted(scales.begin(), scales.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t chunks = (trajectories + kTrajectoryChunk - 1) / kTrajectoryChunk;
  for (int s : sorted) {
    std::vector<double> values;
    values.reserve(trajectories);
    for (std::size_t k = 0; k < chunks; ++k) {
      const auto& v = results[next++].vector();
      values.insert(values.end(), v.begin(), v.end());
    }
    const Estimate e = summarize(values);
    out.per_scale[s] = e;
    xs.push_back(s);
    ys.push_back(e.mean);
  }
  out.mitigated_value = extrapolate_to_zero(xs, ys, method);
  if (log) log->insert(log->end(), results.begin(), results.end());
  return out;
}

}  // namespace qmini
