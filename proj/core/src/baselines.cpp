#include "pact/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pact/error.hpp"
#include "pact/parallel.hpp"

namespace pact {

namespace {

// Mean over sensors of traces(t, s) sampled at each pixel's time of flight.
ImageSequence backproject(const Sinogram& traces, const ImageGrid& grid,
                          BackprojectionOptions options, BackprojectionStats* stats) {
  const SensorGeometry& geom = traces.geometry();
  check_coverage(grid, geom);
  const std::size_t n = grid.n;
  const std::size_t s_count = traces.sensors();
  const std::size_t p_count = grid.pixel_count();

  // Fractional sample index per (sensor, pixel), shared by all frames.
  std::vector<double> index(s_count * p_count);
  parallel_for(s_count, [&](std::size_t s) {
    for (std::size_t row = 0; row < n; ++row)
      for (std::size_t col = 0; col < n; ++col)
        index[s * p_count + row * n + col] = geom.sample_index_for_distance(
            distance(grid.pixel_center(row, col), geom.positions[s]));
  });

  ImageSequence out(grid, traces.frame_times());
  const double weight = 1.0 / static_cast<double>(s_count);
  parallel_for(traces.frames() * n, [&](std::size_t job) {
    const std::size_t t = job / n;
    const std::size_t row = job % n;
    for (std::size_t col = 0; col < n; ++col) {
      const std::size_t j = row * n + col;
      double acc = 0.0;
      for (std::size_t s = 0; s < s_count; ++s) {
        const auto trace = traces.trace(t, s);
        const double f = index[s * p_count + j];
        const auto b = static_cast<std::size_t>(f);
        const double frac = f - static_cast<double>(b);
        double v = trace[b];
        if (frac != 0.0) v += frac * (trace[b + 1] - trace[b]);
        acc += v;
      }
      out.at(t, row, col) = weight * acc;
    }
  });

  const auto [lo, hi] = std::minmax_element(out.values().begin(), out.values().end());
  if (stats) *stats = {*lo, *hi};
  if (options.clamp_negative)
    for (double& v : out.values()) v = std::max(v, 0.0);
  return out;
}

}  // namespace

ImageSequence reconstruct_das(const Sinogram& sino, const ImageGrid& grid,
                              BackprojectionOptions options, BackprojectionStats* stats) {
  sino.validate();
  return backproject(sino, grid, options, stats);
}

ImageSequence reconstruct_ubp(const Sinogram& sino, const ImageGrid& grid,
                              BackprojectionOptions options, BackprojectionStats* stats) {
  sino.validate();
  const SensorGeometry& geom = sino.geometry();
  const std::size_t f = sino.samples();
  const double half = 0.5 * geom.sample_rate;

  const auto derivative = [&](std::span<const double> in, std::size_t i) {
    if (i == 0) return (in[1] - in[0]) * geom.sample_rate;
    if (i + 1 == f) return (in[f - 1] - in[f - 2]) * geom.sample_rate;
    return (in[i + 1] - in[i - 1]) * half;
  };

  Sinogram filtered = sino;
  parallel_for(sino.frames() * sino.sensors(), [&](std::size_t job) {
    const auto raw = sino.trace(job / sino.sensors(), job % sino.sensors());
    // Circular means become pressure through one time derivative.
    std::vector<double> pressure(raw.begin(), raw.end());
    if (sino.signal() == SignalKind::circular_mean)
      for (std::size_t i = 0; i < f; ++i) pressure[i] = derivative(raw, i);
    auto b = filtered.trace(job / sino.sensors(), job % sino.sensors());
    for (std::size_t i = 0; i < f; ++i)
      b[i] = 2.0 * pressure[i] - 2.0 * geom.sample_time(i) * derivative(pressure, i);
  });
  return backproject(filtered, grid, options, stats);
}

}  // namespace pact
