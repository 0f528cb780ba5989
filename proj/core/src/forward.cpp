#include "pact/forward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pact/error.hpp"
#include "pact/parallel.hpp"
#include "pact/random.hpp"

namespace pact {

ForwardOperator::ForwardOperator(ImageGrid grid, SensorGeometry geometry, ForwardOptions options)
    : grid_(grid), geometry_(std::move(geometry)), options_(options) {
  check_coverage(grid_, geometry_);
  const std::size_t s_count = sensors();
  const std::size_t p_count = pixels();
  taps_.resize(s_count * p_count);
  parallel_for(s_count, [&](std::size_t s) {
    const Point2 sensor = geometry_.positions[s];
    for (std::size_t row = 0; row < grid_.n; ++row) {
      for (std::size_t col = 0; col < grid_.n; ++col) {
        const double d = distance(grid_.pixel_center(row, col), sensor);
        const double f = geometry_.sample_index_for_distance(d);
        const double bin = std::floor(f);
        const double frac = f - bin;
        Tap& tap = taps_[s * p_count + row * grid_.n + col];
        tap.bin = static_cast<std::int32_t>(bin);
        tap.lower = (1.0 - frac) / d;
        tap.upper = frac / d;
      }
    }
  });
}

ForwardOperator build_forward_operator(const ImageGrid& grid, const SensorGeometry& geom,
                                       ForwardOptions options) {
  return ForwardOperator(grid, geom, options);
}

void ForwardOperator::differentiate(std::span<const double> in, std::span<double> out) const {
  const std::size_t f = in.size();
  const double rate = geometry_.sample_rate;
  const double half = 0.5 * rate;
  out[0] = (in[1] - in[0]) * rate;
  for (std::size_t i = 1; i + 1 < f; ++i) out[i] = (in[i + 1] - in[i - 1]) * half;
  out[f - 1] = (in[f - 1] - in[f - 2]) * rate;
}

void ForwardOperator::differentiate_transpose(std::span<const double> in,
                                              std::span<double> out) const {
  const std::size_t f = in.size();
  const double rate = geometry_.sample_rate;
  const double half = 0.5 * rate;
  std::fill(out.begin(), out.end(), 0.0);
  out[0] -= rate * in[0];
  out[1] += rate * in[0];
  for (std::size_t i = 1; i + 1 < f; ++i) {
    out[i - 1] -= half * in[i];
    out[i + 1] += half * in[i];
  }
  out[f - 2] -= rate * in[f - 1];
  out[f - 1] += rate * in[f - 1];
}

void ForwardOperator::forward(std::span<const double> images, std::size_t frames,
                              std::span<double> out) const {
  const std::size_t p_count = pixels();
  const std::size_t f_count = samples();
  const std::size_t s_count = sensors();
  require(images.size() == frames * p_count, ErrorCode::shape_mismatch,
          "forward: image size does not match the operator grid");
  require(out.size() == frames * s_count * f_count, ErrorCode::shape_mismatch,
          "forward: output size does not match the operator geometry");

  parallel_for(frames * s_count, [&](std::size_t job) {
    const std::size_t t = job / s_count;
    const std::size_t s = job % s_count;
    const auto image = images.subspan(t * p_count, p_count);
    const auto tap = taps(s);
    auto trace = out.subspan(job * f_count, f_count);
    std::vector<double> deposit(f_count, 0.0);
    for (std::size_t j = 0; j < p_count; ++j) {
      const double v = image[j];
      if (v == 0.0) continue;
      const auto b = static_cast<std::size_t>(tap[j].bin);
      deposit[b] += tap[j].lower * v;
      if (tap[j].upper != 0.0) deposit[b + 1] += tap[j].upper * v;
    }
    if (options_.temporal_derivative)
      differentiate(deposit, trace);
    else
      std::copy(deposit.begin(), deposit.end(), trace.begin());
  });
}

void ForwardOperator::adjoint(std::span<const double> sinogram, std::size_t frames,
                              std::span<double> out) const {
  const std::size_t p_count = pixels();
  const std::size_t f_count = samples();
  const std::size_t s_count = sensors();
  require(sinogram.size() == frames * s_count * f_count, ErrorCode::shape_mismatch,
          "adjoint: sinogram size does not match the operator geometry");
  require(out.size() == frames * p_count, ErrorCode::shape_mismatch,
          "adjoint: output size does not match the operator grid");

  std::vector<double> filtered(sinogram.begin(), sinogram.end());
  if (options_.temporal_derivative) {
    parallel_for(frames * s_count, [&](std::size_t job) {
      differentiate_transpose(sinogram.subspan(job * f_count, f_count),
                              std::span<double>(filtered).subspan(job * f_count, f_count));
    });
  }

  const std::size_t n = grid_.n;
  parallel_for(frames * n, [&](std::size_t job) {
    const std::size_t t = job / n;
    const std::size_t row = job % n;
    const double* frame = filtered.data() + t * s_count * f_count;
    for (std::size_t col = 0; col < n; ++col) {
      const std::size_t j = row * n + col;
      double acc = 0.0;
      for (std::size_t s = 0; s < s_count; ++s) {
        const Tap& tap = taps_[s * p_count + j];
        const double* trace = frame + s * f_count;
        const auto b = static_cast<std::size_t>(tap.bin);
        acc += tap.lower * trace[b];
        if (tap.upper != 0.0) acc += tap.upper * trace[b + 1];
      }
      out[t * p_count + j] = acc;
    }
  });
}

Sinogram apply_forward(const ForwardOperator& op, const ImageSequence& frames) {
  require(frames.grid() == op.grid(), ErrorCode::shape_mismatch,
          "apply_forward: image grid does not match the operator grid");
  Sinogram sino(op.geometry(), frames.frame_times());
  sino.set_signal(op.signal());
  op.forward(frames.data(), frames.frames(), sino.data());
  return sino;
}

ImageSequence apply_adjoint(const ForwardOperator& op, const Sinogram& sino) {
  require(sino.sensors() == op.sensors() && sino.samples() == op.samples(),
          ErrorCode::shape_mismatch, "apply_adjoint: sinogram does not match operator geometry");
  require(sino.signal() == op.signal(), ErrorCode::shape_mismatch,
          "apply_adjoint: sinogram signal kind does not match the operator");
  ImageSequence out(op.grid(), sino.frame_times());
  op.adjoint(sino.data(), sino.frames(), out.data());
  return out;
}

Sinogram add_noise(const Sinogram& sino, double snr_db, std::uint64_t seed) {
  require(!std::isnan(snr_db) && snr_db != -std::numeric_limits<double>::infinity(),
          ErrorCode::invalid_argument, "add_noise: snr_db must be finite or +inf");
  Sinogram out = sino;
  if (std::isinf(snr_db)) return out;
  double power = 0.0;
  for (double v : sino.data()) power += v * v;
  power /= static_cast<double>(std::max<std::size_t>(sino.size(), 1));
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  Rng rng(seed);
  for (double& v : out.data()) v += sigma * rng.normal();
  return out;
}

}  // namespace pact
