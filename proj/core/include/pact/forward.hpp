#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pact/geometry.hpp"
#include "pact/sequence.hpp"

namespace pact {

struct ForwardOptions {
  /// Differentiate the circular integral in time so traces hold pressure.
  /// Off by default: traces hold the 1/d-weighted circular means, tagged
  /// SignalKind::circular_mean.
  bool temporal_derivative = false;
};

/// Discrete 2D photoacoustic forward model A and its exact transpose.
///
/// Every pixel acts as a point source: for sensor s and pixel j the arrival
/// time d_sj / c lands at a fractional sample index, and the weight 1/d_sj is
/// split linearly between the two neighbouring samples. With
/// ForwardOptions::temporal_derivative the deposited traces are then
/// differentiated in time with a central difference scaled by the sample rate
/// (one-sided at the first and last samples).
class ForwardOperator {
 public:
  struct Tap {
    std::int32_t bin = 0;  // first sample index
    double lower = 0.0;    // weight deposited at `bin`
    double upper = 0.0;    // weight deposited at `bin + 1` (0 at exact bin centers)
  };

  ForwardOperator(ImageGrid grid, SensorGeometry geometry, ForwardOptions options = {});

  const ImageGrid& grid() const { return grid_; }
  const SensorGeometry& geometry() const { return geometry_; }
  const ForwardOptions& options() const { return options_; }
  std::size_t sensors() const { return geometry_.sensor_count(); }
  std::size_t samples() const { return geometry_.num_samples; }
  std::size_t pixels() const { return grid_.pixel_count(); }
  SignalKind signal() const {
    return options_.temporal_derivative ? SignalKind::pressure : SignalKind::circular_mean;
  }

  /// Taps for sensor s, one per pixel in row-major order.
  std::span<const Tap> taps(std::size_t sensor) const {
    return std::span<const Tap>(taps_).subspan(sensor * pixels(), pixels());
  }

  /// y = A x for `frames` stacked images (frame-major) into stacked sinogram frames.
  void forward(std::span<const double> images, std::size_t frames, std::span<double> out) const;
  /// x = A^T y, the exact transpose of forward().
  void adjoint(std::span<const double> sinogram, std::size_t frames, std::span<double> out) const;

  /// Time-derivative filter on one trace and its transpose.
  void differentiate(std::span<const double> in, std::span<double> out) const;
  void differentiate_transpose(std::span<const double> in, std::span<double> out) const;

 private:
  ImageGrid grid_;
  SensorGeometry geometry_;
  ForwardOptions options_;
  std::vector<Tap> taps_;
};

ForwardOperator build_forward_operator(const ImageGrid& grid, const SensorGeometry& geom,
                                       ForwardOptions options = {});

Sinogram apply_forward(const ForwardOperator& op, const ImageSequence& frames);
ImageSequence apply_adjoint(const ForwardOperator& op, const Sinogram& sino);

/// Sentinel SNR that leaves the sinogram untouched.
inline constexpr double noiseless = std::numeric_limits<double>::infinity();

/// Adds zero-mean Gaussian noise with power mean(y^2) / 10^(snr_db / 10).
Sinogram add_noise(const Sinogram& sino, double snr_db, std::uint64_t seed);

}  // namespace pact
