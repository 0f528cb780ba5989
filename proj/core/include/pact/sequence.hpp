#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pact/geometry.hpp"

namespace pact {

/// Stack of T frames on an n x n grid. Storage is frame-major, then row, then
/// column, which is also the column-major layout of the (n*n) x T Casorati
/// matrix: column t is frame t.
class ImageSequence {
 public:
  using CasoratiMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstCasoratiMap = Eigen::Map<const Eigen::MatrixXd>;

  ImageSequence() = default;
  ImageSequence(ImageGrid grid, std::vector<double> frame_times);
  ImageSequence(ImageGrid grid, std::vector<double> frame_times, std::vector<double> data);

  const ImageGrid& grid() const { return grid_; }
  const std::vector<double>& frame_times() const { return frame_times_; }
  std::size_t n() const { return grid_.n; }
  std::size_t frames() const { return frame_times_.size(); }
  std::size_t pixels_per_frame() const { return grid_.pixel_count(); }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  std::span<double> frame(std::size_t t) {
    return std::span<double>(data_).subspan(t * pixels_per_frame(), pixels_per_frame());
  }
  std::span<const double> frame(std::size_t t) const {
    return std::span<const double>(data_).subspan(t * pixels_per_frame(), pixels_per_frame());
  }
  double& at(std::size_t t, std::size_t row, std::size_t col) {
    return data_[(t * n() + row) * n() + col];
  }
  double at(std::size_t t, std::size_t row, std::size_t col) const {
    return data_[(t * n() + row) * n() + col];
  }

  CasoratiMap casorati() {
    return {data_.data(), static_cast<Eigen::Index>(pixels_per_frame()),
            static_cast<Eigen::Index>(frames())};
  }
  ConstCasoratiMap casorati() const {
    return {data_.data(), static_cast<Eigen::Index>(pixels_per_frame()),
            static_cast<Eigen::Index>(frames())};
  }

  /// Finite values and strictly increasing frame times.
  void validate() const;
  bool is_nonnegative() const;
  bool same_shape(const ImageSequence& other) const {
    return n() == other.n() && frames() == other.frames();
  }

  /// Frames selected by index, in the given order.
  ImageSequence select_frames(std::span<const std::size_t> indices) const;

 private:
  ImageGrid grid_;
  std::vector<double> frame_times_;
  std::vector<double> data_;
};

/// What a sinogram trace holds: acoustic pressure, or the 1/d-weighted
/// circular mean whose time derivative is the pressure.
enum class SignalKind { pressure, circular_mean };

/// S x F x T samples. Storage is frame-major, then sensor, then sample.
class Sinogram {
 public:
  Sinogram() = default;
  Sinogram(SensorGeometry geometry, std::vector<double> frame_times);
  Sinogram(SensorGeometry geometry, std::vector<double> frame_times, std::vector<double> data);

  const SensorGeometry& geometry() const { return geometry_; }
  const std::vector<double>& frame_times() const { return frame_times_; }
  std::size_t sensors() const { return geometry_.sensor_count(); }
  std::size_t samples() const { return geometry_.num_samples; }
  std::size_t frames() const { return frame_times_.size(); }
  std::size_t size() const { return data_.size(); }
  SignalKind signal() const { return signal_; }
  void set_signal(SignalKind kind) { signal_ = kind; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  std::span<double> trace(std::size_t t, std::size_t s) {
    return std::span<double>(data_).subspan((t * sensors() + s) * samples(), samples());
  }
  std::span<const double> trace(std::size_t t, std::size_t s) const {
    return std::span<const double>(data_).subspan((t * sensors() + s) * samples(), samples());
  }
  std::span<double> frame(std::size_t t) {
    return std::span<double>(data_).subspan(t * sensors() * samples(), sensors() * samples());
  }
  std::span<const double> frame(std::size_t t) const {
    return std::span<const double>(data_).subspan(t * sensors() * samples(),
                                                  sensors() * samples());
  }

  void validate() const;

  /// Keeps every (S / keep)-th sensor trace; see subsample_sensors().
  Sinogram subsample(std::size_t keep) const;
  Sinogram select_frames(std::span<const std::size_t> indices) const;

 private:
  SensorGeometry geometry_;
  std::vector<double> frame_times_;
  std::vector<double> data_;
  SignalKind signal_ = SignalKind::pressure;
};

}  // namespace pact
