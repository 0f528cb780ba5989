#include "pact/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pact/error.hpp"

namespace pact {

namespace {

void check_times(const std::vector<double>& times, const char* what) {
  for (std::size_t t = 0; t < times.size(); ++t) {
    require(std::isfinite(times[t]), ErrorCode::invalid_argument,
            std::string(what) + ": non-finite frame time");
    if (t > 0)
      require(times[t] > times[t - 1], ErrorCode::invalid_argument,
              std::string(what) + ": frame times must be strictly increasing");
  }
}

void check_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      fail(ErrorCode::numerical,
           std::string(what) + ": non-finite value at flat index " + std::to_string(i));
}

}  // namespace

ImageSequence::ImageSequence(ImageGrid grid, std::vector<double> frame_times)
    : grid_(grid), frame_times_(std::move(frame_times)) {
  data_.assign(grid_.pixel_count() * frame_times_.size(), 0.0);
}

ImageSequence::ImageSequence(ImageGrid grid, std::vector<double> frame_times,
                             std::vector<double> data)
    : grid_(grid), frame_times_(std::move(frame_times)), data_(std::move(data)) {
  require(data_.size() == grid_.pixel_count() * frame_times_.size(), ErrorCode::shape_mismatch,
          "image data length " + std::to_string(data_.size()) + " != n*n*T = " +
              std::to_string(grid_.pixel_count() * frame_times_.size()));
}

void ImageSequence::validate() const {
  grid_.validate();
  require(!frame_times_.empty(), ErrorCode::invalid_argument, "image sequence has no frames");
  check_times(frame_times_, "image sequence");
  check_finite(data_, "image sequence");
}

bool ImageSequence::is_nonnegative() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0; });
}

ImageSequence ImageSequence::select_frames(std::span<const std::size_t> indices) const {
  std::vector<double> times;
  std::vector<double> data;
  data.reserve(indices.size() * pixels_per_frame());
  for (std::size_t t : indices) {
    require(t < frames(), ErrorCode::invalid_argument,
            "frame index " + std::to_string(t) + " out of range");
    times.push_back(frame_times_[t]);
    const auto f = frame(t);
    data.insert(data.end(), f.begin(), f.end());
  }
  return ImageSequence(grid_, std::move(times), std::move(data));
}

Sinogram::Sinogram(SensorGeometry geometry, std::vector<double> frame_times)
    : geometry_(std::move(geometry)), frame_times_(std::move(frame_times)) {
  data_.assign(sensors() * samples() * frames(), 0.0);
}

Sinogram::Sinogram(SensorGeometry geometry, std::vector<double> frame_times,
                   std::vector<double> data)
    : geometry_(std::move(geometry)), frame_times_(std::move(frame_times)),
      data_(std::move(data)) {
  require(data_.size() == sensors() * samples() * frames(), ErrorCode::shape_mismatch,
          "sinogram data length " + std::to_string(data_.size()) + " != S*F*T = " +
              std::to_string(sensors() * samples() * frames()));
}

void Sinogram::validate() const {
  geometry_.validate();
  require(!frame_times_.empty(), ErrorCode::invalid_argument, "sinogram has no frames");
  check_times(frame_times_, "sinogram");
  check_finite(data_, "sinogram");
}

Sinogram Sinogram::subsample(std::size_t keep) const {
  SensorGeometry geom = subsample_sensors(geometry_, keep);
  const std::size_t stride = sensors() / keep;
  Sinogram out(std::move(geom), frame_times_);
  out.set_signal(signal_);
  for (std::size_t t = 0; t < frames(); ++t)
    for (std::size_t k = 0; k < keep; ++k) {
      const auto src = trace(t, k * stride);
      std::copy(src.begin(), src.end(), out.trace(t, k).begin());
    }
  return out;
}

Sinogram Sinogram::select_frames(std::span<const std::size_t> indices) const {
  std::vector<double> times;
  std::vector<double> data;
  for (std::size_t t : indices) {
    require(t < frames(), ErrorCode::invalid_argument,
            "frame index " + std::to_string(t) + " out of range");
    times.push_back(frame_times_[t]);
    const auto f = frame(t);
    data.insert(data.end(), f.begin(), f.end());
  }
  Sinogram out(geometry_, std::move(times), std::move(data));
  out.set_signal(signal_);
  return out;
}

}  // namespace pact
