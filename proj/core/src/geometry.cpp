#include "pact/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "pact/error.hpp"

namespace pact {

ImageGrid ImageGrid::centered(std::size_t n, double fov, Point2 center) {
  require(n >= 2, ErrorCode::invalid_argument, "grid needs n >= 2");
  require(fov > 0.0, ErrorCode::invalid_argument, "grid field of view must be positive");
  const double pitch = fov / static_cast<double>(n);
  const double half = 0.5 * static_cast<double>(n - 1) * pitch;
  return ImageGrid{n, pitch, {center.x - half, center.y - half}};
}

void ImageGrid::validate() const {
  require(n >= 2, ErrorCode::invalid_argument, "grid needs n >= 2");
  require(std::isfinite(pitch) && pitch > 0.0, ErrorCode::invalid_argument,
          "grid pitch must be positive");
  require(std::isfinite(origin.x) && std::isfinite(origin.y), ErrorCode::invalid_argument,
          "grid origin must be finite");
}

void SensorGeometry::validate() const {
  require(positions.size() >= 2, ErrorCode::invalid_argument, "need at least 2 sensors");
  require(radius > 0.0, ErrorCode::invalid_argument, "ring radius must be positive");
  require(sound_speed > 0.0, ErrorCode::invalid_argument, "sound speed must be positive");
  require(sample_rate > 0.0, ErrorCode::invalid_argument, "sample rate must be positive");
  require(num_samples >= 2, ErrorCode::invalid_argument, "need at least 2 samples per trace");
  require(std::isfinite(t_start), ErrorCode::invalid_argument, "t_start must be finite");
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const double r = distance(positions[k], center);
    require(std::abs(r - radius) <= 1e-9, ErrorCode::invalid_argument,
            "sensor " + std::to_string(k) + " is off the ring");
  }
}

SensorGeometry make_ring_array(std::size_t num_sensors, double radius, Point2 center,
                               double sound_speed, double sample_rate,
                               std::size_t num_samples, double t_start) {
  require(num_sensors >= 2, ErrorCode::invalid_argument, "need at least 2 sensors");
  require(radius > 0.0, ErrorCode::invalid_argument, "ring radius must be positive");
  require(sample_rate > 0.0, ErrorCode::invalid_argument, "sample rate must be positive");

  SensorGeometry geom;
  geom.radius = radius;
  geom.center = center;
  geom.sound_speed = sound_speed;
  geom.sample_rate = sample_rate;
  geom.num_samples = num_samples;
  geom.t_start = t_start;
  geom.positions.reserve(num_sensors);
  for (std::size_t k = 0; k < num_sensors; ++k) {
    const double angle =
        2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_sensors);
    geom.positions.push_back(
        {center.x + radius * std::cos(angle), center.y + radius * std::sin(angle)});
  }
  geom.validate();
  return geom;
}

SensorGeometry subsample_sensors(const SensorGeometry& geom, std::size_t keep) {
  const std::size_t s = geom.sensor_count();
  require(keep >= 2, ErrorCode::invalid_argument, "must keep at least 2 sensors");
  require(keep <= s && s % keep == 0, ErrorCode::invalid_argument,
          "keep=" + std::to_string(keep) + " does not divide sensor count " + std::to_string(s));
  SensorGeometry out = geom;
  out.positions.clear();
  const std::size_t stride = s / keep;
  for (std::size_t k = 0; k < s; k += stride) out.positions.push_back(geom.positions[k]);
  return out;
}

namespace {

// Largest distance from a pixel center to `center`; distance is convex, so a
// corner pixel attains it.
double max_pixel_offset(const ImageGrid& grid, Point2 center) {
  double best = 0.0;
  const std::size_t last = grid.n - 1;
  for (std::size_t row : {std::size_t{0}, last})
    for (std::size_t col : {std::size_t{0}, last})
      best = std::max(best, distance(grid.pixel_center(row, col), center));
  return best;
}

}  // namespace

std::size_t required_num_samples(const ImageGrid& grid, double radius, Point2 center,
                                 double sound_speed, double sample_rate, double t_start) {
  grid.validate();
  const double far = max_pixel_offset(grid, center) + radius;
  const double index = (far / sound_speed - t_start) * sample_rate;
  require(index >= 0.0, ErrorCode::invalid_argument, "t_start is later than every arrival");
  return static_cast<std::size_t>(std::floor(index)) + 2;
}

void check_coverage(const ImageGrid& grid, const SensorGeometry& geom) {
  grid.validate();
  geom.validate();
  const Point2 corners[] = {{grid.x_min(), grid.y_min()},
                            {grid.x_max(), grid.y_min()},
                            {grid.x_min(), grid.y_max()},
                            {grid.x_max(), grid.y_max()}};
  for (const Point2& c : corners)
    require(distance(c, geom.center) < geom.radius, ErrorCode::invalid_argument,
            "image grid does not fit strictly inside the sensor ring");

  const double last = static_cast<double>(geom.num_samples - 1);
  for (std::size_t s = 0; s < geom.sensor_count(); ++s) {
    for (std::size_t row = 0; row < grid.n; ++row) {
      for (std::size_t col = 0; col < grid.n; ++col) {
        const double f =
            geom.sample_index_for_distance(distance(grid.pixel_center(row, col), geom.positions[s]));
        if (f < 0.0 || f > last)
          fail(ErrorCode::invalid_argument,
               "time of flight from pixel (" + std::to_string(row) + "," + std::to_string(col) +
                   ") to sensor " + std::to_string(s) + " falls outside the recorded window");
      }
    }
  }
}

namespace desk {

ImageGrid grid(std::size_t n) { return ImageGrid::centered(n, field_of_view); }

SensorGeometry ring(std::size_t num_sensors, const ImageGrid& grid) {
  const std::size_t samples =
      required_num_samples(grid, ring_radius, {}, sound_speed, sample_rate);
  return make_ring_array(num_sensors, ring_radius, {}, sound_speed, sample_rate, samples);
}

}  // namespace desk

}  // namespace pact
