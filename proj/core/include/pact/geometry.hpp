#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace pact {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Square n x n pixel grid. Pixel (row, col) has its center at
/// origin + (col * pitch, row * pitch).
struct ImageGrid {
  std::size_t n = 0;
  double pitch = 0.0;  // meters per pixel
  Point2 origin;       // center of pixel (0, 0)

  /// Grid of n x n pixels spanning `fov` meters, centered on `center`.
  static ImageGrid centered(std::size_t n, double fov, Point2 center = {});

  std::size_t pixel_count() const { return n * n; }
  double extent() const { return static_cast<double>(n) * pitch; }
  Point2 pixel_center(std::size_t row, std::size_t col) const {
    return {origin.x + static_cast<double>(col) * pitch,
            origin.y + static_cast<double>(row) * pitch};
  }
  Point2 center() const {
    const double half = 0.5 * static_cast<double>(n - 1) * pitch;
    return {origin.x + half, origin.y + half};
  }
  // Outer boundary of the pixel footprint.
  double x_min() const { return origin.x - 0.5 * pitch; }
  double y_min() const { return origin.y - 0.5 * pitch; }
  double x_max() const { return x_min() + extent(); }
  double y_max() const { return y_min() + extent(); }

  void validate() const;

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

/// Ring (or any circular) array of point sensors with a shared sampling clock.
struct SensorGeometry {
  std::vector<Point2> positions;
  double radius = 0.0;
  Point2 center;
  double sound_speed = 0.0;   // m/s
  double sample_rate = 0.0;   // samples/s
  std::size_t num_samples = 0;
  double t_start = 0.0;       // time of sample 0, seconds

  std::size_t sensor_count() const { return positions.size(); }
  double sample_time(std::size_t i) const {
    return t_start + static_cast<double>(i) / sample_rate;
  }
  /// Fractional sample index at which a wave travelling `meters` arrives.
  double sample_index_for_distance(double meters) const {
    return (meters / sound_speed - t_start) * sample_rate;
  }

  void validate() const;

  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

SensorGeometry make_ring_array(std::size_t num_sensors, double radius, Point2 center,
                               double sound_speed, double sample_rate,
                               std::size_t num_samples, double t_start = 0.0);

/// Keeps every (S / keep)-th sensor starting at index 0.
SensorGeometry subsample_sensors(const SensorGeometry& geom, std::size_t keep);

/// Smallest sample count whose window covers every pixel-to-sensor time of
/// flight for a ring of the given radius around the grid.
std::size_t required_num_samples(const ImageGrid& grid, double radius, Point2 center,
                                 double sound_speed, double sample_rate, double t_start = 0.0);

/// Throws unless the grid lies strictly inside the ring and every
/// pixel-to-sensor time of flight falls inside the recorded window.
void check_coverage(const ImageGrid& grid, const SensorGeometry& geom);

// Desk-scale defaults: 20 mm field, 30 mm ring, water, 40 MSa/s.
namespace desk {
inline constexpr std::size_t grid_size = 64;
inline constexpr double field_of_view = 0.020;
inline constexpr double ring_radius = 0.030;
inline constexpr double sound_speed = 1500.0;
inline constexpr double sample_rate = 40e6;
inline constexpr std::size_t sensors = 128;

ImageGrid grid(std::size_t n = grid_size);
SensorGeometry ring(std::size_t num_sensors, const ImageGrid& grid);
}  // namespace desk

}  // namespace pact
