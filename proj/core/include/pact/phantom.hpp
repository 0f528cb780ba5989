#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pact/geometry.hpp"
#include "pact/sequence.hpp"

namespace pact {

struct Trajectory {
  enum class Kind { linear, orbit };

  Kind kind = Kind::linear;
  Point2 velocity;            // m/s, linear only
  Point2 pivot;               // orbit only
  double angular_rate = 0.0;  // rad/s, counter-clockwise, orbit only

  Point2 position_at(Point2 initial, double time) const;
};

struct Shape {
  enum class Kind { disc, ellipse };

  Kind kind = Kind::disc;
  double intensity = 1.0;  // in [0, 1]
  Point2 center;           // position at time 0
  double radius_x = 0.0;   // disc radius, or ellipse semi-axis before rotation
  double radius_y = 0.0;   // ignored for discs
  double angle = 0.0;      // ellipse orientation, radians
  Trajectory trajectory;

  double bounding_radius() const;
};

struct PhantomSpec {
  std::vector<Shape> shapes;
  std::size_t num_frames = 1;
  double frame_interval = 1.0;  // seconds
  std::uint64_t seed = 0;

  void validate() const;
};

/// Renders frame t at time t * frame_interval. Discs use exact pixel-coverage
/// fractions, ellipses a 4x4 subpixel grid; overlapping shapes take the max.
ImageSequence render_phantom(const PhantomSpec& spec, const ImageGrid& grid);

/// Area of the intersection of a disc with an axis-aligned rectangle.
double disc_rect_overlap(Point2 center, double radius, double x0, double x1, double y0,
                         double y1);

PhantomSpec phantom_from_json(std::string_view text);
std::string phantom_to_json(const PhantomSpec& spec);
PhantomSpec load_phantom(const std::filesystem::path& path);

namespace phantoms {

/// Two discs: one translating diagonally, one orbiting the field center.
/// Sized for the 20 mm desk field.
PhantomSpec two_disc_moving(std::size_t num_frames = 8, double frame_interval = 0.05,
                            std::uint64_t seed = 7);

/// One disc translating along +x at `pixels_per_frame` of the desk grid.
PhantomSpec linear_disc(std::size_t num_frames, double pixels_per_frame,
                        const ImageGrid& grid, double frame_interval = 0.05);

}  // namespace phantoms

}  // namespace pact
