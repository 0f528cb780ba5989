#include "pact/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "pact/error.hpp"
#include "pact/parallel.hpp"

namespace pact {

using nlohmann::json;

Point2 Trajectory::position_at(Point2 initial, double time) const {
  switch (kind) {
    case Kind::linear:
      return {initial.x + velocity.x * time, initial.y + velocity.y * time};
    case Kind::orbit: {
      const double a = angular_rate * time;
      const double c = std::cos(a), s = std::sin(a);
      const double dx = initial.x - pivot.x, dy = initial.y - pivot.y;
      return {pivot.x + c * dx - s * dy, pivot.y + s * dx + c * dy};
    }
  }
  return initial;
}

double Shape::bounding_radius() const {
  return kind == Kind::disc ? radius_x : std::max(radius_x, radius_y);
}

void PhantomSpec::validate() const {
  require(num_frames >= 1, ErrorCode::invalid_argument, "phantom needs at least one frame");
  require(std::isfinite(frame_interval) && frame_interval > 0.0, ErrorCode::invalid_argument,
          "frame_interval must be positive");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const Shape& s = shapes[i];
    const std::string tag = "shape " + std::to_string(i) + ": ";
    require(s.intensity >= 0.0 && s.intensity <= 1.0, ErrorCode::invalid_argument,
            tag + "intensity must lie in [0, 1]");
    require(s.radius_x > 0.0, ErrorCode::invalid_argument, tag + "radius must be positive");
    if (s.kind == Shape::Kind::ellipse)
      require(s.radius_y > 0.0, ErrorCode::invalid_argument, tag + "radii must be positive");
  }
}

namespace {

// Integral of sqrt(r^2 - u^2).
double half_chord_primitive(double u, double r) {
  const double q = std::clamp(u / r, -1.0, 1.0);
  return 0.5 * (u * std::sqrt(std::max(0.0, r * r - u * u)) + r * r * std::asin(q));
}

}  // namespace

double disc_rect_overlap(Point2 center, double radius, double x0, double x1, double y0,
                         double y1) {
  // Work in disc-centered coordinates and integrate the vertical overlap
  // h(u) = min(b, s(u)) - max(a, -s(u)) over u, splitting where s(u) = |a| or |b|.
  const double r = radius;
  const double lo = std::max(x0 - center.x, -r);
  const double hi = std::min(x1 - center.x, r);
  if (lo >= hi) return 0.0;
  const double a = y0 - center.y;
  const double b = y1 - center.y;

  std::array<double, 8> cuts{};
  std::size_t count = 0;
  cuts[count++] = lo;
  cuts[count++] = hi;
  for (double level : {a, b}) {
    if (std::abs(level) < r) {
      const double u = std::sqrt(r * r - level * level);
      for (double c : {-u, u})
        if (c > lo && c < hi) cuts[count++] = c;
    }
  }
  std::sort(cuts.begin(), cuts.begin() + static_cast<std::ptrdiff_t>(count));

  double area = 0.0;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const double u0 = cuts[k], u1 = cuts[k + 1];
    if (u1 <= u0) continue;
    const double mid = 0.5 * (u0 + u1);
    const double s = std::sqrt(std::max(0.0, r * r - mid * mid));
    const bool top_is_chord = s < b;
    const bool bottom_is_chord = -s > a;
    const double h = (top_is_chord ? s : b) - (bottom_is_chord ? -s : a);
    if (h <= 0.0) continue;
    const double width = u1 - u0;
    const double chord = half_chord_primitive(u1, r) - half_chord_primitive(u0, r);
    area += (top_is_chord ? chord : b * width) - (bottom_is_chord ? -chord : a * width);
  }
  return area;
}

namespace {

double disc_coverage(const Shape& s, Point2 c, const ImageGrid& grid, std::size_t row,
                     std::size_t col) {
  const Point2 p = grid.pixel_center(row, col);
  const double h = 0.5 * grid.pitch;
  const double area = disc_rect_overlap(c, s.radius_x, p.x - h, p.x + h, p.y - h, p.y + h);
  return std::clamp(area / (grid.pitch * grid.pitch), 0.0, 1.0);
}

double ellipse_coverage(const Shape& s, Point2 c, const ImageGrid& grid, std::size_t row,
                        std::size_t col) {
  constexpr int sub = 4;
  const Point2 p = grid.pixel_center(row, col);
  const double cs = std::cos(s.angle), sn = std::sin(s.angle);
  int inside = 0;
  for (int i = 0; i < sub; ++i) {
    for (int j = 0; j < sub; ++j) {
      const double x = p.x + ((j + 0.5) / sub - 0.5) * grid.pitch - c.x;
      const double y = p.y + ((i + 0.5) / sub - 0.5) * grid.pitch - c.y;
      const double u = cs * x + sn * y;
      const double v = -sn * x + cs * y;
      if ((u * u) / (s.radius_x * s.radius_x) + (v * v) / (s.radius_y * s.radius_y) <= 1.0)
        ++inside;
    }
  }
  return static_cast<double>(inside) / (sub * sub);
}

}  // namespace

ImageSequence render_phantom(const PhantomSpec& spec, const ImageGrid& grid) {
  spec.validate();
  grid.validate();

  std::vector<double> times(spec.num_frames);
  for (std::size_t t = 0; t < spec.num_frames; ++t)
    times[t] = static_cast<double>(t) * spec.frame_interval;

  // Reject trajectories leaving the field before rendering anything.
  for (std::size_t t = 0; t < spec.num_frames; ++t) {
    for (std::size_t i = 0; i < spec.shapes.size(); ++i) {
      const Shape& s = spec.shapes[i];
      const Point2 c = s.trajectory.position_at(s.center, times[t]);
      const double r = s.bounding_radius();
      const bool inside = c.x - r >= grid.x_min() && c.x + r <= grid.x_max() &&
                          c.y - r >= grid.y_min() && c.y + r <= grid.y_max();
      require(inside, ErrorCode::invalid_argument,
              "shape " + std::to_string(i) + " leaves the grid at frame " + std::to_string(t));
    }
  }

  ImageSequence seq(grid, times);
  parallel_for(spec.num_frames, [&](std::size_t t) {
    for (const Shape& s : spec.shapes) {
      const Point2 c = s.trajectory.position_at(s.center, times[t]);
      const double r = s.bounding_radius();
      // Only visit pixels whose footprint can touch the bounding box.
      const auto to_index = [&](double v, double o) {
        return static_cast<long>(std::floor((v - o) / grid.pitch + 0.5));
      };
      const long n = static_cast<long>(grid.n);
      const long c0 = std::clamp(to_index(c.x - r, grid.origin.x), 0L, n - 1);
      const long c1 = std::clamp(to_index(c.x + r, grid.origin.x), 0L, n - 1);
      const long r0 = std::clamp(to_index(c.y - r, grid.origin.y), 0L, n - 1);
      const long r1 = std::clamp(to_index(c.y + r, grid.origin.y), 0L, n - 1);
      for (long row = r0; row <= r1; ++row) {
        for (long col = c0; col <= c1; ++col) {
          const auto ur = static_cast<std::size_t>(row), uc = static_cast<std::size_t>(col);
          const double cover = s.kind == Shape::Kind::disc
                                   ? disc_coverage(s, c, grid, ur, uc)
                                   : ellipse_coverage(s, c, grid, ur, uc);
          double& v = seq.at(t, ur, uc);
          v = std::max(v, s.intensity * cover);
        }
      }
    }
  });
  return seq;
}

namespace {

Point2 read_point(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(ErrorCode::config_schema, what + " must be a [x, y] array of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

double read_number(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    fail(ErrorCode::config_schema, where + ": missing numeric field '" + key + "'");
  return it->get<double>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) fail(ErrorCode::config_schema, where + ": unknown field '" + key + "'");
  }
}

Trajectory read_trajectory(const json& j, const std::string& where) {
  Trajectory traj;
  if (j.is_null()) return traj;
  if (!j.is_object()) fail(ErrorCode::config_schema, where + " must be an object");
  const std::string type = j.value("type", "linear");
  if (type == "linear") {
    reject_unknown(j, {"type", "velocity"}, where);
    traj.kind = Trajectory::Kind::linear;
    if (j.contains("velocity")) traj.velocity = read_point(j["velocity"], where + ".velocity");
  } else if (type == "orbit") {
    reject_unknown(j, {"type", "pivot", "angular_rate"}, where);
    traj.kind = Trajectory::Kind::orbit;
    if (j.contains("pivot")) traj.pivot = read_point(j["pivot"], where + ".pivot");
    traj.angular_rate = read_number(j, "angular_rate", where);
  } else {
    fail(ErrorCode::config_schema, where + ": unknown trajectory type '" + type + "'");
  }
  return traj;
}

}  // namespace

PhantomSpec phantom_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::config_schema, std::string("phantom spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::config_schema, "phantom spec must be a JSON object");
  reject_unknown(j, {"num_frames", "frame_interval", "seed", "shapes"}, "phantom");

  PhantomSpec spec;
  const double frames = read_number(j, "num_frames", "phantom");
  if (frames < 1 || frames != std::floor(frames))
    fail(ErrorCode::config_schema, "phantom: num_frames must be a positive integer");
  spec.num_frames = static_cast<std::size_t>(frames);
  spec.frame_interval = read_number(j, "frame_interval", "phantom");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned())
      fail(ErrorCode::config_schema, "phantom: seed must be a non-negative integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  if (!j.contains("shapes") || !j["shapes"].is_array())
    fail(ErrorCode::config_schema, "phantom: 'shapes' must be an array");

  for (std::size_t i = 0; i < j["shapes"].size(); ++i) {
    const json& js = j["shapes"][i];
    const std::string where = "phantom.shapes[" + std::to_string(i) + "]";
    if (!js.is_object()) fail(ErrorCode::config_schema, where + " must be an object");
    Shape s;
    const std::string type = js.value("type", "disc");
    if (type == "disc") {
      reject_unknown(js, {"type", "intensity", "center", "radius", "trajectory"}, where);
      s.kind = Shape::Kind::disc;
      s.radius_x = s.radius_y = read_number(js, "radius", where);
    } else if (type == "ellipse") {
      reject_unknown(js, {"type", "intensity", "center", "radii", "angle", "trajectory"}, where);
      s.kind = Shape::Kind::ellipse;
      if (!js.contains("radii")) fail(ErrorCode::config_schema, where + ": missing 'radii'");
      const Point2 radii = read_point(js["radii"], where + ".radii");
      s.radius_x = radii.x;
      s.radius_y = radii.y;
      if (js.contains("angle")) s.angle = read_number(js, "angle", where);
    } else {
      fail(ErrorCode::config_schema, where + ": unknown shape type '" + type + "'");
    }
    s.intensity = read_number(js, "intensity", where);
    if (!js.contains("center")) fail(ErrorCode::config_schema, where + ": missing 'center'");
    s.center = read_point(js["center"], where + ".center");
    s.trajectory = read_trajectory(js.value("trajectory", json()), where + ".trajectory");
    spec.shapes.push_back(s);
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    fail(ErrorCode::config_schema, e.what());
  }
  return spec;
}

std::string phantom_to_json(const PhantomSpec& spec) {
  json j;
  j["num_frames"] = spec.num_frames;
  j["frame_interval"] = spec.frame_interval;
  j["seed"] = spec.seed;
  j["shapes"] = json::array();
  for (const Shape& s : spec.shapes) {
    json js;
    if (s.kind == Shape::Kind::disc) {
      js["type"] = "disc";
      js["radius"] = s.radius_x;
    } else {
      js["type"] = "ellipse";
      js["radii"] = {s.radius_x, s.radius_y};
      js["angle"] = s.angle;
    }
    js["intensity"] = s.intensity;
    js["center"] = {s.center.x, s.center.y};
    json jt;
    if (s.trajectory.kind == Trajectory::Kind::linear) {
      jt["type"] = "linear";
      jt["velocity"] = {s.trajectory.velocity.x, s.trajectory.velocity.y};
    } else {
      jt["type"] = "orbit";
      jt["pivot"] = {s.trajectory.pivot.x, s.trajectory.pivot.y};
      jt["angular_rate"] = s.trajectory.angular_rate;
    }
    js["trajectory"] = jt;
    j["shapes"].push_back(js);
  }
  return j.dump(2);
}

PhantomSpec load_phantom(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open phantom spec " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return phantom_from_json(buffer.str());
}

namespace phantoms {

PhantomSpec two_disc_moving(std::size_t num_frames, double frame_interval, std::uint64_t seed) {
  PhantomSpec spec;
  spec.num_frames = num_frames;
  spec.frame_interval = frame_interval;
  spec.seed = seed;

  // Covers 7 mm along x and 3.5 mm along y over eight frames.
  Shape mover;
  mover.kind = Shape::Kind::disc;
  mover.intensity = 1.0;
  mover.center = {-0.0040, -0.0020};
  mover.radius_x = mover.radius_y = 0.0025;
  mover.trajectory.kind = Trajectory::Kind::linear;
  mover.trajectory.velocity = {0.0010 / frame_interval, 0.0005 / frame_interval};

  // Quarter turn about the field center over eight frames.
  Shape orbiter;
  orbiter.kind = Shape::Kind::disc;
  orbiter.intensity = 0.6;
  orbiter.center = {0.0, 0.0050};
  orbiter.radius_x = orbiter.radius_y = 0.0015;
  orbiter.trajectory.kind = Trajectory::Kind::orbit;
  orbiter.trajectory.angular_rate = (std::numbers::pi / 16.0) / frame_interval;

  spec.shapes = {mover, orbiter};
  return spec;
}

PhantomSpec linear_disc(std::size_t num_frames, double pixels_per_frame,
                        const ImageGrid& grid, double frame_interval) {
  PhantomSpec spec;
  spec.num_frames = num_frames;
  spec.frame_interval = frame_interval;

  Shape disc;
  disc.kind = Shape::Kind::disc;
  disc.intensity = 1.0;
  disc.radius_x = disc.radius_y = 0.125 * grid.extent();
  const double travel = pixels_per_frame * grid.pitch * static_cast<double>(num_frames - 1);
  const Point2 mid = grid.center();
  disc.center = {mid.x - 0.5 * travel, mid.y};
  disc.trajectory.kind = Trajectory::Kind::linear;
  disc.trajectory.velocity = {pixels_per_frame * grid.pitch / frame_interval, 0.0};
  spec.shapes = {disc};
  return spec;
}

}  // namespace phantoms

}  // namespace pact
