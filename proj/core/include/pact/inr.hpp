#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pact/geometry.hpp"
#include "pact/sequence.hpp"

namespace pact {

/// Scalar type used inside the MLP matrix products. Parameters, gradients and
/// optimizer state are always double.
enum class Precision { f32, f64 };

std::string to_string(Precision p);
Precision precision_from_string(const std::string& name);

struct Coord {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;
};

/// Random Fourier features gamma(p) = [cos(2 pi B p), sin(2 pi B p)].
struct FourierEncoder {
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

  Matrix b;  // L x 3, entries ~ N(0, sigma^2), fixed
  double sigma = 0.0;
  std::uint64_t seed = 0;

  std::size_t length() const { return static_cast<std::size_t>(b.rows()); }
  std::size_t output_dim() const { return 2 * length(); }

  void encode(const Coord& p, std::span<double> out) const;
  std::vector<double> encode(const Coord& p) const;

  /// CRC-32 of the little-endian B entries, as 8 hex digits.
  std::string digest() const;
};

/// Coordinates in Casorati order: pixel-major (row-major over the grid), then
/// frame, so entry pixel * frames + t is column t of the rendered matrix.
struct CoordinateBatch {
  std::vector<Coord> coords;
  std::size_t n = 0;
  std::size_t frames = 0;

  std::size_t size() const { return coords.size(); }
  /// Number of coordinates with a component outside [0, 1].
  std::size_t out_of_range() const;
};

/// Normalized lengths of the spatial axes and of the trained time range.
struct CoordinateScale {
  double space = 1.0;
  double time = 1.0;

  friend bool operator==(const CoordinateScale&, const CoordinateScale&) = default;
};

/// `unit` stretches space and time onto [0, 1] separately. `isotropic` gives a
/// pixel step and a frame step the same length, with the longer axis spanning
/// [0, 1].
enum class CoordinateMode { unit, isotropic };

std::string to_string(CoordinateMode mode);
CoordinateMode coordinate_mode_from_string(const std::string& name);
/// `time_steps`: trained time range measured in frame steps (T - 1 for T
/// evenly spaced frames).
CoordinateScale coordinate_scale(CoordinateMode mode, std::size_t n, double time_steps);

/// x = space * col / (n - 1), y = space * row / (n - 1); `times` are already
/// normalized.
CoordinateBatch make_casorati_batch(std::size_t n, std::span<const double> times,
                                    double space = 1.0);

/// Maps physical frame times onto the trained range:
/// extent * (t - t0) / (t_last - t0). A single trained frame maps every time to 0.
std::vector<double> normalize_times(std::span<const double> trained_times,
                                    std::span<const double> query_times, double extent = 1.0);

struct InrModel {
  FourierEncoder encoder;
  std::vector<std::size_t> layer_dims;  // [2L, hidden..., 1]
  std::vector<double> params;           // per layer: W (out x in, column-major), then b
  CoordinateScale scale;                // coordinate mapping the weights were trained under

  std::size_t layers() const { return layer_dims.size() - 1; }
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const {
    return weight_offset(layer) + layer_dims[layer + 1] * layer_dims[layer];
  }

  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

  /// Layer owning parameter `index`.
  std::size_t layer_of(std::size_t index) const;
  void validate() const;
};

std::size_t parameter_count(std::span<const std::size_t> layer_dims);

inline constexpr std::size_t default_encoding_length = 256;
inline constexpr double default_sigma = 10.0;

/// B from N(0, sigma^2) first, then Xavier-uniform weights layer by layer,
/// zero biases; all from one generator seeded with `seed`. An
/// `initial_output` other than 0.5 sets the output bias to its logit.
InrModel init_model(std::uint64_t seed, std::size_t length = default_encoding_length,
                    double sigma = default_sigma,
                    std::vector<std::size_t> hidden = {256, 256, 256},
                    double initial_output = 0.5);

/// Forward/backward evaluation over a fixed coordinate batch. The encoding is
/// computed once; forward() caches activations for the next backward().
/// Work is split into fixed chunks and chunk gradients are summed in chunk
/// order, so results do not depend on the thread count.
class InrEvaluator {
 public:
  static constexpr std::size_t chunk_size = 2048;

  InrEvaluator(const FourierEncoder& encoder, const CoordinateBatch& batch,
               Precision precision = Precision::f32);
  ~InrEvaluator();
  InrEvaluator(InrEvaluator&&) noexcept;
  InrEvaluator& operator=(InrEvaluator&&) noexcept;

  std::size_t size() const;
  Precision precision() const;

  /// Model outputs, each strictly inside (0, 1).
  void forward(const InrModel& model, std::span<double> out);
  /// d(sum_i g_i out_i)/d(theta) using the activations of the last forward().
  void backward(const InrModel& model, std::span<const double> output_grad,
                std::span<double> param_grad);

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

/// Renders the batch into an image sequence with the given frame times.
ImageSequence render(const InrModel& model, const CoordinateBatch& batch, const ImageGrid& grid,
                     std::vector<double> frame_times, Precision precision = Precision::f32);
std::vector<double> backward(const InrModel& model, const CoordinateBatch& batch,
                             std::span<const double> output_grad,
                             Precision precision = Precision::f64);

}  // namespace pact
