#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pact/forward.hpp"
#include "pact/inr.hpp"
#include "pact/regularizers.hpp"

namespace pact {

struct TrainConfig {
  std::size_t iterations = 2000;
  double lr_start = 1e-3;
  double lr_end = 1e-6;
  std::string lr_schedule = "exponential";
  std::optional<double> lambda_d;  // temporal TV weight; empty means auto
  std::optional<double> lambda_l;  // nuclear norm weight; empty means auto
  // Auto weights: lambda_d = auto_lambda_d * DC0 * (r/n)^2 and
  // lambda_l = auto_lambda_l * DC0 * (r/n), with DC0 the data term at
  // iteration 0 and r = auto_lambda_reference_n. TV grows with the pixel count
  // and the nuclear norm with n, so a given scene keeps the same relative
  // penalty on any grid.
  double auto_lambda_d = 1e-3;
  double auto_lambda_l = 1e-4;
  std::size_t auto_lambda_reference_n = 32;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t encoding_length = default_encoding_length;
  double sigma = default_sigma;
  std::vector<std::size_t> hidden = {256, 256, 256};
  // Output level of the fresh network, set through the output bias. A start
  // near the empty background keeps the sigmoid out of early saturation.
  double initial_output = 0.05;
  CoordinateMode coordinates = CoordinateMode::isotropic;
  // Seconds per frame step for isotropic coordinates; 0 takes the smallest
  // spacing of the trained frames.
  double frame_interval = 0.0;
  double tv_epsilon = default_tv_epsilon;
  double sv_floor = 1e-8;
  Precision precision = Precision::f32;
  std::size_t log_every = 1;
  std::size_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  double divergence_factor = 10.0;
  std::size_t divergence_patience = 50;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;

  explicit AdamState(std::size_t parameters = 0) : m(parameters, 0.0), v(parameters, 0.0) {}
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               double learning_rate, double beta1, double beta2, double eps);

/// lr_start * (lr_end / lr_start)^(i / (iterations - 1)).
double lr_at(const TrainConfig& cfg, std::size_t iteration);

struct LogRow {
  std::size_t iteration = 0;
  LossBreakdown loss;
  double learning_rate = 0.0;
};

/// iteration,dc,tv,lr,total,learning_rate
std::string log_header();
std::string format_log_row(const LogRow& row);

struct FitHooks {
  std::function<void(const LogRow&)> on_log;
  std::function<void(std::size_t iteration, const InrModel&)> on_checkpoint;
};

struct FitResult {
  InrModel model;
  std::vector<LogRow> log;
  double lambda_d = 0.0;  // resolved weights
  double lambda_l = 0.0;
  std::vector<double> trained_frame_times;
  double seconds = 0.0;
};

/// Full-batch Adam on dc + lambda_d * tv + lambda_l * nuclear over every
/// (pixel, frame) coordinate of y.
FitResult fit(const Sinogram& y, const ForwardOperator& op, const TrainConfig& cfg,
              const FitHooks& hooks = {});

/// Same, starting from `initial` instead of init_model(cfg).
FitResult fit(const Sinogram& y, const ForwardOperator& op, const TrainConfig& cfg,
              InrModel initial, const FitHooks& hooks = {});

InrModel init_model(const TrainConfig& cfg);

/// Renders physical `query_times`, normalized against the trained range with
/// the model's coordinate scale.
ImageSequence render_at_times(const InrModel& model, const ImageGrid& grid,
                              std::span<const double> trained_frame_times,
                              std::vector<double> query_times,
                              Precision precision = Precision::f32);

/// factor * (T - 1) + 1 frames: every trained time, plus factor - 1 evenly
/// spaced times inside each trained interval.
std::vector<double> superresolved_times(std::span<const double> trained_frame_times,
                                        std::size_t factor);

ImageSequence temporal_superresolve(const InrModel& model, std::size_t factor,
                                    const ImageGrid& grid,
                                    std::span<const double> trained_frame_times,
                                    Precision precision = Precision::f32);

}  // namespace pact
