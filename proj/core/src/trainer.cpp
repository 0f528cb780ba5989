#include "pact/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "pact/error.hpp"

namespace pact {

void TrainConfig::validate() const {
  require(iterations >= 1, ErrorCode::invalid_argument, "iterations must be >= 1");
  require(lr_start > 0.0 && lr_end > 0.0 && lr_end <= lr_start, ErrorCode::invalid_argument,
          "learning rates need 0 < lr_end <= lr_start");
  require(lr_schedule == "exponential", ErrorCode::invalid_argument,
          "unknown lr_schedule '" + lr_schedule + "' (only 'exponential' is supported)");
  require(!lambda_d || (std::isfinite(*lambda_d) && *lambda_d >= 0.0),
          ErrorCode::invalid_argument, "lambda_d must be >= 0");
  require(!lambda_l || (std::isfinite(*lambda_l) && *lambda_l >= 0.0),
          ErrorCode::invalid_argument, "lambda_l must be >= 0");
  require(auto_lambda_d >= 0.0 && auto_lambda_l >= 0.0, ErrorCode::invalid_argument,
          "auto lambda scales must be >= 0");
  require(auto_lambda_reference_n >= 1, ErrorCode::invalid_argument,
          "auto_lambda_reference_n must be >= 1");
  require(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0,
          ErrorCode::invalid_argument, "Adam betas must lie in (0, 1)");
  require(adam_eps > 0.0, ErrorCode::invalid_argument, "adam_eps must be positive");
  require(encoding_length >= 1, ErrorCode::invalid_argument, "L must be >= 1");
  require(sigma > 0.0, ErrorCode::invalid_argument, "sigma must be positive");
  require(initial_output > 0.0 && initial_output < 1.0, ErrorCode::invalid_argument,
          "initial_output must lie in (0, 1)");
  require(std::isfinite(frame_interval) && frame_interval >= 0.0, ErrorCode::invalid_argument,
          "frame_interval must be >= 0");
  require(tv_epsilon > 0.0, ErrorCode::invalid_argument, "tv_epsilon must be positive");
  require(sv_floor >= 0.0, ErrorCode::invalid_argument, "sv_floor must be >= 0");
  require(log_every >= 1, ErrorCode::invalid_argument, "log_every must be >= 1");
  require(divergence_factor > 1.0, ErrorCode::invalid_argument,
          "divergence_factor must exceed 1");
  require(divergence_patience >= 1, ErrorCode::invalid_argument,
          "divergence_patience must be >= 1");
}

namespace {

double time_steps(std::span<const double> times, double frame_interval) {
  if (times.size() < 2) return 0.0;
  double step = frame_interval;
  if (step == 0.0) {
    step = times[1] - times[0];
    for (std::size_t i = 2; i < times.size(); ++i) step = std::min(step, times[i] - times[i - 1]);
  }
  require(step > 0.0, ErrorCode::invalid_argument, "trained frame times must increase");
  return (times.back() - times.front()) / step;
}

}  // namespace

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               double learning_rate, double beta1, double beta2, double eps) {
  require(grad.size() == params.size() && state.m.size() == params.size() &&
              state.v.size() == params.size(),
          ErrorCode::shape_mismatch, "adam_step: parameter, gradient and state sizes differ");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(beta1, t);
  const double correct2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / correct1;
    const double v_hat = state.v[i] / correct2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + eps);
  }
}

double lr_at(const TrainConfig& cfg, std::size_t iteration) {
  require(iteration < cfg.iterations, ErrorCode::invalid_argument,
          "lr_at: iteration " + std::to_string(iteration) + " outside [0, " +
              std::to_string(cfg.iterations) + ")");
  if (cfg.iterations == 1 || iteration == 0) return cfg.lr_start;
  if (iteration + 1 == cfg.iterations) return cfg.lr_end;
  const double fraction =
      static_cast<double>(iteration) / static_cast<double>(cfg.iterations - 1);
  return cfg.lr_start * std::pow(cfg.lr_end / cfg.lr_start, fraction);
}

std::string log_header() { return "iteration,dc,tv,lr,total,learning_rate"; }

std::string format_log_row(const LogRow& row) {
  std::ostringstream os;
  os.precision(17);
  os << row.iteration << ',' << row.loss.dc << ',' << row.loss.tv << ',' << row.loss.lr << ','
     << row.loss.total << ',' << row.learning_rate;
  return os.str();
}

InrModel init_model(const TrainConfig& cfg) {
  return init_model(cfg.seed, cfg.encoding_length, cfg.sigma, cfg.hidden, cfg.initial_output);
}

FitResult fit(const Sinogram& y, const ForwardOperator& op, const TrainConfig& cfg,
              const FitHooks& hooks) {
  cfg.validate();
  return fit(y, op, cfg, init_model(cfg), hooks);
}

FitResult fit(const Sinogram& y, const ForwardOperator& op, const TrainConfig& cfg,
              InrModel initial, const FitHooks& hooks) {
  cfg.validate();
  initial.validate();
  y.validate();
  require(y.sensors() == op.sensors() && y.samples() == op.samples(), ErrorCode::shape_mismatch,
          "fit: sinogram does not match the operator geometry");
  require(y.signal() == op.signal(), ErrorCode::shape_mismatch,
          "fit: sinogram signal kind does not match the operator");
  const auto start = std::chrono::steady_clock::now();

  const ImageGrid& grid = op.grid();
  const std::size_t frames = y.frames();
  const std::size_t pixels = grid.pixel_count();

  FitResult result;
  result.model = std::move(initial);
  result.trained_frame_times = y.frame_times();
  result.model.scale = coordinate_scale(cfg.coordinates, grid.n,
                                        time_steps(y.frame_times(), cfg.frame_interval));
  const std::vector<double> times =
      normalize_times(y.frame_times(), y.frame_times(), result.model.scale.time);
  InrEvaluator eval(result.model.encoder,
                    make_casorati_batch(grid.n, times, result.model.scale.space), cfg.precision);

  InrModel& model = result.model;
  AdamState adam(model.params.size());
  std::vector<double> outputs(eval.size());
  std::vector<double> output_grad(eval.size());
  std::vector<double> param_grad(model.params.size());
  ImageSequence x(grid, y.frame_times());

  double initial_total = 0.0;
  std::size_t diverging = 0;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    eval.forward(model, outputs);
    auto data = x.data();
    for (std::size_t p = 0; p < pixels; ++p)
      for (std::size_t t = 0; t < frames; ++t) data[t * pixels + p] = outputs[p * frames + t];

    const TermValue dc = dc_loss(op, x, y);
    const TermValue tv = temporal_tv(x, cfg.tv_epsilon);
    const TermValue lr = nuclear_norm(x, cfg.sv_floor);

    if (it == 0) {
      const double r = static_cast<double>(cfg.auto_lambda_reference_n) / static_cast<double>(grid.n);
      result.lambda_d = cfg.lambda_d.value_or(cfg.auto_lambda_d * dc.value * r * r);
      result.lambda_l = cfg.lambda_l.value_or(cfg.auto_lambda_l * dc.value * r);
    }
    LogRow row{it, {dc.value, tv.value, lr.value, 0.0, result.lambda_d, result.lambda_l},
               lr_at(cfg, it)};
    row.loss.combine();
    if (!std::isfinite(row.loss.total))
      fail(ErrorCode::numerical, "non-finite loss at iteration " + std::to_string(it));
    if (it == 0) initial_total = row.loss.total;
    if (initial_total > 0.0 && row.loss.total > cfg.divergence_factor * initial_total) {
      if (++diverging >= cfg.divergence_patience) {
        std::ostringstream msg;
        msg << "training diverged at iteration " << it << ": total loss " << row.loss.total
            << " exceeded " << cfg.divergence_factor << "x the initial " << initial_total
            << " for " << diverging << " consecutive iterations";
        fail(ErrorCode::numerical, msg.str());
      }
    } else {
      diverging = 0;
    }
    if (it % cfg.log_every == 0 || it + 1 == cfg.iterations) {
      result.log.push_back(row);
      if (hooks.on_log) hooks.on_log(row);
    }

    for (std::size_t p = 0; p < pixels; ++p)
      for (std::size_t t = 0; t < frames; ++t) {
        const std::size_t k = t * pixels + p;
        output_grad[p * frames + t] =
            dc.gradient[k] + result.lambda_d * tv.gradient[k] + result.lambda_l * lr.gradient[k];
      }
    eval.backward(model, output_grad, param_grad);
    adam_step(model.params, param_grad, adam, row.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
              cfg.adam_eps);

    if (cfg.checkpoint_every && hooks.on_checkpoint && (it + 1) % cfg.checkpoint_every == 0)
      hooks.on_checkpoint(it + 1, model);
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ImageSequence render_at_times(const InrModel& model, const ImageGrid& grid,
                              std::span<const double> trained_frame_times,
                              std::vector<double> query_times, Precision precision) {
  const std::vector<double> normalized =
      normalize_times(trained_frame_times, query_times, model.scale.time);
  return render(model, make_casorati_batch(grid.n, normalized, model.scale.space), grid,
                std::move(query_times), precision);
}

std::vector<double> superresolved_times(std::span<const double> trained_frame_times,
                                        std::size_t factor) {
  require(factor >= 1, ErrorCode::invalid_argument, "super-resolution factor must be >= 1");
  require(!trained_frame_times.empty(), ErrorCode::invalid_argument, "no trained frame times");
  std::vector<double> out;
  out.reserve(factor * (trained_frame_times.size() - 1) + 1);
  for (std::size_t j = 0; j + 1 < trained_frame_times.size(); ++j) {
    const double t0 = trained_frame_times[j];
    const double dt = trained_frame_times[j + 1] - t0;
    out.push_back(t0);
    for (std::size_t r = 1; r < factor; ++r)
      out.push_back(t0 + dt * static_cast<double>(r) / static_cast<double>(factor));
  }
  out.push_back(trained_frame_times.back());
  return out;
}

ImageSequence temporal_superresolve(const InrModel& model, std::size_t factor,
                                    const ImageGrid& grid,
                                    std::span<const double> trained_frame_times,
                                    Precision precision) {
  return render_at_times(model, grid, trained_frame_times,
                         superresolved_times(trained_frame_times, factor), precision);
}

}  // namespace pact
