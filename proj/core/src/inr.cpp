#include "pact/inr.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <zlib.h>

#include "pact/error.hpp"
#include "pact/parallel.hpp"
#include "pact/random.hpp"

namespace pact {

std::string to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision precision_from_string(const std::string& name) {
  if (name == "f32") return Precision::f32;
  if (name == "f64") return Precision::f64;
  fail(ErrorCode::invalid_argument, "unknown precision '" + name + "' (expected f32 or f64)");
}

void FourierEncoder::encode(const Coord& p, std::span<double> out) const {
  const std::size_t l = length();
  require(out.size() == 2 * l, ErrorCode::shape_mismatch, "encode: output must have 2L entries");
  for (std::size_t k = 0; k < l; ++k) {
    const auto row = b.row(static_cast<Eigen::Index>(k));
    const double phase = 2.0 * std::numbers::pi * (row(0) * p.x + row(1) * p.y + row(2) * p.t);
    out[k] = std::cos(phase);
    out[l + k] = std::sin(phase);
  }
}

std::vector<double> FourierEncoder::encode(const Coord& p) const {
  std::vector<double> out(output_dim());
  encode(p, out);
  return out;
}

std::string FourierEncoder::digest() const {
  uLong crc = crc32(0L, Z_NULL, 0);
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(b.data()[i]);
    std::array<unsigned char, 8> bytes{};
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
    crc = crc32(crc, bytes.data(), 8);
  }
  char text[9];
  std::snprintf(text, sizeof text, "%08lx", static_cast<unsigned long>(crc));
  return text;
}

std::size_t CoordinateBatch::out_of_range() const {
  return static_cast<std::size_t>(std::count_if(coords.begin(), coords.end(), [](const Coord& c) {
    return c.x < 0.0 || c.x > 1.0 || c.y < 0.0 || c.y > 1.0 || c.t < 0.0 || c.t > 1.0;
  }));
}

std::string to_string(CoordinateMode mode) {
  return mode == CoordinateMode::unit ? "unit" : "isotropic";
}

CoordinateMode coordinate_mode_from_string(const std::string& name) {
  if (name == "unit") return CoordinateMode::unit;
  if (name == "isotropic") return CoordinateMode::isotropic;
  fail(ErrorCode::invalid_argument, "unknown coordinate mode '" + name + "'");
}

CoordinateScale coordinate_scale(CoordinateMode mode, std::size_t n, double time_steps) {
  require(n >= 2, ErrorCode::invalid_argument, "coordinate scale needs n >= 2");
  require(std::isfinite(time_steps) && time_steps >= 0.0, ErrorCode::invalid_argument,
          "time range must be finite and >= 0 frame steps");
  if (mode == CoordinateMode::unit) return {};
  const double longest = std::max(static_cast<double>(n - 1), time_steps);
  return {static_cast<double>(n - 1) / longest, time_steps / longest};
}

CoordinateBatch make_casorati_batch(std::size_t n, std::span<const double> times, double space) {
  require(n >= 2, ErrorCode::invalid_argument, "coordinate grid needs n >= 2");
  require(!times.empty(), ErrorCode::invalid_argument, "coordinate batch needs at least one frame");
  for (double t : times)
    require(std::isfinite(t), ErrorCode::invalid_argument, "time coordinates must be finite");
  CoordinateBatch batch;
  batch.n = n;
  batch.frames = times.size();
  batch.coords.reserve(n * n * times.size());
  require(space > 0.0, ErrorCode::invalid_argument, "spatial extent must be positive");
  const double scale = space / static_cast<double>(n - 1);
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t col = 0; col < n; ++col)
      for (double t : times)
        batch.coords.push_back(
            {static_cast<double>(col) * scale, static_cast<double>(row) * scale, t});
  return batch;
}

std::vector<double> normalize_times(std::span<const double> trained_times,
                                    std::span<const double> query_times, double extent) {
  require(!trained_times.empty(), ErrorCode::invalid_argument, "no trained frame times");
  std::vector<double> out(query_times.size(), 0.0);
  if (trained_times.size() == 1) return out;
  const double t0 = trained_times.front();
  const double span = trained_times.back() - t0;
  require(span > 0.0, ErrorCode::invalid_argument, "trained frame times must increase");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = extent * ((query_times[i] - t0) / span);
  return out;
}

std::size_t parameter_count(std::span<const std::size_t> layer_dims) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l)
    count += layer_dims[l + 1] * layer_dims[l] + layer_dims[l + 1];
  return count;
}

std::size_t InrModel::weight_offset(std::size_t layer) const {
  return parameter_count(std::span<const std::size_t>(layer_dims).first(layer + 1));
}

Eigen::Map<const Eigen::MatrixXd> InrModel::weight(std::size_t layer) const {
  return {params.data() + weight_offset(layer), static_cast<Eigen::Index>(layer_dims[layer + 1]),
          static_cast<Eigen::Index>(layer_dims[layer])};
}

Eigen::Map<Eigen::MatrixXd> InrModel::weight(std::size_t layer) {
  return {params.data() + weight_offset(layer), static_cast<Eigen::Index>(layer_dims[layer + 1]),
          static_cast<Eigen::Index>(layer_dims[layer])};
}

Eigen::Map<const Eigen::VectorXd> InrModel::bias(std::size_t layer) const {
  return {params.data() + bias_offset(layer), static_cast<Eigen::Index>(layer_dims[layer + 1])};
}

Eigen::Map<Eigen::VectorXd> InrModel::bias(std::size_t layer) {
  return {params.data() + bias_offset(layer), static_cast<Eigen::Index>(layer_dims[layer + 1])};
}

std::size_t InrModel::layer_of(std::size_t index) const {
  require(index < params.size(), ErrorCode::invalid_argument, "parameter index out of range");
  for (std::size_t l = 0; l < layers(); ++l)
    if (index < bias_offset(l) + layer_dims[l + 1]) return l;
  return layers() - 1;
}

void InrModel::validate() const {
  require(layer_dims.size() >= 2, ErrorCode::invalid_argument, "model needs at least one layer");
  require(layer_dims.front() == encoder.output_dim(), ErrorCode::invalid_argument,
          "first layer width must equal the encoding dimension 2L");
  require(layer_dims.back() == 1, ErrorCode::invalid_argument, "model output must be scalar");
  require(params.size() == parameter_count(layer_dims), ErrorCode::invalid_argument,
          "parameter vector does not match layer_dims");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!std::isfinite(params[i]))
      fail(ErrorCode::numerical,
           "non-finite weight in layer " + std::to_string(layer_of(i)) + " (index " +
               std::to_string(i) + ")");
}

InrModel init_model(std::uint64_t seed, std::size_t length, double sigma,
                    std::vector<std::size_t> hidden, double initial_output) {
  require(length >= 1, ErrorCode::invalid_argument, "encoding length L must be >= 1");
  require(std::isfinite(sigma) && sigma > 0.0, ErrorCode::invalid_argument,
          "sigma must be positive");
  for (std::size_t h : hidden)
    require(h >= 1, ErrorCode::invalid_argument, "hidden layers need at least one unit");
  require(initial_output > 0.0 && initial_output < 1.0, ErrorCode::invalid_argument,
          "initial output level must lie in (0, 1)");

  Rng rng(seed);
  InrModel model;
  model.encoder.seed = seed;
  model.encoder.sigma = sigma;
  model.encoder.b.resize(static_cast<Eigen::Index>(length), 3);
  for (Eigen::Index i = 0; i < model.encoder.b.size(); ++i)
    model.encoder.b.data()[i] = sigma * rng.normal();

  model.layer_dims.push_back(2 * length);
  model.layer_dims.insert(model.layer_dims.end(), hidden.begin(), hidden.end());
  model.layer_dims.push_back(1);
  model.params.assign(parameter_count(model.layer_dims), 0.0);
  for (std::size_t l = 0; l < model.layers(); ++l) {
    const double fan = static_cast<double>(model.layer_dims[l] + model.layer_dims[l + 1]);
    const double limit = std::sqrt(6.0 / fan);
    auto w = model.weight(l);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
  }
  if (initial_output != 0.5)
    model.bias(model.layers() - 1)(0) = std::log(initial_output / (1.0 - initial_output));
  return model;
}

namespace {

double sigmoid(double z) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(s, lo, hi);
}

double sigmoid_derivative(double z) {
  const double e = std::exp(-std::abs(z));
  return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

struct InrEvaluator::Impl {
  virtual ~Impl() = default;
  virtual std::size_t size() const = 0;
  virtual Precision precision() const = 0;
  virtual void forward(const InrModel& model, std::span<double> out) = 0;
  virtual void backward(const InrModel& model, std::span<const double> grad,
                        std::span<double> param_grad) = 0;
};

namespace {

template <class S>
class Kernel final : public InrEvaluator::Impl {
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;

 public:
  Kernel(const FourierEncoder& encoder, const CoordinateBatch& batch)
      : count_(batch.size()), dims_encoding_(encoder.output_dim()) {
    require(count_ > 0, ErrorCode::invalid_argument, "empty coordinate batch");
    features_.resize(static_cast<Eigen::Index>(dims_encoding_), static_cast<Eigen::Index>(count_));
    parallel_for(chunks(), [&](std::size_t c) {
      std::vector<double> row(dims_encoding_);
      const auto [begin, end] = chunk_range(c);
      for (std::size_t i = begin; i < end; ++i) {
        encoder.encode(batch.coords[i], row);
        for (std::size_t k = 0; k < dims_encoding_; ++k)
          features_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
              static_cast<S>(row[k]);
      }
    });
  }

  std::size_t size() const override { return count_; }
  Precision precision() const override {
    return std::is_same_v<S, float> ? Precision::f32 : Precision::f64;
  }

  void forward(const InrModel& model, std::span<double> out) override {
    require(out.size() == count_, ErrorCode::shape_mismatch, "forward: output size mismatch");
    load(model);
    const std::size_t hidden = weights_.size() - 1;
    acts_.resize(hidden);
    for (std::size_t l = 0; l < hidden; ++l)
      acts_[l].resize(weights_[l].rows(), static_cast<Eigen::Index>(count_));
    logits_.resize(count_);

    parallel_for(chunks(), [&](std::size_t c) {
      const auto [begin, end] = chunk_range(c);
      const auto b = static_cast<Eigen::Index>(begin);
      const auto cols = static_cast<Eigen::Index>(end - begin);
      for (std::size_t l = 0; l < hidden; ++l) {
        auto h = acts_[l].middleCols(b, cols);
        if (l == 0)
          h.noalias() = weights_[l] * features_.middleCols(b, cols);
        else
          h.noalias() = weights_[l] * acts_[l - 1].middleCols(b, cols);
        h.colwise() += biases_[l];
        h = h.cwiseMax(S(0));
      }
      RowVector z = weights_[hidden] * input_of(hidden).middleCols(b, cols);
      const double out_bias = static_cast<double>(biases_[hidden](0));
      for (Eigen::Index i = 0; i < cols; ++i) {
        const double logit = static_cast<double>(z(i)) + out_bias;
        logits_[begin + static_cast<std::size_t>(i)] = logit;
        out[begin + static_cast<std::size_t>(i)] = sigmoid(logit);
      }
    });
    forward_done_ = true;
  }

  void backward(const InrModel& model, std::span<const double> grad,
                std::span<double> param_grad) override {
    require(forward_done_, ErrorCode::internal, "backward called before forward");
    require(grad.size() == count_, ErrorCode::shape_mismatch,
            "backward: output gradient length must equal the batch size");
    require(param_grad.size() == model.params.size(), ErrorCode::shape_mismatch,
            "backward: parameter gradient size mismatch");
    for (double g : grad)
      require(std::isfinite(g), ErrorCode::numerical, "backward: non-finite output gradient");

    const std::size_t layers = weights_.size();
    const std::size_t nchunks = chunks();
    partials_.resize(nchunks);

    parallel_for(nchunks, [&](std::size_t c) {
      const auto [begin, end] = chunk_range(c);
      const auto b = static_cast<Eigen::Index>(begin);
      const auto cols = static_cast<Eigen::Index>(end - begin);
      Vector& partial = partials_[c];
      partial.resize(static_cast<Eigen::Index>(model.params.size()));

      Matrix delta(1, cols);
      for (Eigen::Index i = 0; i < cols; ++i) {
        const std::size_t k = begin + static_cast<std::size_t>(i);
        delta(0, i) = static_cast<S>(grad[k] * sigmoid_derivative(logits_[k]));
      }
      for (std::size_t l = layers; l-- > 0;) {
        const auto rows = weights_[l].rows();
        const auto in = weights_[l].cols();
        Eigen::Map<Matrix> gw(partial.data() + model.weight_offset(l), rows, in);
        Eigen::Map<Vector> gb(partial.data() + model.bias_offset(l), rows);
        const auto input = input_of(l).middleCols(b, cols);
        gw.noalias() = delta * input.transpose();
        gb = delta.rowwise().sum();
        if (l == 0) break;
        Matrix next = weights_[l].transpose() * delta;
        next.array() *= (input.array() > S(0)).template cast<S>();
        delta = std::move(next);
      }
    });

    std::fill(param_grad.begin(), param_grad.end(), 0.0);
    for (std::size_t c = 0; c < nchunks; ++c) {
      const S* p = partials_[c].data();
      for (std::size_t j = 0; j < param_grad.size(); ++j) param_grad[j] += static_cast<double>(p[j]);
    }
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t begin = model.weight_offset(l);
      const std::size_t end = model.bias_offset(l) + model.layer_dims[l + 1];
      for (std::size_t j = begin; j < end; ++j)
        if (!std::isfinite(param_grad[j]))
          fail(ErrorCode::numerical, "non-finite gradient in layer " + std::to_string(l));
    }
  }

 private:
  std::size_t chunks() const {
    return (count_ + InrEvaluator::chunk_size - 1) / InrEvaluator::chunk_size;
  }
  std::pair<std::size_t, std::size_t> chunk_range(std::size_t c) const {
    const std::size_t begin = c * InrEvaluator::chunk_size;
    return {begin, std::min(count_, begin + InrEvaluator::chunk_size)};
  }
  const Matrix& input_of(std::size_t layer) const {
    return layer == 0 ? features_ : acts_[layer - 1];
  }

  void load(const InrModel& model) {
    require(model.layer_dims.size() >= 2 && model.layer_dims.front() == dims_encoding_,
            ErrorCode::shape_mismatch, "model encoding width does not match the evaluator");
    require(model.params.size() == parameter_count(model.layer_dims), ErrorCode::shape_mismatch,
            "model parameter vector does not match layer_dims");
    const std::size_t layers = model.layers();
    weights_.resize(layers);
    biases_.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      weights_[l] = model.weight(l).cast<S>();
      biases_[l] = model.bias(l).cast<S>();
    }
  }

  std::size_t count_;
  std::size_t dims_encoding_;
  Matrix features_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
  std::vector<Matrix> acts_;
  std::vector<double> logits_;
  std::vector<Vector> partials_;
  bool forward_done_ = false;
};

}  // namespace

InrEvaluator::InrEvaluator(const FourierEncoder& encoder, const CoordinateBatch& batch,
                           Precision precision) {
  if (precision == Precision::f32)
    impl_ = std::make_unique<Kernel<float>>(encoder, batch);
  else
    impl_ = std::make_unique<Kernel<double>>(encoder, batch);
}

InrEvaluator::~InrEvaluator() = default;
InrEvaluator::InrEvaluator(InrEvaluator&&) noexcept = default;
InrEvaluator& InrEvaluator::operator=(InrEvaluator&&) noexcept = default;

std::size_t InrEvaluator::size() const { return impl_->size(); }
Precision InrEvaluator::precision() const { return impl_->precision(); }

void InrEvaluator::forward(const InrModel& model, std::span<double> out) {
  impl_->forward(model, out);
}

void InrEvaluator::backward(const InrModel& model, std::span<const double> output_grad,
                            std::span<double> param_grad) {
  impl_->backward(model, output_grad, param_grad);
}

ImageSequence render(const InrModel& model, const CoordinateBatch& batch, const ImageGrid& grid,
                     std::vector<double> frame_times, Precision precision) {
  require(batch.n == grid.n && batch.frames == frame_times.size() &&
              batch.size() == grid.n * grid.n * frame_times.size(),
          ErrorCode::shape_mismatch, "render: batch does not cover n*n*frames coordinates");
  InrEvaluator eval(model.encoder, batch, precision);
  std::vector<double> casorati(batch.size());
  eval.forward(model, casorati);

  // Batch order is pixel-major; images are frame-major.
  const std::size_t pixels = grid.pixel_count();
  const std::size_t frames = frame_times.size();
  ImageSequence seq(grid, std::move(frame_times));
  auto data = seq.data();
  for (std::size_t p = 0; p < pixels; ++p)
    for (std::size_t t = 0; t < frames; ++t) data[t * pixels + p] = casorati[p * frames + t];
  return seq;
}

std::vector<double> backward(const InrModel& model, const CoordinateBatch& batch,
                             std::span<const double> output_grad, Precision precision) {
  InrEvaluator eval(model.encoder, batch, precision);
  std::vector<double> out(batch.size());
  eval.forward(model, out);
  std::vector<double> grad(model.params.size());
  eval.backward(model, output_grad, grad);
  return grad;
}

}  // namespace pact
