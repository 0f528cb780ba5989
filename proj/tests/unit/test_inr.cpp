#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "pact/error.hpp"
#include "pact/inr.hpp"
#include "pact/random.hpp"
#include "pact/trainer.hpp"

namespace pact {
namespace {

double weighted_output(const InrModel& model, const CoordinateBatch& batch,
                       std::span<const double> g) {
  InrEvaluator eval(model.encoder, batch, Precision::f64);
  std::vector<double> out(batch.size());
  eval.forward(model, out);
  return std::inner_product(out.begin(), out.end(), g.begin(), 0.0);
}

std::vector<double> outputs(const InrModel& model, const CoordinateBatch& batch,
                            Precision precision = Precision::f64) {
  InrEvaluator eval(model.encoder, batch, precision);
  std::vector<double> out(batch.size());
  eval.forward(model, out);
  return out;
}

TEST(FourierEncoder, OriginMapsToOnesAndZeros) {
  const auto model = init_model(1);
  const auto e = model.encoder.encode({0.0, 0.0, 0.0});
  ASSERT_EQ(e.size(), 512u);
  for (std::size_t k = 0; k < 256; ++k) {
    EXPECT_EQ(e[k], 1.0);
    EXPECT_EQ(e[256 + k], 0.0);
  }
}

TEST(FourierEncoder, UnitCirclePerFrequency) {
  const auto model = init_model(2, 64, 10.0);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = model.encoder.encode({rng.uniform(), rng.uniform(), rng.uniform()});
    for (std::size_t k = 0; k < 64; ++k) {
      ASSERT_LE(std::abs(e[k]), 1.0);
      ASSERT_NEAR(e[k] * e[k] + e[64 + k] * e[64 + k], 1.0, 1e-12);
    }
  }
}

TEST(FourierEncoder, SpreadFollowsSigma) {
  for (double sigma : {5.0, 10.0, 20.0}) {
    const auto enc = init_model(4, 256, sigma).encoder;
    double sq = 0.0;
    for (Eigen::Index i = 0; i < enc.b.size(); ++i) sq += enc.b.data()[i] * enc.b.data()[i];
    EXPECT_NEAR(std::sqrt(sq / static_cast<double>(enc.b.size())), sigma, 0.1 * sigma);
  }
}

TEST(InrModel, DefaultParameterCount) {
  const auto model = init_model(0);
  EXPECT_EQ(model.params.size(), 263169u);
  EXPECT_EQ(model.layer_dims, (std::vector<std::size_t>{512, 256, 256, 256, 1}));
}

TEST(InrModel, SeedDeterminesWeights) {
  EXPECT_EQ(init_model(9).params, init_model(9).params);
  EXPECT_EQ(init_model(9).encoder.digest(), init_model(9).encoder.digest());
  EXPECT_NE(init_model(9).params, init_model(10).params);
}

TEST(InrModel, InitializationBounds) {
  const auto model = init_model(5);
  for (std::size_t l = 0; l < model.layers(); ++l) {
    const double a = std::sqrt(6.0 / static_cast<double>(model.layer_dims[l] + model.layer_dims[l + 1]));
    EXPECT_LE(model.weight(l).cwiseAbs().maxCoeff(), a);
    EXPECT_GT(model.weight(l).cwiseAbs().maxCoeff(), 0.9 * a);
    EXPECT_EQ(model.bias(l).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(InrModel, ZeroNetworkOutputsHalf) {
  auto model = init_model(6, 16, 10.0, {32, 32});
  std::fill(model.params.begin(), model.params.end(), 0.0);
  const std::vector<double> times = {0.0, 0.5, 1.0};
  const auto seq = render(model, make_casorati_batch(8, times), ImageGrid::centered(8, 0.02),
                          {0.0, 1.0, 2.0});
  for (double v : seq.values()) ASSERT_EQ(v, 0.5);
}

TEST(CoordinateBatch, CasoratiOrder) {
  const std::vector<double> times = {0.0, 0.25, 1.0};
  const auto batch = make_casorati_batch(4, times);
  ASSERT_EQ(batch.size(), 48u);
  EXPECT_EQ(batch.out_of_range(), 0u);
  const std::size_t row = 2, col = 3, t = 1;
  const Coord c = batch.coords[(row * 4 + col) * 3 + t];
  EXPECT_DOUBLE_EQ(c.x, 1.0);
  EXPECT_DOUBLE_EQ(c.y, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.t, 0.25);
}

TEST(CoordinateBatch, NormalizeTimes) {
  const std::vector<double> trained = {0.2, 0.4, 0.6};
  const std::vector<double> query = {0.2, 0.3, 0.6, 0.7};
  const auto t = normalize_times(trained, query);
  EXPECT_DOUBLE_EQ(t[0], 0.0);
  EXPECT_NEAR(t[1], 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(t[2], 1.0);
  EXPECT_GT(t[3], 1.0);
  EXPECT_EQ(normalize_times(std::vector<double>{3.0}, query), std::vector<double>(4, 0.0));
}

TEST(CoordinateBatch, IsotropicScale) {
  EXPECT_EQ(coordinate_scale(CoordinateMode::unit, 64, 7.0), (CoordinateScale{1.0, 1.0}));
  const auto iso = coordinate_scale(CoordinateMode::isotropic, 64, 7.0);
  EXPECT_EQ(iso.space, 1.0);
  EXPECT_DOUBLE_EQ(iso.time, 7.0 / 63.0);
  const auto tall = coordinate_scale(CoordinateMode::isotropic, 5, 8.0);
  EXPECT_DOUBLE_EQ(tall.space, 0.5);
  EXPECT_EQ(tall.time, 1.0);
  EXPECT_EQ(coordinate_scale(CoordinateMode::isotropic, 16, 0.0).time, 0.0);
  EXPECT_DOUBLE_EQ(coordinate_scale(CoordinateMode::isotropic, 32, 2.5).time, 2.5 / 31.0);
  EXPECT_THROW(coordinate_scale(CoordinateMode::isotropic, 32, -1.0), Error);

  // One pixel step equals one frame step.
  const std::vector<double> trained = {0.0, 0.05, 0.1};
  const auto t = normalize_times(trained, trained, iso.time * 2.0 / 7.0);
  const auto batch = make_casorati_batch(64, t, iso.space);
  EXPECT_DOUBLE_EQ(batch.coords[1].t - batch.coords[0].t, batch.coords[3].x - batch.coords[0].x);
  EXPECT_EQ(batch.out_of_range(), 0u);
  EXPECT_EQ(coordinate_mode_from_string(to_string(CoordinateMode::unit)), CoordinateMode::unit);
  EXPECT_THROW(coordinate_mode_from_string("anisotropic"), Error);
}

TEST(Render, PureAndFrameCountFollowsTimes) {
  const auto model = init_model(7, 32, 10.0, {32, 32});
  const auto grid = ImageGrid::centered(8, 0.02);
  std::vector<double> t4 = {0.0, 1.0 / 3, 2.0 / 3, 1.0};
  std::vector<double> t16(16);
  for (std::size_t i = 0; i < 16; ++i) t16[i] = static_cast<double>(i) / 15.0;
  const auto a = render(model, make_casorati_batch(8, t4), grid, t4);
  const auto b = render(model, make_casorati_batch(8, t4), grid, t4);
  EXPECT_EQ(a.values(), b.values());
  const auto c = render(model, make_casorati_batch(8, t16), grid, t16);
  EXPECT_EQ(c.frames(), 16u);
  EXPECT_EQ(c.n(), a.n());
  for (double v : c.values()) {
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(Render, SinglePrecisionTracksDouble) {
  const auto model = init_model(8);
  const std::vector<double> times = {0.0, 0.5, 1.0};
  const auto batch = make_casorati_batch(16, times);
  const auto lo = outputs(model, batch, Precision::f32);
  const auto hi = outputs(model, batch, Precision::f64);
  for (std::size_t i = 0; i < lo.size(); ++i) ASSERT_NEAR(lo[i], hi[i], 1e-4);
}

TEST(Backward, ZeroOutputGradient) {
  const auto model = init_model(9, 16, 10.0, {32, 32});
  const std::vector<double> times = {0.0, 1.0};
  const auto batch = make_casorati_batch(4, times);
  const std::vector<double> zero(batch.size(), 0.0);
  for (double v : backward(model, batch, zero)) ASSERT_EQ(v, 0.0);
}

TEST(Backward, SumOverBatchIsSumOfParts) {
  const auto model = init_model(10, 16, 10.0, {32, 32});
  const std::vector<double> times = {0.0, 0.5, 1.0};
  const auto batch = make_casorati_batch(3, times);
  Rng rng(1);
  std::vector<double> g(batch.size());
  for (double& v : g) v = rng.normal();
  const auto whole = backward(model, batch, g);
  std::vector<double> sum(whole.size(), 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CoordinateBatch one;
    one.coords = {batch.coords[i]};
    one.n = batch.n;
    one.frames = 1;
    const auto part = backward(model, one, std::span<const double>(&g[i], 1));
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += part[k];
  }
  for (std::size_t k = 0; k < sum.size(); ++k)
    ASSERT_NEAR(whole[k], sum[k], 1e-12 * (1.0 + std::abs(whole[k])));
}

TEST(Backward, MatchesFiniteDifferences) {
  // Default architecture; parameters whose one-sided differences disagree
  // have a ReLU kink inside [-h, h] and are skipped.
  const auto model = init_model(11);
  const std::vector<double> times = {0.0, 0.6};
  const auto batch = make_casorati_batch(3, times);
  Rng rng(12);
  std::vector<double> g(batch.size());
  for (double& v : g) v = rng.normal();
  const auto grad = backward(model, batch, g, Precision::f64);

  const double h = 1e-5;
  const double f0 = weighted_output(model, batch, g);
  std::size_t checked = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    // Half the draws from the small late layers so every layer is exercised.
    const std::size_t base = trial % 2 ? model.weight_offset(2) : 0;
    const std::size_t index = base + rng.next() % (model.params.size() - base);
    InrModel plus = model, minus = model;
    plus.params[index] += h;
    minus.params[index] -= h;
    const double fp = weighted_output(plus, batch, g), fm = weighted_output(minus, batch, g);
    const double right = (fp - f0) / h, left = (f0 - fm) / h;
    if (std::abs(right - left) > 1e-3 * (std::abs(right) + std::abs(left)) + 1e-9) continue;
    const double fd = (fp - fm) / (2.0 * h);
    const double err = std::abs(fd - grad[index]) / std::max(std::abs(fd), 1e-6);
    worst = std::max(worst, err);
    ++checked;
  }
  EXPECT_GE(checked, 45u);
  EXPECT_LT(worst, 1e-4);
}

TEST(Evaluator, ChunkedReductionIsDeterministic) {
  const auto model = init_model(13, 32, 10.0, {64, 64});
  std::vector<double> times(10);
  for (std::size_t i = 0; i < 10; ++i) times[i] = i / 9.0;
  const auto batch = make_casorati_batch(24, times);
  ASSERT_GT(batch.size(), 2 * InrEvaluator::chunk_size);
  Rng rng(2);
  std::vector<double> g(batch.size());
  for (double& v : g) v = rng.normal();
  InrEvaluator eval(model.encoder, batch, Precision::f32);
  std::vector<double> out(batch.size()), g1(model.params.size()), g2(model.params.size());
  eval.forward(model, out);
  eval.backward(model, g, g1);
  eval.forward(model, out);
  eval.backward(model, g, g2);
  EXPECT_EQ(g1, g2);
}

TEST(Evaluator, RejectsMismatchedModel) {
  const auto a = init_model(1, 16, 10.0, {32});
  const auto b = init_model(1, 32, 10.0, {32});
  const std::vector<double> times = {0.0};
  InrEvaluator eval(a.encoder, make_casorati_batch(4, times));
  std::vector<double> out(16);
  EXPECT_THROW(eval.forward(b, out), Error);
}

// Fits a pure 2D sinusoid in the image domain; registered with the slow tests.
TEST(SlowInr, SpectralCapacity) {
  const std::size_t n = 32;
  const std::vector<double> times = {0.0};
  const auto batch = make_casorati_batch(n, times);
  std::vector<double> target(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Coord& c = batch.coords[i];
    target[i] = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * (3.0 * c.x + 2.0 * c.y));
  }
  for (double sigma : {5.0, 10.0, 20.0}) {
    TrainConfig cfg;
    cfg.sigma = sigma;
    cfg.seed = 4;
    auto model = init_model(cfg);
    InrEvaluator eval(model.encoder, batch, Precision::f32);
    AdamState adam(model.params.size());
    std::vector<double> out(batch.size()), g(batch.size()), grad(model.params.size());
    double mse = 0.0;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
      eval.forward(model, out);
      mse = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double r = out[i] - target[i];
        mse += r * r / static_cast<double>(out.size());
        g[i] = 2.0 * r / static_cast<double>(out.size());
      }
      eval.backward(model, g, grad);
      adam_step(model.params, grad, adam, lr_at(cfg, it), cfg.adam_beta1, cfg.adam_beta2,
                cfg.adam_eps);
    }
    EXPECT_LT(mse, 1e-3) << "sigma " << sigma;
  }
}

}  // namespace
}  // namespace pact
