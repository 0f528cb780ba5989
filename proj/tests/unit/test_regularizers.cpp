#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "pact/error.hpp"
#include "pact/forward.hpp"
#include "pact/random.hpp"
#include "pact/regularizers.hpp"

namespace pact {
namespace {

ImageSequence random_sequence(std::size_t n, std::size_t frames, std::uint64_t seed) {
  std::vector<double> times(frames);
  for (std::size_t t = 0; t < frames; ++t) times[t] = 0.1 * static_cast<double>(t);
  ImageSequence seq(ImageGrid::centered(n, 0.02), times);
  Rng rng(seed);
  for (double& v : seq.values()) v = rng.uniform();
  return seq;
}

template <class Fn>
double central_difference(ImageSequence x, std::size_t index, double h, Fn&& value) {
  const double x0 = x.values()[index];
  x.values()[index] = x0 + h;
  const double plus = value(x);
  x.values()[index] = x0 - h;
  const double minus = value(x);
  return (plus - minus) / (2.0 * h);
}

struct DcCase {
  ImageGrid grid = ImageGrid::centered(16, 0.02);
  ForwardOperator op = build_forward_operator(grid, desk::ring(16, grid), {true});
};

TEST(DcLoss, ExactFitIsZero) {
  DcCase c;
  const auto x = random_sequence(16, 3, 1);
  const auto y = apply_forward(c.op, x);
  const auto term = dc_loss(c.op, x, y);
  EXPECT_EQ(term.value, 0.0);
  for (double g : term.gradient) ASSERT_EQ(g, 0.0);
}

TEST(DcLoss, QuadraticInResidual) {
  DcCase c;
  // A zero image makes the residual exactly -y.
  ImageSequence x(c.grid, {0.0, 1.0, 2.0});
  Sinogram y1 = apply_forward(c.op, random_sequence(16, 3, 2)), y2 = y1;
  for (double& v : y2.values()) v *= 2.0;
  EXPECT_EQ(dc_loss(c.op, x, y2).value, 4.0 * dc_loss(c.op, x, y1).value);
}

TEST(DcLoss, GradientMatchesFiniteDifferences) {
  DcCase c;
  const auto x = random_sequence(16, 3, 4);
  auto y = apply_forward(c.op, random_sequence(16, 3, 5));
  const auto term = dc_loss(c.op, x, y);
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t i = rng.next() % x.size();
    // The loss is quadratic, so the central difference is exact up to rounding.
    const double fd = central_difference(x, i, 1e-3, [&](const ImageSequence& z) {
      return dc_loss(c.op, z, y).value;
    });
    EXPECT_LT(std::abs(fd - term.gradient[i]) / std::abs(term.gradient[i]), 1e-6);
  }
}

TEST(DcLoss, RejectsMismatch) {
  DcCase c;
  const auto x = random_sequence(16, 3, 7);
  const auto y = apply_forward(c.op, random_sequence(16, 2, 8));
  EXPECT_THROW(dc_loss(c.op, x, y), Error);
}

TEST(TemporalTv, ConstantInTimeIsZero) {
  auto x = random_sequence(8, 4, 9);
  for (std::size_t t = 1; t < 4; ++t)
    std::copy(x.frame(0).begin(), x.frame(0).end(), x.frame(t).begin());
  const auto term = temporal_tv(x);
  EXPECT_NEAR(term.value, 0.0, 1e-12);
}

TEST(TemporalTv, SingleStepApproachesHeight) {
  ImageSequence x(ImageGrid::centered(4, 0.02), {0.0, 1.0});
  x.at(1, 2, 1) = 0.37;
  for (double eps : {1e-6, 1e-9, 1e-12}) EXPECT_NEAR(temporal_tv(x, eps).value, 0.37, 2 * eps);
}

TEST(TemporalTv, MatchesBruteForce) {
  const auto x = random_sequence(8, 5, 10);
  const double eps = 1e-8;
  double brute = 0.0;
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c)
      for (std::size_t t = 0; t + 1 < 5; ++t) {
        const double d = x.at(t + 1, r, c) - x.at(t, r, c);
        brute += std::sqrt(d * d + eps * eps) - eps;
      }
  const auto term = temporal_tv(x, eps);
  EXPECT_LT(std::abs(term.value - brute) / brute, 1e-12);

  // A larger epsilon keeps the smoothed kink wide relative to the step.
  const double smooth = 5e-2;
  const auto smooth_term = temporal_tv(x, smooth);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t i = rng.next() % x.size();
    const double fd = central_difference(x, i, 1e-6, [&](const ImageSequence& z) {
      return temporal_tv(z, smooth).value;
    });
    EXPECT_LT(std::abs(fd - smooth_term.gradient[i]) / std::max(std::abs(fd), 0.1), 1e-6);
  }
}

TEST(TemporalTv, TimeReversalAndPixelPermutation) {
  const auto x = random_sequence(8, 5, 15);
  const double value = temporal_tv(x).value;
  ImageSequence reversed = x, permuted = x;
  for (std::size_t t = 0; t < 5; ++t) {
    const auto src = x.frame(t);
    std::copy(src.begin(), src.end(), reversed.frame(4 - t).begin());
    // Same pixel shuffle in every frame: index i -> (5 i + 3) mod 64.
    for (std::size_t i = 0; i < 64; ++i) permuted.frame(t)[(5 * i + 3) % 64] = src[i];
  }
  EXPECT_NEAR(temporal_tv(reversed).value, value, 1e-12 * value);
  EXPECT_NEAR(temporal_tv(permuted).value, value, 1e-12 * value);
}

TEST(NuclearNorm, IdentityBlock) {
  ImageSequence x(ImageGrid::centered(4, 0.02), {0.0, 1.0, 2.0});
  for (std::size_t t = 0; t < 3; ++t) x.frame(t)[t] = 1.0;
  EXPECT_NEAR(nuclear_norm(x).value, 3.0, 1e-12);
}

TEST(NuclearNorm, RankOne) {
  ImageSequence x(ImageGrid::centered(4, 0.02), {0.0, 1.0, 2.0});
  Rng rng(12);
  Eigen::VectorXd u(16), v(3);
  for (auto& e : u) e = rng.normal();
  for (auto& e : v) e = rng.normal();
  u.normalize();
  v.normalize();
  x.casorati() = u * v.transpose();
  const auto term = nuclear_norm(x);
  EXPECT_NEAR(term.value, 1.0, 1e-12);
  const Eigen::MatrixXd expected = u * v.transpose();
  for (std::size_t i = 0; i < x.size(); ++i)
    EXPECT_NEAR(term.gradient[i], expected.data()[i], 1e-8);
}

TEST(NuclearNorm, MatchesFullSvd) {
  const auto x = random_sequence(8, 5, 13);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x.casorati());
  const double oracle = svd.singularValues().sum();
  const auto term = nuclear_norm(x);
  EXPECT_LT(std::abs(term.value - oracle) / oracle, 1e-10);

  const auto values = casorati_singular_values(x);
  for (Eigen::Index k = 0; k < 5; ++k)
    EXPECT_NEAR(values[k], svd.singularValues()(k), 1e-10 * oracle);
  for (std::size_t k = 0; k + 1 < values.size(); ++k) ASSERT_GT(values[k] - values[k + 1], 1e-3);

  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t i = rng.next() % x.size();
    const double fd = central_difference(x, i, 1e-6, [](const ImageSequence& z) {
      Eigen::JacobiSVD<Eigen::MatrixXd> s(z.casorati());
      return s.singularValues().sum();
    });
    EXPECT_LT(std::abs(fd - term.gradient[i]) / std::max(std::abs(fd), 1e-3), 1e-5);
  }
}

TEST(NuclearNorm, UnitarilyInvariant) {
  auto x = random_sequence(8, 4, 16);
  const double value = nuclear_norm(x).value;
  Eigen::MatrixXd g(4, 4);
  Rng rng(17);
  for (auto& e : g.reshaped()) e = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  x.casorati() = x.casorati() * q;
  EXPECT_NEAR(nuclear_norm(x).value, value, 1e-10 * value);
}

TEST(NuclearNorm, ConstantSequenceIsRankOne) {
  auto x = random_sequence(8, 6, 18);
  for (std::size_t t = 1; t < 6; ++t)
    std::copy(x.frame(0).begin(), x.frame(0).end(), x.frame(t).begin());
  double norm = 0.0;
  for (double v : x.frame(0)) norm += v * v;
  const double expected = std::sqrt(norm) * std::sqrt(6.0);
  EXPECT_NEAR(nuclear_norm(x).value, expected, 1e-10 * expected);
}

TEST(NuclearNorm, ZeroSequence) {
  ImageSequence x(ImageGrid::centered(4, 0.02), {0.0, 1.0});
  const auto term = nuclear_norm(x);
  EXPECT_EQ(term.value, 0.0);
  for (double g : term.gradient) ASSERT_EQ(g, 0.0);
}

TEST(LossBreakdown, Combine) {
  LossBreakdown b{2.0, 3.0, 5.0, 0.0, 0.1, 0.01};
  b.combine();
  EXPECT_NEAR(b.total, 2.0 + 0.3 + 0.05, 1e-15);
}

}  // namespace
}  // namespace pact
