#include <gtest/gtest.h>

#include <cmath>

#include "pact/error.hpp"
#include "pact/forward.hpp"
#include "pact/phantom.hpp"
#include "pact/random.hpp"

namespace pact {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// n=32, S=32, F=512: a 20 MSa/s window opening at 10 us covers the desk field.
ForwardOperator small_operator(bool derivative) {
  const auto grid = desk::grid(32);
  const auto geom = make_ring_array(32, 0.03, {}, 1500.0, 20e6, 512, 10e-6);
  return build_forward_operator(grid, geom, {derivative});
}

ImageSequence point_source(const ImageGrid& grid, std::size_t row, std::size_t col) {
  ImageSequence seq(grid, {0.0});
  seq.at(0, row, col) = 1.0;
  return seq;
}

TEST(Forward, ZeroImageGivesZeroSinogram) {
  const auto op = small_operator(true);
  ImageSequence zero(op.grid(), {0.0, 1.0});
  const auto sino = apply_forward(op, zero);
  EXPECT_EQ(sino.frames(), 2u);
  for (double v : sino.data()) ASSERT_EQ(v, 0.0);
}

TEST(Forward, TapWeightsSumToInverseDistance) {
  const auto op = small_operator(false);
  const auto& grid = op.grid();
  for (std::size_t s = 0; s < op.sensors(); s += 5) {
    const auto taps = op.taps(s);
    for (std::size_t j = 0; j < op.pixels(); j += 7) {
      const double d = distance(grid.pixel_center(j / grid.n, j % grid.n),
                                op.geometry().positions[s]);
      EXPECT_NEAR(taps[j].lower + taps[j].upper, 1.0 / d, 1e-12 / d);
      EXPECT_GT(taps[j].lower, 0.0);
      EXPECT_GE(taps[j].upper, 0.0);
    }
  }
}

TEST(Forward, CenterPixelGivesIdenticalTraces) {
  const auto grid = ImageGrid::centered(33, 0.02);
  const auto geom = desk::ring(24, grid);
  const auto op = build_forward_operator(grid, geom, {true});
  const auto sino = apply_forward(op, point_source(grid, 16, 16));
  const auto first = sino.trace(0, 0);
  double peak = 0.0;
  for (double v : first) peak = std::max(peak, std::abs(v));
  for (std::size_t s = 1; s < sino.sensors(); ++s) {
    const auto tr = sino.trace(0, s);
    for (std::size_t i = 0; i < tr.size(); ++i) ASSERT_NEAR(tr[i], first[i], 1e-9 * peak);
  }
}

TEST(Forward, LinearityAndHomogeneity) {
  for (bool derivative : {false, true}) {
    const auto op = small_operator(derivative);
    Rng rng(11);
    ImageSequence x(op.grid(), {0.0, 1.0}), z(op.grid(), {0.0, 1.0}), sum(op.grid(), {0.0, 1.0});
    for (std::size_t i = 0; i < x.size(); ++i) {
      x.values()[i] = rng.uniform();
      z.values()[i] = rng.uniform(-1.0, 1.0);
      sum.values()[i] = 0.7 * x.values()[i] - 1.3 * z.values()[i];
    }
    const auto ax = apply_forward(op, x), az = apply_forward(op, z), as = apply_forward(op, sum);
    double scale = 0.0;
    for (double v : ax.data()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < as.size(); ++i)
      ASSERT_NEAR(as.data()[i], 0.7 * ax.data()[i] - 1.3 * az.data()[i], 1e-10 * scale);

    ImageSequence doubled = x;
    for (double& v : doubled.values()) v *= 2.0;
    const auto a2 = apply_forward(op, doubled);
    for (std::size_t i = 0; i < a2.size(); ++i) ASSERT_EQ(a2.data()[i], 2.0 * ax.data()[i]);
  }
}

TEST(Forward, AdjointIdentity) {
  for (bool derivative : {false, true}) {
    const auto op = small_operator(derivative);
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(op.pixels()), y(op.sensors() * op.samples());
      for (double& v : x) v = rng.uniform(-1.0, 1.0);
      for (double& v : y) v = rng.normal();
      std::vector<double> ax(y.size()), aty(x.size());
      op.forward(x, 1, ax);
      op.adjoint(y, 1, aty);
      const double lhs = dot(ax, y), rhs = dot(x, aty);
      EXPECT_LT(std::abs(lhs - rhs) / (std::abs(lhs) + 1e-300), 1e-10)
          << "derivative=" << derivative << " trial " << trial;
    }
  }
}

TEST(Forward, DifferentiateTransposeIsExact) {
  const auto op = small_operator(true);
  Rng rng(5);
  std::vector<double> a(op.samples()), b(op.samples()), da(a.size()), dtb(b.size());
  for (double& v : a) v = rng.normal();
  for (double& v : b) v = rng.normal();
  op.differentiate(a, da);
  op.differentiate_transpose(b, dtb);
  EXPECT_NEAR(dot(da, b), dot(a, dtb), 1e-12 * std::abs(dot(da, b)));
}

TEST(Forward, ZeroSinogramAdjointIsZero) {
  const auto op = small_operator(true);
  Sinogram zero(op.geometry(), {0.0});
  zero.set_signal(op.signal());
  const auto back = apply_adjoint(op, zero);
  for (double v : back.values()) ASSERT_EQ(v, 0.0);
}

TEST(Forward, NormalOperatorPeaksAtSource) {
  const auto grid = ImageGrid::centered(8, 0.02);
  const auto geom = desk::ring(32, grid);
  for (bool derivative : {false, true}) {
    const auto op = build_forward_operator(grid, geom, {derivative});
    for (std::size_t row : {1u, 3u, 6u}) {
      for (std::size_t col : {0u, 4u, 7u}) {
        const auto back = apply_adjoint(op, apply_forward(op, point_source(grid, row, col)));
        const auto& v = back.values();
        const auto arg = std::max_element(v.begin(), v.end()) - v.begin();
        EXPECT_EQ(static_cast<std::size_t>(arg), row * grid.n + col);
      }
    }
  }
}

TEST(Forward, TimeOfFlightPeak) {
  const auto grid = desk::grid(32);
  const auto geom = desk::ring(16, grid);
  const auto op = build_forward_operator(grid, geom);
  for (auto [row, col] : {std::pair{3u, 5u}, std::pair{16u, 16u}, std::pair{30u, 1u}}) {
    const auto sino = apply_forward(op, point_source(grid, row, col));
    for (std::size_t s = 0; s < geom.sensor_count(); ++s) {
      const auto tr = sino.trace(0, s);
      std::size_t peak = 0;
      for (std::size_t i = 0; i < tr.size(); ++i)
        if (std::abs(tr[i]) > std::abs(tr[peak])) peak = i;
      const double expected =
          geom.sample_index_for_distance(distance(grid.pixel_center(row, col), geom.positions[s]));
      EXPECT_LE(std::abs(static_cast<double>(peak) - expected), 1.0);
    }
  }
}

TEST(Forward, RotationPermutesTraces) {
  // A quarter turn about the grid center maps pixel centers to pixel centers
  // and sensor k to sensor k + S/4.
  const auto grid = desk::grid(32);
  const auto geom = desk::ring(32, grid);
  const auto op = build_forward_operator(grid, geom, {true});
  const std::size_t n = grid.n, row = 5, col = 21;
  const auto a = apply_forward(op, point_source(grid, row, col));
  // (x, y) -> (-y, x): col' = n-1-row, row' = col.
  const auto b = apply_forward(op, point_source(grid, col, n - 1 - row));
  double peak = 0.0;
  for (double v : a.data()) peak = std::max(peak, std::abs(v));
  for (std::size_t s = 0; s < 32; ++s) {
    const auto ta = a.trace(0, s), tb = b.trace(0, (s + 8) % 32);
    for (std::size_t i = 0; i < ta.size(); ++i) ASSERT_NEAR(ta[i], tb[i], 1e-9 * peak);
  }
}

TEST(Forward, FramesAreIndependent) {
  const auto op = small_operator(true);
  const auto seq = render_phantom(phantoms::two_disc_moving(3, 0.05), op.grid());
  const auto all = apply_forward(op, seq);
  const std::size_t order[] = {2, 0, 1};
  const auto permuted = apply_forward(op, seq.select_frames(order));
  for (std::size_t k = 0; k < 3; ++k) {
    const auto a = all.frame(order[k]), b = permuted.frame(k);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i], b[i]);
  }
}

TEST(Forward, RejectsMismatchedInputs) {
  const auto op = small_operator(true);
  ImageSequence wrong(desk::grid(16), {0.0});
  EXPECT_THROW(apply_forward(op, wrong), Error);
  Sinogram other(make_ring_array(16, 0.03, {}, 1500.0, 20e6, 512, 10e-6), {0.0});
  EXPECT_THROW(apply_adjoint(op, other), Error);
  Sinogram wrong_kind(op.geometry(), {0.0});
  wrong_kind.set_signal(SignalKind::circular_mean);
  EXPECT_THROW(apply_adjoint(op, wrong_kind), Error);
}

TEST(Forward, RejectsUncoveredGeometry) {
  const auto grid = desk::grid(32);
  const auto geom = make_ring_array(32, 0.03, {}, 1500.0, 40e6, 512);
  EXPECT_THROW(build_forward_operator(grid, geom), Error);
}

TEST(Forward, MovingDiscEnergyGolden) {
  // Frozen after checking linearity, symmetry and adjoint oracles above.
  const auto grid = desk::grid(32);
  const auto op = build_forward_operator(grid, desk::ring(32, grid));
  const auto sino = apply_forward(op, render_phantom(phantoms::linear_disc(8, 0.5, grid), grid));
  const double golden[] = {1835146.3612728778, 1888490.2826734134, 1936588.0264739373,
                           1966312.3036138797, 1966312.3036138767, 1936588.0264739427,
                           1888490.2826734146, 1835146.3612728799};
  std::vector<double> energy;
  for (std::size_t t = 0; t < sino.frames(); ++t) {
    double e = 0.0;
    for (double v : sino.frame(t)) e += v * v;
    energy.push_back(e);
  }
  for (std::size_t t = 0; t < energy.size(); ++t) EXPECT_NEAR(energy[t], golden[t], 1e-9 * golden[t]);
  for (std::size_t t = 1; t + 1 < energy.size(); ++t) {
    const double curvature = std::abs(energy[t + 1] - 2.0 * energy[t] + energy[t - 1]);
    EXPECT_LT(curvature, 0.02 * energy[t]);
  }
}

TEST(Noise, InfiniteSnrIsIdentity) {
  const auto op = small_operator(true);
  const auto sino = apply_forward(op, render_phantom(phantoms::two_disc_moving(2), op.grid()));
  EXPECT_EQ(add_noise(sino, noiseless, 3).values(), sino.values());
}

TEST(Noise, EmpiricalSnr) {
  const auto op = small_operator(true);
  const auto clean = apply_forward(op, render_phantom(phantoms::two_disc_moving(8), op.grid()));
  ASSERT_EQ(clean.size(), 32u * 512u * 8u);
  const auto noisy = add_noise(clean, 20.0, 99);
  double signal = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    signal += clean.data()[i] * clean.data()[i];
    const double d = noisy.data()[i] - clean.data()[i];
    noise += d * d;
  }
  const double snr = 10.0 * std::log10(signal / noise);
  EXPECT_GE(snr, 19.5);
  EXPECT_LE(snr, 20.5);
  EXPECT_EQ(add_noise(clean, 20.0, 99).values(), noisy.values());
  EXPECT_NE(add_noise(clean, 20.0, 100).values(), noisy.values());
}

}  // namespace
}  // namespace pact
