#pragma once

#include <vector>

#include "pact/forward.hpp"
#include "pact/sequence.hpp"

namespace pact {

struct LossBreakdown {
  double dc = 0.0;
  double tv = 0.0;
  double lr = 0.0;
  double total = 0.0;
  double lambda_d = 0.0;
  double lambda_l = 0.0;

  /// Fills `total` from the terms and weights.
  void combine() { total = dc + lambda_d * tv + lambda_l * lr; }
};

/// A loss value with its gradient in image space (frame-major, like
/// ImageSequence::data()).
struct TermValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// sum (Ax - y)^2 and 2 A^T (Ax - y).
TermValue dc_loss(const ForwardOperator& op, const ImageSequence& frames, const Sinogram& y);

inline constexpr double default_tv_epsilon = 1e-8;

/// Charbonnier-smoothed L1 of first temporal differences:
/// sum over pixels and t of sqrt((x[t+1] - x[t])^2 + eps^2) - eps.
TermValue temporal_tv(const ImageSequence& frames, double epsilon = default_tv_epsilon);

/// Nuclear norm of the (n*n) x T Casorati matrix. Subgradient U V^T over
/// singular values above relative_floor * sigma_max.
TermValue nuclear_norm(const ImageSequence& frames, double relative_floor = 1e-8);

/// Singular values of the Casorati matrix, descending.
std::vector<double> casorati_singular_values(const ImageSequence& frames);

}  // namespace pact
