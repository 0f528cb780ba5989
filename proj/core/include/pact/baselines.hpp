#pragma once

#include "pact/geometry.hpp"
#include "pact/sequence.hpp"

namespace pact {

struct BackprojectionOptions {
  /// Clamp negative values to zero after recording the raw range.
  bool clamp_negative = true;
};

/// Range of the reconstruction before clamping.
struct BackprojectionStats {
  double raw_min = 0.0;
  double raw_max = 0.0;
};

/// Delay-and-sum: the mean over sensors of each trace sampled (linearly
/// interpolated) at the pixel's time of flight.
ImageSequence reconstruct_das(const Sinogram& sino, const ImageGrid& grid,
                              BackprojectionOptions options = {},
                              BackprojectionStats* stats = nullptr);

/// Universal back-projection of b(t) = 2 p(t) - 2 t dp/dt with equal
/// solid-angle weights, exact for a uniformly sampled ring. Circular-mean
/// sinograms are differentiated once to obtain the pressure p.
ImageSequence reconstruct_ubp(const Sinogram& sino, const ImageGrid& grid,
                              BackprojectionOptions options = {},
                              BackprojectionStats* stats = nullptr);

}  // namespace pact
