#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "pact/geometry.hpp"
#include "pact/inr.hpp"

namespace pact {

struct Checkpoint {
  InrModel model;
  std::size_t iteration = 0;
  Precision precision = Precision::f32;  // evaluation precision used in training
  ImageGrid grid;
  std::vector<double> trained_frame_times;
};

/// Writes <dir>/weights.bin (little-endian float64 parameters) and
/// <dir>/manifest.json (seed, L, sigma, layer_dims, iteration, B digest, ...).
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);

/// Rebuilds B from the recorded seed and sigma, checks it against the digest,
/// then loads the weights.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace pact
