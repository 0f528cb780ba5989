#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pact/sequence.hpp"

namespace pact {

struct NormalizationBounds {
  double min = 0.0;
  double max = 0.0;
};

/// Min-max normalization over the whole stack (not per frame).
ImageSequence normalize_sequence(const ImageSequence& seq, NormalizationBounds* bounds = nullptr);

/// Normalizes each sequence independently; rejects constant sequences.
std::pair<ImageSequence, ImageSequence> normalize_pair(const ImageSequence& y,
                                                       const ImageSequence& yhat);

struct FrameScores {
  std::vector<double> per_frame;
  double mean = 0.0;
  std::size_t excluded = 0;  // +inf PSNR frames left out of the mean
};

/// 10 log10(1 / MSE) per frame; identical frames give +inf.
FrameScores psnr(const ImageSequence& y, const ImageSequence& yhat);

inline constexpr double ssim_c1 = 1e-4;
inline constexpr double ssim_c2 = 9e-4;

/// SSIM with frame-wide means, variances and covariance (no window).
FrameScores ssim(const ImageSequence& y, const ImageSequence& yhat);

struct EvalReport {
  FrameScores psnr;
  FrameScores ssim;
  NormalizationBounds reference_bounds;
  NormalizationBounds estimate_bounds;

  std::string to_json() const;
  /// frame,psnr_db,ssim rows.
  std::string to_csv() const;
};

/// Normalizes both sequences, then scores them.
EvalReport evaluate(const ImageSequence& reference, const ImageSequence& estimate);

}  // namespace pact
