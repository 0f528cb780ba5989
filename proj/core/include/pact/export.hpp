#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pact/sequence.hpp"

namespace pact {

enum class ImageFormat { pgm, png };

ImageFormat image_format_from_string(const std::string& name);

/// round(255 * v) with halves rounded up; v must lie in [0, 1].
std::uint8_t to_gray8(double v);

/// One 8-bit grayscale file per frame, named frame_000, frame_001, ...
/// The input must already be normalized to [0, 1].
std::vector<std::filesystem::path> export_frames(const ImageSequence& seq,
                                                 const std::filesystem::path& dir,
                                                 ImageFormat format);

}  // namespace pact
