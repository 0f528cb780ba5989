#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pact/sequence.hpp"

namespace pact {

/// On-disk layout:
///   line 1   "PACT-CONTAINER 1"
///   line 2   one-line JSON header (kind, dims, index_order, dtype, endianness,
///            payload_bytes, checksum, geometry or grid, frame_times)
///   payload  float32 samples in the header's endianness and index order
/// Values are stored as float32, so data that is already float-representable
/// round-trips bit-exactly.
enum class ContainerKind { sinogram, image_sequence };

std::string to_string(ContainerKind kind);

void write_container(const std::filesystem::path& path, const Sinogram& sino);
void write_container(const std::filesystem::path& path, const ImageSequence& seq);

Sinogram read_sinogram(const std::filesystem::path& path);
ImageSequence read_image_sequence(const std::filesystem::path& path);

/// Kind recorded in the header, without reading the payload.
ContainerKind peek_container_kind(const std::filesystem::path& path);

/// CRC-32 of a whole file as 8 hex digits.
std::string file_crc32(const std::filesystem::path& path);

/// Rounds every value to float32, as a write/read cycle would.
void quantize_to_float(std::vector<double>& values);

}  // namespace pact
