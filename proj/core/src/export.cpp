#include "pact/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <zlib.h>

#include "pact/error.hpp"

namespace pact {

ImageFormat image_format_from_string(const std::string& name) {
  if (name == "pgm") return ImageFormat::pgm;
  if (name == "png") return ImageFormat::png;
  fail(ErrorCode::invalid_argument, "unknown image format '" + name + "' (expected pgm or png)");
}

std::uint8_t to_gray8(double v) {
  require(v >= 0.0 && v <= 1.0, ErrorCode::invalid_argument,
          "export needs intensities normalized to [0, 1]");
  return static_cast<std::uint8_t>(std::floor(255.0 * v + 0.5));
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xffu));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  const std::string body = std::string(type, 4) + data;
  out += body;
  const uLong crc =
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(body.data()),
            static_cast<uInt>(body.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

std::string encode_png(const std::vector<std::uint8_t>& pixels, std::size_t n) {
  std::string raw;
  raw.reserve(n * (n + 1));
  for (std::size_t row = 0; row < n; ++row) {
    raw.push_back('\0');  // filter type: none
    raw.append(reinterpret_cast<const char*>(pixels.data() + row * n), n);
  }
  uLongf size = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(size, '\0');
  require(compress2(reinterpret_cast<Bytef*>(packed.data()), &size,
                    reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                    Z_BEST_COMPRESSION) == Z_OK,
          ErrorCode::internal, "zlib compression failed");
  packed.resize(size);

  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(n));
  put_u32(ihdr, static_cast<std::uint32_t>(n));
  ihdr += std::string("\x08\x00\x00\x00\x00", 5);  // 8-bit grayscale, no interlace

  std::string out = "\x89PNG\r\n\x1a\n";
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", "");
  return out;
}

}  // namespace

std::vector<std::filesystem::path> export_frames(const ImageSequence& seq,
                                                 const std::filesystem::path& dir,
                                                 ImageFormat format) {
  for (double v : seq.values())
    require(v >= 0.0 && v <= 1.0, ErrorCode::invalid_argument,
            "export needs intensities normalized to [0, 1]; normalize the sequence first");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create '" + dir.string() + "'");

  const std::size_t n = seq.n();
  const int width = std::max(3, static_cast<int>(std::to_string(seq.frames() - 1).size()));
  const char* ext = format == ImageFormat::png ? ".png" : ".pgm";
  std::vector<std::filesystem::path> files;
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    std::vector<std::uint8_t> pixels(n * n);
    const auto frame = seq.frame(t);
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_gray8(frame[i]);

    char name[32];
    std::snprintf(name, sizeof name, "frame_%0*zu%s", width, t, ext);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::io, "cannot write '" + path.string() + "'");
    if (format == ImageFormat::png) {
      out << encode_png(pixels, n);
    } else {
      out << "P5\n" << n << ' ' << n << "\n255\n";
      out.write(reinterpret_cast<const char*>(pixels.data()),
                static_cast<std::streamsize>(pixels.size()));
    }
    require(out.good(), ErrorCode::io, "failed writing '" + path.string() + "'");
    files.push_back(path);
  }
  return files;
}

}  // namespace pact
