#include "pact/container.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <zlib.h>

#include "json.hpp"
#include "pact/error.hpp"

namespace pact {

namespace {

using nlohmann::json;

constexpr const char* magic = "PACT-CONTAINER 1";

std::string crc_hex(uLong crc) {
  char text[9];
  std::snprintf(text, sizeof text, "%08lx", static_cast<unsigned long>(crc));
  return text;
}

std::string payload_crc(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return crc_hex(crc);
}

std::string encode_payload(std::span<const double> values) {
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int k = 0; k < 4; ++k) bytes[4 * i + k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
  }
  return bytes;
}

std::vector<double> decode_payload(const std::string& bytes, bool big_endian) {
  std::vector<double> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) {
      const int shift = big_endian ? 8 * (3 - k) : 8 * k;
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + k])) << shift;
    }
    values[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return values;
}

// Ordered [name, size] pairs; a JSON object would not keep the order.
json dims(std::initializer_list<std::pair<const char*, std::size_t>> entries) {
  json out = json::array();
  for (const auto& [name, size] : entries) out.push_back(json::array({name, size}));
  return out;
}

json point(Point2 p) { return json::array({p.x, p.y}); }

Point2 to_point(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

void write_file(const std::filesystem::path& path, json header, std::span<const double> values) {
  const std::string payload = encode_payload(values);
  header["dtype"] = "float32";
  header["endianness"] = "little";
  header["payload_bytes"] = payload.size();
  header["checksum"] = {{"algorithm", "crc32"}, {"value", payload_crc(payload)}};
  header["format_version"] = 1;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << magic << '\n' << header.dump() << '\n';
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  require(out.good(), ErrorCode::io, "failed writing '" + path.string() + "'");
}

struct Loaded {
  json header;
  std::vector<double> values;
};

std::pair<json, std::string> read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  require(line == magic, ErrorCode::io, "'" + path.string() + "' is not a PACT container");
  std::string header_text;
  require(static_cast<bool>(std::getline(in, header_text)), ErrorCode::truncated_payload,
          "'" + path.string() + "' ends before the header");
  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::io, "malformed container header in '" + path.string() + "': " + e.what());
  }
  std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return {std::move(header), std::move(payload)};
}

ContainerKind kind_of(const json& header, const std::filesystem::path& path) {
  const std::string kind = header.value("kind", "");
  if (kind == "sinogram") return ContainerKind::sinogram;
  if (kind == "image_sequence") return ContainerKind::image_sequence;
  fail(ErrorCode::io, "unknown container kind '" + kind + "' in '" + path.string() + "'");
}

Loaded load(const std::filesystem::path& path, ContainerKind expected) {
  auto [header, payload] = read_raw(path);
  try {
    const ContainerKind kind = kind_of(header, path);
    require(kind == expected, ErrorCode::kind_mismatch,
            "'" + path.string() + "' holds kind " + to_string(kind) + ", expected " +
                to_string(expected));
    require(header.at("dtype") == "float32", ErrorCode::io, "unsupported dtype");
    const std::string endian = header.at("endianness");
    require(endian == "little" || endian == "big", ErrorCode::io,
            "unknown endianness tag '" + endian + "'");

    std::size_t count = 1;
    for (const auto& d : header.at("dims")) count *= d.at(1).get<std::size_t>();
    const auto declared = header.at("payload_bytes").get<std::size_t>();
    require(declared == 4 * count, ErrorCode::container_dimensions,
            "header dimensions imply " + std::to_string(4 * count) + " payload bytes but " +
                std::to_string(declared) + " are declared");
    require(payload.size() >= declared, ErrorCode::truncated_payload,
            "payload truncated: " + std::to_string(payload.size()) + " of " +
                std::to_string(declared) + " bytes present");
    require(payload.size() == declared, ErrorCode::container_dimensions,
            std::to_string(payload.size() - declared) + " unexpected bytes after the payload");
    const std::string expected_crc = header.at("checksum").at("value");
    require(payload_crc(payload) == expected_crc, ErrorCode::checksum_mismatch,
            "payload checksum mismatch in '" + path.string() + "'");
    return {std::move(header), decode_payload(payload, endian == "big")};
  } catch (const json::exception& e) {
    fail(ErrorCode::io, "invalid container header in '" + path.string() + "': " + e.what());
  }
}

std::size_t dim(const json& header, std::size_t index, const char* name) {
  const auto& d = header.at("dims").at(index);
  require(d.at(0) == name, ErrorCode::container_dimensions,
          std::string("container dimension ") + std::to_string(index) + " should be '" + name +
              "'");
  return d.at(1).get<std::size_t>();
}

}  // namespace

std::string to_string(ContainerKind kind) {
  return kind == ContainerKind::sinogram ? "sinogram" : "image_sequence";
}

void write_container(const std::filesystem::path& path, const Sinogram& sino) {
  sino.validate();
  const SensorGeometry& g = sino.geometry();
  json positions = json::array();
  for (const Point2& p : g.positions) positions.push_back(point(p));
  json header = {
      {"kind", "sinogram"},
      {"dims", dims({{"frames", sino.frames()}, {"sensors", sino.sensors()}, {"samples", sino.samples()}})},
      {"index_order", "frame-major, then sensor, then sample"},
      {"signal", sino.signal() == SignalKind::pressure ? "pressure" : "circular_mean"},
      {"geometry",
       {{"radius", g.radius},
        {"center", point(g.center)},
        {"sound_speed", g.sound_speed},
        {"sample_rate", g.sample_rate},
        {"num_samples", g.num_samples},
        {"t_start", g.t_start},
        {"positions", positions}}},
      {"frame_times", sino.frame_times()},
  };
  write_file(path, std::move(header), sino.data());
}

void write_container(const std::filesystem::path& path, const ImageSequence& seq) {
  seq.validate();
  const ImageGrid& grid = seq.grid();
  json header = {
      {"kind", "image_sequence"},
      {"dims", dims({{"frames", seq.frames()}, {"rows", grid.n}, {"columns", grid.n}})},
      {"index_order", "frame-major, then row, then column"},
      {"grid", {{"n", grid.n}, {"pitch", grid.pitch}, {"origin", point(grid.origin)}}},
      {"frame_times", seq.frame_times()},
  };
  write_file(path, std::move(header), seq.data());
}

Sinogram read_sinogram(const std::filesystem::path& path) {
  Loaded loaded = load(path, ContainerKind::sinogram);
  const json& h = loaded.header;
  try {
    const std::size_t frames = dim(h, 0, "frames");
    const std::size_t sensors = dim(h, 1, "sensors");
    const std::size_t samples = dim(h, 2, "samples");
    const json& g = h.at("geometry");
    SensorGeometry geom;
    geom.radius = g.at("radius");
    geom.center = to_point(g.at("center"));
    geom.sound_speed = g.at("sound_speed");
    geom.sample_rate = g.at("sample_rate");
    geom.num_samples = g.at("num_samples");
    geom.t_start = g.at("t_start");
    for (const auto& p : g.at("positions")) geom.positions.push_back(to_point(p));
    auto times = h.at("frame_times").get<std::vector<double>>();
    require(geom.positions.size() == sensors && geom.num_samples == samples &&
                times.size() == frames,
            ErrorCode::container_dimensions, "sinogram geometry disagrees with its dimensions");
    geom.validate();
    Sinogram sino(std::move(geom), std::move(times), std::move(loaded.values));
    const std::string signal = h.value("signal", "pressure");
    require(signal == "pressure" || signal == "circular_mean", ErrorCode::io,
            "unknown signal kind '" + signal + "'");
    sino.set_signal(signal == "pressure" ? SignalKind::pressure : SignalKind::circular_mean);
    return sino;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io, "invalid sinogram header in '" + path.string() + "': " + e.what());
  }
}

ImageSequence read_image_sequence(const std::filesystem::path& path) {
  Loaded loaded = load(path, ContainerKind::image_sequence);
  const json& h = loaded.header;
  try {
    const std::size_t frames = dim(h, 0, "frames");
    const std::size_t rows = dim(h, 1, "rows");
    const std::size_t cols = dim(h, 2, "columns");
    const json& g = h.at("grid");
    ImageGrid grid{g.at("n").get<std::size_t>(), g.at("pitch").get<double>(),
                   to_point(g.at("origin"))};
    auto times = h.at("frame_times").get<std::vector<double>>();
    require(rows == grid.n && cols == grid.n && times.size() == frames,
            ErrorCode::container_dimensions, "image grid disagrees with its dimensions");
    grid.validate();
    return ImageSequence(grid, std::move(times), std::move(loaded.values));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io, "invalid image header in '" + path.string() + "': " + e.what());
  }
}

ContainerKind peek_container_kind(const std::filesystem::path& path) {
  return kind_of(read_raw(path).first, path);
}

std::string file_crc32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return payload_crc(bytes);
}

void quantize_to_float(std::vector<double>& values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace pact
