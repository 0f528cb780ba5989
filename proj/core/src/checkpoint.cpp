#include "pact/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "json.hpp"
#include "pact/error.hpp"

namespace pact {

namespace {

using nlohmann::json;

std::string crc_of(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  char text[9];
  std::snprintf(text, sizeof text, "%08lx", static_cast<unsigned long>(crc));
  return text;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  ckpt.model.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::io, "cannot create checkpoint directory '" + dir.string() + "'");

  const auto& params = ckpt.model.params;
  std::string blob(params.size() * 8, '\0');
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(params[i]);
    for (int k = 0; k < 8; ++k) blob[8 * i + k] = static_cast<char>((bits >> (8 * k)) & 0xffu);
  }

  const auto& enc = ckpt.model.encoder;
  json manifest = {
      {"format", "pact-checkpoint"},
      {"format_version", 1},
      {"seed", enc.seed},
      {"L", enc.length()},
      {"sigma", enc.sigma},
      {"b_digest", enc.digest()},
      {"layer_dims", ckpt.model.layer_dims},
      {"parameter_count", params.size()},
      {"iteration", ckpt.iteration},
      {"precision", to_string(ckpt.precision)},
      {"weights_file", "weights.bin"},
      {"weights_dtype", "float64"},
      {"weights_endianness", "little"},
      {"weights_crc32", crc_of(blob)},
      {"grid",
       {{"n", ckpt.grid.n},
        {"pitch", ckpt.grid.pitch},
        {"origin", json::array({ckpt.grid.origin.x, ckpt.grid.origin.y})}}},
      {"trained_frame_times", ckpt.trained_frame_times},
      {"coordinate_scale", {{"space", ckpt.model.scale.space}, {"time", ckpt.model.scale.time}}},
  };

  std::ofstream weights(dir / "weights.bin", std::ios::binary | std::ios::trunc);
  weights.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  require(weights.good(), ErrorCode::io, "failed writing checkpoint weights");
  std::ofstream meta(dir / "manifest.json", std::ios::trunc);
  meta << manifest.dump(2) << '\n';
  require(meta.good(), ErrorCode::io, "failed writing checkpoint manifest");
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    fail(ErrorCode::io, "malformed checkpoint manifest in '" + dir.string() + "': " + e.what());
  }
  try {
    require(manifest.at("format") == "pact-checkpoint", ErrorCode::kind_mismatch,
            "'" + dir.string() + "' is not a checkpoint");
    const auto dims = manifest.at("layer_dims").get<std::vector<std::size_t>>();
    require(dims.size() >= 2, ErrorCode::config_schema, "checkpoint layer_dims too short");
    const std::vector<std::size_t> hidden(dims.begin() + 1, dims.end() - 1);

    Checkpoint ckpt;
    ckpt.model = init_model(manifest.at("seed").get<std::uint64_t>(),
                            manifest.at("L").get<std::size_t>(),
                            manifest.at("sigma").get<double>(), hidden);
    require(ckpt.model.layer_dims == dims, ErrorCode::config_schema,
            "checkpoint layer_dims are inconsistent with L");
    require(ckpt.model.encoder.digest() == manifest.at("b_digest"), ErrorCode::checksum_mismatch,
            "rebuilt Fourier matrix does not match the checkpoint digest");

    const std::string blob =
        read_file(dir / manifest.value("weights_file", std::string("weights.bin")));
    const std::size_t count = ckpt.model.params.size();
    require(manifest.at("parameter_count").get<std::size_t>() == count,
            ErrorCode::container_dimensions, "checkpoint parameter count mismatch");
    require(blob.size() >= 8 * count, ErrorCode::truncated_payload,
            "checkpoint weights truncated");
    require(blob.size() == 8 * count, ErrorCode::container_dimensions,
            "checkpoint weights file has unexpected trailing bytes");
    require(crc_of(blob) == manifest.at("weights_crc32"), ErrorCode::checksum_mismatch,
            "checkpoint weights checksum mismatch");
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits = 0;
      for (int k = 0; k < 8; ++k)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(blob[8 * i + k])) << (8 * k);
      ckpt.model.params[i] = std::bit_cast<double>(bits);
    }
    ckpt.model.validate();

    ckpt.iteration = manifest.at("iteration");
    ckpt.precision = precision_from_string(manifest.at("precision"));
    const json& g = manifest.at("grid");
    ckpt.grid = ImageGrid{g.at("n").get<std::size_t>(), g.at("pitch").get<double>(),
                          {g.at("origin").at(0).get<double>(), g.at("origin").at(1).get<double>()}};
    ckpt.grid.validate();
    ckpt.trained_frame_times = manifest.at("trained_frame_times").get<std::vector<double>>();
    const json& scale = manifest.at("coordinate_scale");
    ckpt.model.scale = {scale.at("space").get<double>(), scale.at("time").get<double>()};
    require(ckpt.model.scale.space > 0.0 && ckpt.model.scale.time >= 0.0,
            ErrorCode::config_schema, "checkpoint coordinate_scale out of range");
    return ckpt;
  } catch (const json::exception& e) {
    fail(ErrorCode::config_schema,
         "invalid checkpoint manifest in '" + dir.string() + "': " + e.what());
  }
}

}  // namespace pact
