#include "pact/config.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include "json.hpp"
#include "pact/error.hpp"

namespace pact {

namespace {

using nlohmann::json;

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::config_schema, std::string("config key '") + key + "' has the wrong type");
  }
}

std::size_t count_field(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
          ErrorCode::config_schema,
          std::string("config key '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

std::optional<double> lambda_field(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const json& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  require(v.is_number(), ErrorCode::config_schema,
          std::string("config key '") + key + "' must be a number or \"auto\"");
  return v.get<double>();
}

}  // namespace

TrainConfig train_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::config_schema, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::config_schema, "config must be a JSON object");
  static const std::set<std::string> known = {
      "iterations", "lr_start",      "lr_end",         "lr_schedule",      "lambda_d",
      "lambda_l",   "auto_lambda_d", "auto_lambda_l", "auto_lambda_reference_n",  "adam_beta1",       "adam_beta2",
      "adam_eps",   "seed",          "L",              "sigma",            "hidden",
      "initial_output", "coordinates", "frame_interval",
      "tv_epsilon", "sv_floor",      "precision",      "log_every",        "checkpoint_every",
      "divergence_factor", "divergence_patience"};
  for (const auto& [key, value] : j.items())
    require(known.count(key) > 0, ErrorCode::config_schema, "unknown config key '" + key + "'");

  TrainConfig cfg;
  cfg.iterations = count_field(j, "iterations", cfg.iterations);
  cfg.lr_start = field(j, "lr_start", cfg.lr_start);
  cfg.lr_end = field(j, "lr_end", cfg.lr_end);
  cfg.lr_schedule = field(j, "lr_schedule", cfg.lr_schedule);
  cfg.lambda_d = lambda_field(j, "lambda_d");
  cfg.lambda_l = lambda_field(j, "lambda_l");
  cfg.auto_lambda_d = field(j, "auto_lambda_d", cfg.auto_lambda_d);
  cfg.auto_lambda_l = field(j, "auto_lambda_l", cfg.auto_lambda_l);
  cfg.auto_lambda_reference_n =
      count_field(j, "auto_lambda_reference_n", cfg.auto_lambda_reference_n);
  cfg.adam_beta1 = field(j, "adam_beta1", cfg.adam_beta1);
  cfg.adam_beta2 = field(j, "adam_beta2", cfg.adam_beta2);
  cfg.adam_eps = field(j, "adam_eps", cfg.adam_eps);
  cfg.seed = count_field(j, "seed", cfg.seed);
  cfg.encoding_length = count_field(j, "L", cfg.encoding_length);
  cfg.sigma = field(j, "sigma", cfg.sigma);
  cfg.hidden = field(j, "hidden", cfg.hidden);
  cfg.initial_output = field(j, "initial_output", cfg.initial_output);
  cfg.frame_interval = field(j, "frame_interval", cfg.frame_interval);
  const std::string coordinates = field(j, "coordinates", to_string(cfg.coordinates));
  require(coordinates == "unit" || coordinates == "isotropic", ErrorCode::config_schema,
          "config key 'coordinates' must be \"unit\" or \"isotropic\"");
  cfg.coordinates = coordinate_mode_from_string(coordinates);
  cfg.tv_epsilon = field(j, "tv_epsilon", cfg.tv_epsilon);
  cfg.sv_floor = field(j, "sv_floor", cfg.sv_floor);
  const std::string precision = field(j, "precision", to_string(cfg.precision));
  require(precision == "f32" || precision == "f64", ErrorCode::config_schema,
          "config key 'precision' must be \"f32\" or \"f64\"");
  cfg.precision = precision_from_string(precision);
  cfg.log_every = count_field(j, "log_every", cfg.log_every);
  cfg.checkpoint_every = count_field(j, "checkpoint_every", cfg.checkpoint_every);
  cfg.divergence_factor = field(j, "divergence_factor", cfg.divergence_factor);
  cfg.divergence_patience = count_field(j, "divergence_patience", cfg.divergence_patience);
  try {
    cfg.validate();
  } catch (const Error& e) {
    fail(ErrorCode::config_schema, e.what());
  }
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open config '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return train_config_from_json(text);
}

std::string train_config_to_json(const TrainConfig& cfg) {
  const auto lambda = [](const std::optional<double>& v) -> json {
    return v ? json(*v) : json("auto");
  };
  const json j = {
      {"iterations", cfg.iterations},
      {"lr_start", cfg.lr_start},
      {"lr_end", cfg.lr_end},
      {"lr_schedule", cfg.lr_schedule},
      {"lambda_d", lambda(cfg.lambda_d)},
      {"lambda_l", lambda(cfg.lambda_l)},
      {"auto_lambda_d", cfg.auto_lambda_d},
      {"auto_lambda_l", cfg.auto_lambda_l},
      {"auto_lambda_reference_n", cfg.auto_lambda_reference_n},
      {"adam_beta1", cfg.adam_beta1},
      {"adam_beta2", cfg.adam_beta2},
      {"adam_eps", cfg.adam_eps},
      {"seed", cfg.seed},
      {"L", cfg.encoding_length},
      {"sigma", cfg.sigma},
      {"hidden", cfg.hidden},
      {"initial_output", cfg.initial_output},
      {"frame_interval", cfg.frame_interval},
      {"coordinates", to_string(cfg.coordinates)},
      {"tv_epsilon", cfg.tv_epsilon},
      {"sv_floor", cfg.sv_floor},
      {"precision", to_string(cfg.precision)},
      {"log_every", cfg.log_every},
      {"checkpoint_every", cfg.checkpoint_every},
      {"divergence_factor", cfg.divergence_factor},
      {"divergence_patience", cfg.divergence_patience},
  };
  return j.dump(2) + "\n";
}

}  // namespace pact
