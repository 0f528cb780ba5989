#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pact/trainer.hpp"

namespace pact {

/// Training configuration as JSON. Every key is optional; unknown keys and
/// wrong types raise ErrorCode::config_schema. lambda_d / lambda_l accept a
/// number or "auto". See docs/schema/train_config.schema.json.
TrainConfig train_config_from_json(std::string_view text);
TrainConfig load_train_config(const std::filesystem::path& path);

/// Every field, with `lambda_d` / `lambda_l` as given (number or "auto").
std::string train_config_to_json(const TrainConfig& cfg);

}  // namespace pact
