#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hiermetric/trainer.hpp"

namespace hiermetric {

inline constexpr int kCheckpointFormatVersion = 1;

/// Config, all parameter arrays (row-major), optimizer state and, when
/// present, the AdaCos section. The train report is not part of it.
nlohmann::ordered_json checkpoint_json(const TrainedModel& model);
TrainedModel model_from_checkpoint(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_checkpoint(const std::filesystem::path& path);

/// Writes `contents` to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace hiermetric
