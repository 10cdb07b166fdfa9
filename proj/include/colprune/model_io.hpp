#pragma once

#include <filesystem>

#include "colprune/model.hpp"
#include "colprune/pipeline.hpp"

namespace colprune {

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kModelFormat = "colprune-model";
inline constexpr int kModelFormatVersion = 1;

// A model is a directory holding manifest.json plus one tensor file per
// weight and bias (see README for the field list). Existing tensor files in
// the directory are overwritten.
void save_model(const std::filesystem::path& dir, const ModelSpec& model);
ModelSpec load_model(const std::filesystem::path& dir);

// JSON array of records with keys layer, ratio, kept, residual_before,
// residual_after, variant, seconds.
std::string report_json(const RunReport& report);
void write_report(const std::filesystem::path& path, const RunReport& report);

}  // namespace colprune
