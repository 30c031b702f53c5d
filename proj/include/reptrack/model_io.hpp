#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "reptrack/pipeline.hpp"

namespace reptrack {

inline constexpr int kModelFormatVersion = 1;

/// 64-bit FNV-1a hash; the model file's integrity checksum.
std::uint64_t fnv1a64(std::string_view bytes);

/// Model file layout: a "reptrack-model <version>" line, a "checksum <hex>"
/// line covering every following byte, then the pipeline body as plain text.
std::string serialize_model(const PipelineModel& model);

/// Throws ModelFileError: kUnsupportedVersion for any version other than
/// kModelFormatVersion, kCorrupt for a checksum mismatch or malformed body.
PipelineModel deserialize_model(std::string_view bytes);

/// File wrappers; I/O failures throw ModelFileError(kIo).
void save_model(const PipelineModel& model, const std::filesystem::path& path);
PipelineModel load_model(const std::filesystem::path& path);

}  // namespace reptrack
