#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "reptrack/pipeline.hpp"

namespace reptrack {

/// Every tunable of a run. `threads` of 0 means one worker per logical core.
struct RunConfig {
  PipelineConfig pipeline = [] {
    PipelineConfig p;
    p.threads = 0;
    return p;
  }();
  std::size_t folds = 5;
  bool stratified = false;
};

/// Malformed configuration text or an unknown key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Sets one key; throws ConfigError on an unknown key or unparsable value.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// All recognised keys, in the order format_config writes them.
const std::vector<std::string>& config_keys();

/// Lines of "key = value"; '#' starts a comment. Later lines override earlier ones.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Every key with its current value; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& cfg);

}  // namespace reptrack
