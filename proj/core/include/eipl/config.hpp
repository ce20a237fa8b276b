#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "eipl/domain.hpp"
#include "eipl/grading.hpp"

namespace eipl {

struct EngineConfig {
  std::string model_id = "gpt-4o";
  std::string base_url = "https://api.openai.com/v1";
  double temperature_one_attempt = 0.0;
  double temperature_robustness = 0.7;
  int n_variants = 5;
  int word_limit = 10;
  int max_attempts = 3;
  int worker_limit = 4;
  int retry_budget = 3;
  std::string cache_path = ".eipl/cache.jsonl";
  std::string bank_path;  // empty: the shipped bank
  /// Runner command line for the subprocess backend; empty means none.
  std::string runner_command;

  /// Throws InvalidArgumentError when a value is out of its domain.
  void check() const;

  GradingSettings grading_settings() const;
};

/// Overlays keys present in `doc` (same names as the struct fields). Unknown
/// keys raise ParseError.
void apply_config_document(EngineConfig& config, const Json& doc);
void apply_config_file(EngineConfig& config, const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Overlays EIPL_MODEL_ID, EIPL_BASE_URL, EIPL_CACHE_PATH, EIPL_BANK_PATH,
/// EIPL_RUNNER, EIPL_N_VARIANTS, EIPL_WORKER_LIMIT.
void apply_environment(EngineConfig& config, const EnvLookup& env);

/// defaults < config file (EIPL_CONFIG or `config_path`) < environment.
/// Command-line flags are applied by the caller afterwards.
EngineConfig load_engine_config(const std::optional<std::filesystem::path>& config_path, const EnvLookup& env);

/// std::getenv wrapper.
std::optional<std::string> process_env(const char* name);

Json to_json_document(const EngineConfig& config);

}  // namespace eipl
