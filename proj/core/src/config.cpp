#include "eipl/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "eipl/errors.hpp"

namespace eipl {

void EngineConfig::check() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgumentError("config: " + what);
  };
  require(!model_id.empty(), "model_id must be nonempty");
  require(std::isfinite(temperature_one_attempt) && temperature_one_attempt >= 0,
          "temperature_one_attempt must be finite and >= 0");
  require(std::isfinite(temperature_robustness) && temperature_robustness >= 0,
          "temperature_robustness must be finite and >= 0");
  require(n_variants >= 1, "n_variants must be >= 1");
  require(word_limit >= 1, "word_limit must be >= 1");
  require(max_attempts >= 1, "max_attempts must be >= 1");
  require(worker_limit >= 1, "worker_limit must be >= 1");
  require(retry_budget >= 1, "retry_budget must be >= 1");
}

GradingSettings EngineConfig::grading_settings() const {
  GradingSettings s;
  s.model_id = model_id;
  s.temperature_one_attempt = temperature_one_attempt;
  s.temperature_robustness = temperature_robustness;
  s.n_variants = n_variants;
  s.word_limit = word_limit;
  s.max_attempts = max_attempts;
  s.generation.retry.max_attempts = retry_budget;
  return s;
}

void apply_config_document(EngineConfig& config, const Json& doc) {
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "model_id") config.model_id = value.get<std::string>();
      else if (key == "base_url") config.base_url = value.get<std::string>();
      else if (key == "temperature_one_attempt") config.temperature_one_attempt = value.get<double>();
      else if (key == "temperature_robustness") config.temperature_robustness = value.get<double>();
      else if (key == "n_variants") config.n_variants = value.get<int>();
      else if (key == "word_limit") config.word_limit = value.get<int>();
      else if (key == "max_attempts") config.max_attempts = value.get<int>();
      else if (key == "worker_limit") config.worker_limit = value.get<int>();
      else if (key == "retry_budget") config.retry_budget = value.get<int>();
      else if (key == "cache_path") config.cache_path = value.get<std::string>();
      else if (key == "bank_path") config.bank_path = value.get<std::string>();
      else if (key == "runner_command") config.runner_command = value.get<std::string>();
      else throw ParseError("unknown config key '" + key + "'");
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

void apply_config_file(EngineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  const Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError("config file " + path.string() + " is not valid JSON");
  apply_config_document(config, doc);
}

void apply_environment(EngineConfig& config, const EnvLookup& env) {
  auto as_int = [](const std::string& name, const std::string& text) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(name + " must be an integer, got '" + text + "'");
  };
  if (auto v = env("EIPL_MODEL_ID")) config.model_id = *v;
  if (auto v = env("EIPL_BASE_URL")) config.base_url = *v;
  if (auto v = env("EIPL_CACHE_PATH")) config.cache_path = *v;
  if (auto v = env("EIPL_BANK_PATH")) config.bank_path = *v;
  if (auto v = env("EIPL_RUNNER")) config.runner_command = *v;
  if (auto v = env("EIPL_N_VARIANTS")) config.n_variants = as_int("EIPL_N_VARIANTS", *v);
  if (auto v = env("EIPL_WORKER_LIMIT")) config.worker_limit = as_int("EIPL_WORKER_LIMIT", *v);
}

EngineConfig load_engine_config(const std::optional<std::filesystem::path>& config_path, const EnvLookup& env) {
  EngineConfig config;
  if (config_path) {
    apply_config_file(config, *config_path);
  } else if (auto from_env = env("EIPL_CONFIG")) {
    apply_config_file(config, *from_env);
  }
  apply_environment(config, env);
  return config;
}

std::optional<std::string> process_env(const char* name) {
  const char* value = std::getenv(name);
  if (!value) return std::nullopt;
  return std::string(value);
}

Json to_json_document(const EngineConfig& c) {
  return Json{{"model_id", c.model_id},
              {"base_url", c.base_url},
              {"temperature_one_attempt", c.temperature_one_attempt},
              {"temperature_robustness", c.temperature_robustness},
              {"n_variants", c.n_variants},
              {"word_limit", c.word_limit},
              {"max_attempts", c.max_attempts},
              {"worker_limit", c.worker_limit},
              {"retry_budget", c.retry_budget},
              {"cache_path", c.cache_path},
              {"bank_path", c.bank_path},
              {"runner_command", c.runner_command}};
}

}  // namespace eipl
