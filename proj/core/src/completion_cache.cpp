#include "eipl/completion_cache.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>

#include "eipl/errors.hpp"
#include "eipl/records.hpp"

namespace eipl {

std::string CacheKey::canonical() const {
  char temp[40];
  std::snprintf(temp, sizeof temp, "%.17g", temperature);
  return model_id + '\x1f' + prompt_hash + '\x1f' + temp + '\x1f' + std::to_string(seed_index) + '\x1f' +
         prompt_version;
}

CompletionCache::CompletionCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  for (const Json& line : read_jsonl(*path_)) {
    auto record = line.get<CacheRecord>();
    entries_[record.key.canonical()] = std::move(record.raw_output);
  }
}

std::optional<std::string> CompletionCache::find(const CacheKey& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key.canonical());
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CompletionCache::put(const CacheKey& key, const std::string& raw_output) {
  std::unique_lock lock(mutex_);
  if (path_) append_jsonl(*path_, Json(CacheRecord{key, raw_output, utc_now()}));
  entries_[key.canonical()] = raw_output;
}

std::size_t CompletionCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void to_json(Json& j, const CacheRecord& value) {
  j = Json{{"model_id", value.key.model_id},
           {"prompt_hash", value.key.prompt_hash},
           {"temperature", value.key.temperature},
           {"seed_index", value.key.seed_index},
           {"prompt_version", value.key.prompt_version},
           {"raw_output", value.raw_output},
           {"created_at", format_utc(value.created_at)}};
}

void from_json(const Json& j, CacheRecord& value) {
  value.key.model_id = j.at("model_id").get<std::string>();
  value.key.prompt_hash = j.at("prompt_hash").get<std::string>();
  value.key.temperature = j.at("temperature").get<double>();
  value.key.seed_index = j.at("seed_index").get<int>();
  value.key.prompt_version = j.value("prompt_version", std::string());
  value.raw_output = j.at("raw_output").get<std::string>();
  value.created_at = j.contains("created_at") ? parse_utc(j.at("created_at").get<std::string>()) : UtcTime{};
}

}  // namespace eipl
