#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

#include "eipl/domain.hpp"

namespace eipl {

struct CacheKey {
  std::string model_id;
  std::string prompt_hash;
  double temperature = 0.0;
  int seed_index = 0;
  std::string prompt_version;

  /// Canonical single-string form used for lookup.
  std::string canonical() const;

  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheRecord {
  CacheKey key;
  std::string raw_output;
  UtcTime created_at{};
};

/// Completion store. Backed by an append-only JSONL file when constructed
/// with a path; purely in memory otherwise. Lookups may run concurrently;
/// writes are serialized.
class CompletionCache {
 public:
  CompletionCache() = default;
  /// Loads every record in `path` (later records win) and appends new ones
  /// to it. A missing file is created on first write. Throws ParseError on a
  /// malformed line.
  explicit CompletionCache(std::filesystem::path path);

  CompletionCache(const CompletionCache&) = delete;
  CompletionCache& operator=(const CompletionCache&) = delete;

  std::optional<std::string> find(const CacheKey& key) const;
  void put(const CacheKey& key, const std::string& raw_output);
  std::size_t size() const;

  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::string> entries_;
};

void to_json(Json& j, const CacheRecord& value);
void from_json(const Json& j, CacheRecord& value);

}  // namespace eipl
