#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "eipl/domain.hpp"

namespace eipl {

/// One JSON document per non-blank line. Throws ParseError naming the
/// offending line.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void append_jsonl(const std::filesystem::path& path, const Json& record);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

std::vector<StudentResponse> read_responses(const std::filesystem::path& path);
std::vector<SoloLabel> read_solo_labels(const std::filesystem::path& path);

/// Rewrites an append-only store keeping only the last record for each
/// key: cache records are keyed by their cache key, grading records by
/// (response_ref, policy), anything else by its full content. Order follows
/// the first appearance of each key. Returns the number of records dropped.
std::size_t compact_jsonl(const std::filesystem::path& path);

}  // namespace eipl
