#include "eipl/records.hpp"

#include <fstream>
#include <map>

#include "eipl/completion_cache.hpp"
#include "eipl/errors.hpp"

namespace eipl {

namespace {

std::string compaction_key(const Json& record) {
  if (record.contains("prompt_hash") && record.contains("raw_output")) {
    return "cache:" + record.get<CacheRecord>().key.canonical();
  }
  if (record.contains("response_ref") && record.contains("policy")) {
    return "grade:" + record.at("response_ref").dump() + record.at("policy").dump();
  }
  return "line:" + record.dump();
}

}  // namespace

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<Json> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json doc = Json::parse(line, nullptr, false);
    if (doc.is_discarded()) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    records.push_back(std::move(doc));
  }
  return records;
}

void append_jsonl(const std::filesystem::path& path, const Json& record) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot append to " + path.string());
  out << record.dump() << '\n';
  out.flush();
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    for (const Json& r : records) out << r.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::vector<StudentResponse> read_responses(const std::filesystem::path& path) {
  std::vector<StudentResponse> responses;
  int line = 0;
  for (const Json& doc : read_jsonl(path)) {
    ++line;
    try {
      responses.push_back(doc.get<StudentResponse>());
    } catch (const Json::exception& e) {
      throw ParseError(path.string() + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return responses;
}

std::vector<SoloLabel> read_solo_labels(const std::filesystem::path& path) {
  std::vector<SoloLabel> labels;
  int line = 0;
  for (const Json& doc : read_jsonl(path)) {
    ++line;
    try {
      labels.push_back(doc.get<SoloLabel>());
    } catch (const Json::exception& e) {
      throw ParseError(path.string() + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return labels;
}

std::size_t compact_jsonl(const std::filesystem::path& path) {
  const auto records = read_jsonl(path);
  std::map<std::string, std::size_t> slot;
  std::vector<Json> kept;
  for (const Json& r : records) {
    const std::string key = compaction_key(r);
    if (auto it = slot.find(key); it != slot.end()) {
      kept[it->second] = r;
    } else {
      slot.emplace(key, kept.size());
      kept.push_back(r);
    }
  }
  write_jsonl(path, kept);
  return records.size() - kept.size();
}

}  // namespace eipl
