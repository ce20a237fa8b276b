#include <doctest.h>

#include "eipl/completion_cache.hpp"
#include "eipl/errors.hpp"
#include "eipl/records.hpp"
#include "test_support.hpp"

using namespace eipl;

TEST_CASE("jsonl read, append, write") {
  test::TempDir dir;
  const auto path = dir / "r.jsonl";
  append_jsonl(path, Json{{"a", 1}});
  append_jsonl(path, Json{{"a", 2}});
  auto records = read_jsonl(path);
  REQUIRE(records.size() == 2);
  CHECK(records[1].at("a") == 2);

  write_jsonl(path, {Json{{"b", 1}}});
  records = read_jsonl(path);
  REQUIRE(records.size() == 1);
  CHECK(records[0].at("b") == 1);
  CHECK_FALSE(std::filesystem::exists(dir / "r.jsonl.tmp"));
}

TEST_CASE("blank lines are skipped, bad lines are named") {
  test::TempDir dir;
  test::write_file(dir / "r.jsonl", "{\"a\":1}\n\n   \n{\"a\":\n");
  try {
    read_jsonl(dir / "r.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }
  CHECK_THROWS_AS(read_jsonl(dir / "missing.jsonl"), ParseError);
}

TEST_CASE("responses file") {
  const auto responses = read_responses(test::fixture_path("responses.jsonl"));
  REQUIRE(responses.size() == 7);
  CHECK(responses[1].text == "count strings");
  CHECK(responses[2].attempt == 2);
  CHECK(format_utc(responses[0].timestamp) == "2024-03-04T10:00:00Z");
}

TEST_CASE("solo labels file") {
  test::TempDir dir;
  test::write_file(dir / "labels.jsonl",
                   R"({"rater_id":"r1","response_ref":{"student_id":"s1","question_id":"q","attempt":1},"category":"RE"})"
                   "\n");
  const auto labels = read_solo_labels(dir / "labels.jsonl");
  REQUIRE(labels.size() == 1);
  CHECK(labels[0].category == SoloCategory::RelationalError);
  test::write_file(dir / "bad.jsonl", R"({"rater_id":"r1","category":"RE"})" "\n");
  CHECK_THROWS_AS(read_solo_labels(dir / "bad.jsonl"), ParseError);
}

TEST_CASE("compaction keeps the last record per key in first-seen order") {
  test::TempDir dir;
  const auto path = dir / "store.jsonl";
  const Json ref_a = {{"student_id", "s1"}, {"question_id", "q"}, {"attempt", 1}};
  const Json ref_b = {{"student_id", "s2"}, {"question_id", "q"}, {"attempt", 1}};
  append_jsonl(path, Json{{"response_ref", ref_a}, {"policy", "one-attempt"}, {"partial_score", 0.0}});
  append_jsonl(path, Json{{"response_ref", ref_b}, {"policy", "one-attempt"}, {"partial_score", 0.5}});
  append_jsonl(path, Json{{"response_ref", ref_a}, {"policy", "robustness"}, {"partial_score", 0.2}});
  append_jsonl(path, Json{{"response_ref", ref_a}, {"policy", "one-attempt"}, {"partial_score", 1.0}});
  append_jsonl(path, Json{{"note", "x"}});
  append_jsonl(path, Json{{"note", "x"}});

  CHECK(compact_jsonl(path) == 2);
  const auto kept = read_jsonl(path);
  REQUIRE(kept.size() == 4);
  CHECK(kept[0].at("partial_score") == 1.0);
  CHECK(kept[1].at("response_ref") == ref_b);
  CHECK(kept[2].at("policy") == "robustness");
  CHECK(compact_jsonl(path) == 0);
}

TEST_CASE("compacting a cache file keeps the latest completion") {
  test::TempDir dir;
  const auto path = dir / "cache.jsonl";
  const CacheKey key{"m", std::string(64, 'c'), 0.7, 2, "v1"};
  {
    CompletionCache cache(path);
    cache.put(key, "old");
    cache.put(key, "new");
  }
  CHECK(compact_jsonl(path) == 1);
  CompletionCache reopened(path);
  CHECK(reopened.find(key) == "new");
}
