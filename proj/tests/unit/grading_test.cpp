#include <doctest.h>

#include <map>

#include "eipl/bank.hpp"
#include "eipl/completion_cache.hpp"
#include "eipl/errors.hpp"
#include "eipl/grading.hpp"
#include "eipl/hashing.hpp"
#include "eipl/mock_fixture.hpp"
#include "test_support.hpp"

using namespace eipl;

namespace {

const QuestionBank& bank() {
  static const QuestionBank b = load_bank(default_bank_path());
  return b;
}

// Four-case question so partial scores come out as quarters.
Question quarter_question() {
  Question q;
  q.id = "quarters";
  q.title = "Quarters";
  q.code = "def foo(x):\n    return x\n";
  q.params = {{"x", "int"}};
  for (int i = 0; i < 4; ++i) {
    TestCase c;
    c.inputs = {i};
    c.expected_return = i;
    q.test_suite.push_back(c);
  }
  q.reference_solution = q.code;
  return q;
}

std::string fenced(const std::string& code) { return "```python\n" + code + "\n```"; }

// Scripted completions plus stub results: every name maps to variants given
// as the number of passing cases (out of `cases`), or -1 for prose.
struct Offline {
  Offline(const std::map<std::string, std::vector<int>>& plan, std::size_t cases) {
    ScriptedClient::Script script;
    StubBackend::Script results;
    for (const auto& [name, variants] : plan) {
      for (std::size_t v = 0; v < variants.size(); ++v) {
        if (variants[v] < 0) {
          script[name].push_back("I cannot write that function.");
          continue;
        }
        const std::string code = "def " + name + "(x):\n    return " + std::to_string(v);
        script[name].push_back(fenced(code));
        std::vector<CaseResult> rs;
        for (std::size_t i = 0; i < cases; ++i) {
          rs.push_back({static_cast<int>(i),
                        static_cast<int>(i) < variants[v] ? CaseStatus::Pass : CaseStatus::WrongReturn, "0"});
        }
        results[sha256_hex(code)] = SuiteResult::from_cases(rs);
      }
    }
    client = std::make_unique<ScriptedClient>(script);
    backend = std::make_unique<StubBackend>(results);
  }

  GradingContext context() { return GradingContext{*client, *backend, &cache, GradingSettings{}}; }

  std::unique_ptr<ScriptedClient> client;
  std::unique_ptr<StubBackend> backend;
  CompletionCache cache;
};

StudentResponse response(const std::string& text, int attempt = 1, const std::string& question = "quarters") {
  return {"s1", question, attempt, text, UtcTime{}};
}

}  // namespace

TEST_CASE("one attempt: reference solution is correct") {
  const Question& q = *bank().find("count_odd_nums_in_list");
  StubBackend backend({});
  backend.add(extract_code(fenced(q.reference_solution), "foo"), SuiteResult::uniform(6, CaseStatus::Pass));
  // The reference solution defines foo, so the submitted name is foo.
  ScriptedClient foo_client({{"foo", {fenced(q.reference_solution)}}});
  GradingContext ctx{foo_client, backend, nullptr, GradingSettings{}};
  const GradingOutcome outcome = grade_one_attempt(response("foo", 1, q.id), q, ctx);
  CHECK(outcome.correct);
  CHECK(outcome.partial_score == 1.0);
  CHECK(outcome.variants.size() == 1);
  CHECK(outcome.temperature == 0.0);
  CHECK(outcome.prompt_version == "function_redefinition_v1");
  CHECK(outcome.feedback.shown_code.find("def foo") != std::string::npos);
}

TEST_CASE("one attempt: partial credit and no code") {
  const Question q = quarter_question();
  Offline offline({{"half_right", {2}}, {"prose_only", {-1}}}, 4);
  auto ctx = offline.context();

  const GradingOutcome half = grade_one_attempt(response("half_right"), q, ctx);
  CHECK_FALSE(half.correct);
  CHECK(half.partial_score == 0.5);
  REQUIRE(half.feedback.case_summaries.size() == 4);
  CHECK(half.feedback.case_summaries[3].status == CaseStatus::WrongReturn);
  CHECK(half.feedback.message.find("2 of 4") != std::string::npos);

  const GradingOutcome prose = grade_one_attempt(response("prose_only"), q, ctx);
  CHECK_FALSE(prose.correct);
  CHECK(prose.partial_score == 0.0);
  CHECK(prose.feedback.message.find("No runnable code") != std::string::npos);
  CHECK(prose.feedback.shown_code.empty());
}

TEST_CASE("robustness examples") {
  const Question q = quarter_question();
  Offline offline({{"all_five", {4}}, {"three_of_five", {4, 4, 1, 4, 3}}, {"none", {0, 1, 2, 3, -1}}}, 4);
  auto ctx = offline.context();

  const GradingOutcome all = grade_robustness(response("all_five"), q, ctx);
  CHECK(all.correct);
  CHECK(all.partial_score == 1.0);
  CHECK(all.variants.size() == 5);
  CHECK(all.temperature == 0.7);

  const GradingOutcome three = grade_robustness(response("three_of_five"), q, ctx);
  CHECK_FALSE(three.correct);
  CHECK(three.partial_score == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(grade_one_attempt(response("three_of_five"), q, ctx).correct);

  const GradingOutcome none = grade_robustness(response("none"), q, ctx);
  CHECK_FALSE(none.correct);
  CHECK(none.partial_score == 0.0);
  CHECK(none.feedback.message.find("1 produced no runnable code") != std::string::npos);
}

TEST_CASE("variant count follows settings") {
  const Question q = quarter_question();
  Offline offline({{"f", {4}}}, 4);
  auto ctx = offline.context();
  ctx.settings.n_variants = 3;
  CHECK(grade_robustness(response("f"), q, ctx).variants.size() == 3);
  CHECK(grade(GradingPolicy::OneAttempt, response("f"), q, ctx).variants.size() == 1);
}

TEST_CASE("invalid responses are not graded") {
  const Question q = quarter_question();
  Offline offline({}, 4);
  auto ctx = offline.context();
  CHECK_THROWS_AS(grade_one_attempt(response("count odd"), q, ctx), InvalidArgumentError);
  CHECK_THROWS_AS(grade_robustness(response("while"), q, ctx), InvalidArgumentError);
  CHECK(offline.client->calls() == 0);
}

TEST_CASE("feedback never carries the reference solution") {
  Question q = quarter_question();
  q.reference_solution = "def foo(x):\n    return x  # secret reference";
  Offline offline({{"f", {1}}, {"g", {-1}}}, 4);
  auto ctx = offline.context();
  for (const char* name : {"f", "g"}) {
    for (GradingPolicy p : {GradingPolicy::OneAttempt, GradingPolicy::Robustness}) {
      const GradingOutcome o = grade(p, response(name), q, ctx);
      CHECK(o.feedback.shown_code.find("secret reference") == std::string::npos);
      CHECK(o.feedback.message.find("secret reference") == std::string::npos);
    }
  }
}

TEST_CASE("attempts: stop after a correct outcome, keep the best score") {
  const Question q = quarter_question();
  Offline offline({{"half", {2}}, {"full", {4}}, {"quarter", {1}}, {"zero", {0}}, {"never_run", {4}}}, 4);
  auto ctx = offline.context();

  auto r = grade_with_attempts({response("half", 1), response("full", 2), response("never_run", 3)}, q,
                               GradingPolicy::OneAttempt, ctx);
  CHECK(r.final_score == 1.0);
  CHECK(r.outcomes.size() == 2);

  r = grade_with_attempts({response("count odd", 1), response("quarter", 2)}, q, GradingPolicy::OneAttempt, ctx);
  CHECK(r.final_score == 0.25);
  CHECK(r.outcomes.size() == 1);
  CHECK(r.invalid_submissions == 1);

  r = grade_with_attempts({response("half", 1), response("quarter", 2), response("zero", 3)}, q,
                          GradingPolicy::OneAttempt, ctx);
  CHECK(r.final_score == 0.5);
  CHECK(r.outcomes.size() == 3);
}

TEST_CASE("attempts: limits and invariants") {
  const Question q = quarter_question();
  Offline offline({{"zero", {0}}}, 4);
  auto ctx = offline.context();
  CHECK_THROWS_AS(grade_with_attempts({response("zero", 1), response("zero", 2), response("zero", 3),
                                       response("zero", 4)},
                                      q, GradingPolicy::OneAttempt, ctx),
                  AttemptLimitExceeded);
  // Invalid submissions do not count toward the limit.
  CHECK_NOTHROW(grade_with_attempts({response("for", 1), response("zero", 2), response("zero", 3),
                                     response("zero", 4)},
                                    q, GradingPolicy::OneAttempt, ctx));
  StudentResponse other = response("zero", 2);
  other.student_id = "s2";
  CHECK_THROWS_AS(grade_with_attempts({response("zero", 1), other}, q, GradingPolicy::OneAttempt, ctx),
                  InvalidArgumentError);
}

TEST_CASE("property: correct implies full score; score monotone in passing variants") {
  const Question q = quarter_question();
  std::map<std::string, std::vector<int>> plan;
  for (int passing = 0; passing <= 5; ++passing) {
    std::vector<int> v(5, 2);
    for (int i = 0; i < passing; ++i) v[i] = 4;
    plan["p" + std::to_string(passing)] = v;
  }
  Offline offline(plan, 4);
  auto ctx = offline.context();
  double previous = -1.0;
  for (int passing = 0; passing <= 5; ++passing) {
    const GradingOutcome o = grade_robustness(response("p" + std::to_string(passing)), q, ctx);
    CHECK(o.partial_score >= previous);
    previous = o.partial_score;
    if (o.correct) CHECK(o.partial_score == 1.0);
    CHECK(o.correct == (passing == 5));
    if (o.correct) {
      for (const auto& v : o.variants) CHECK(v.suite.passed_all);
    }
  }
}

TEST_CASE("grading is deterministic offline") {
  const Question q = quarter_question();
  Offline a({{"f", {4, 3, 4, 0, -1}}}, 4);
  Offline b({{"f", {4, 3, 4, 0, -1}}}, 4);
  auto ca = a.context();
  auto cb = b.context();
  const auto first = grade_robustness(response("f"), q, ca);
  CHECK(grade_robustness(response("f"), q, cb) == first);
  // Second run against a warm cache.
  const auto again = grade_robustness(response("f"), q, ca);
  CHECK(again.partial_score == first.partial_score);
  for (const auto& v : again.variants) CHECK(v.variant.cache_hit);
}

TEST_CASE("grading record round trip") {
  const Question q = quarter_question();
  Offline offline({{"f", {4, 3, -1, 4, 0}}}, 4);
  auto ctx = offline.context();
  for (GradingPolicy p : {GradingPolicy::OneAttempt, GradingPolicy::Robustness}) {
    const GradingOutcome o = grade(p, response("f", 2), q, ctx);
    const Json record = grading_record(o, parse_utc("2024-03-04T10:00:00Z"));
    CHECK(record.at("graded_at") == "2024-03-04T10:00:00Z");
    CHECK(record.at("policy") == std::string(to_string(p)));
    CHECK(record.at("variants").at(0).at("code_hash").get<std::string>().size() == 64);
    CHECK(outcome_from_record(Json::parse(record.dump())) == o);
  }
  CHECK_THROWS_AS(outcome_from_record(Json::object()), ParseError);
}

TEST_CASE("policy names") {
  CHECK(to_string(GradingPolicy::OneAttempt) == "one-attempt");
  CHECK(parse_grading_policy("one_attempt") == GradingPolicy::OneAttempt);
  CHECK(parse_grading_policy("robustness") == GradingPolicy::Robustness);
  CHECK_THROWS_AS(parse_grading_policy("best-of-3"), ParseError);
}

TEST_CASE("Table 1 mock fixture") {
  const MockFixture fixture = load_mock_fixture(test::fixture_path("table1_mock.json"));
  ScriptedClient client(fixture.completions);
  StubBackend backend(fixture.results);
  GradingContext ctx{client, backend, nullptr, GradingSettings{}};
  const std::map<std::string, std::string> relational = {
      {"count_odd_nums_in_list", "count_odd_nums"},
      {"get_numbers_below_threshold", "get_values_under_threshold"},
      {"absolute_values_of_list", "make_values_absolute"},
      {"count_strings_of_given_length", "count_strings_of_length_n"}};
  for (const auto& [qid, name] : relational) {
    CAPTURE(qid);
    const Question& q = *bank().find(qid);
    CHECK(grade_one_attempt(response(name, 1, qid), q, ctx).correct);
    CHECK(grade_robustness(response(name, 1, qid), q, ctx).correct);
  }
}
