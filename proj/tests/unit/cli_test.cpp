#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "eipl/domain.hpp"
#include "eipl/psychometrics.hpp"
#include "eipl/records.hpp"
#include "irt_oracles.hpp"
#include "test_support.hpp"

using namespace eipl;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "eipl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string mock() { return test::fixture_path("table1_mock.json").string(); }

std::vector<std::string> grade_args(const std::string& question, const std::string& name, const std::string& policy) {
  return {"grade", "--question", question, "--name", name, "--policy", policy, "--mock", mock()};
}

}  // namespace

TEST_CASE("validate") {
  Run r = run({"validate", "count_odd_nums"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out == "valid (3 words)\n");

  r = run({"validate", "count odd nums"});
  CHECK(r.code == cli::kExitDomainError);
  CHECK(r.out.find("without penalty") != std::string::npos);

  CHECK(run({"validate", "count_odd_nums", "--word-limit", "2"}).code == cli::kExitDomainError);
}

TEST_CASE("usage errors") {
  Run r = run({});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"grade", "--question", "q"}).code == cli::kExitUsage);
  CHECK(run({"grade", "--question", "q", "--name", "n", "--policy", "best"}).code == cli::kExitUsage);
  CHECK(run({"validate", "x", "--word-limit", "0"}).code == cli::kExitUsage);

  r = run({"--help"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("fit-irt") != std::string::npos);
}

TEST_CASE("grade offline prints a deterministic outcome") {
  const Run first = run(grade_args("count_odd_nums_in_list", "count_odd_nums", "one-attempt"));
  REQUIRE(first.code == cli::kExitOk);
  const Json doc = Json::parse(first.out);
  CHECK(doc.at("correct") == true);
  CHECK(doc.at("partial_score") == 1.0);
  CHECK(doc.at("policy") == "one-attempt");
  CHECK_FALSE(doc.contains("graded_at"));
  CHECK(run(grade_args("count_odd_nums_in_list", "count_odd_nums", "one-attempt")).out == first.out);
}

TEST_CASE("grade: robustness filters a marginal name") {
  const Json robust = Json::parse(run(grade_args("count_strings_of_given_length", "count_strings", "robustness")).out);
  CHECK(robust.at("correct") == false);
  CHECK(robust.at("partial_score").get<double>() == doctest::Approx(0.6));
  CHECK(robust.at("variants").size() == 5);
  const Json single = Json::parse(run(grade_args("count_strings_of_given_length", "count_strings", "one-attempt")).out);
  CHECK(single.at("correct") == true);
}

TEST_CASE("grade: domain errors") {
  Run r = run(grade_args("count_odd_nums_in_list", "count odd", "one-attempt"));
  CHECK(r.code == cli::kExitDomainError);
  CHECK(Json::parse(r.out).at("validation").at("valid") == false);

  r = run(grade_args("no_such_question", "count_odd_nums", "one-attempt"));
  CHECK(r.code == cli::kExitDomainError);
  CHECK(r.err.find("unknown question") != std::string::npos);

  r = run(grade_args("count_odd_nums_in_list", "unscripted_name", "one-attempt"));
  CHECK(r.code == cli::kExitDomainError);
}

TEST_CASE("grade without mock needs a key and a backend") {
  ::unsetenv("EIPL_API_KEY");
  const Run r = run({"grade", "--question", "count_odd_nums_in_list", "--name", "f", "--policy", "one-attempt"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("EIPL_API_KEY") != std::string::npos);
}

TEST_CASE("grade with a persistent cache") {
  test::TempDir dir;
  const auto cache = (dir / "cache.jsonl").string();
  auto args = grade_args("get_numbers_below_threshold", "get_values_under_threshold", "robustness");
  args.insert(args.end(), {"--cache", cache});
  CHECK(run(args).code == cli::kExitOk);
  CHECK(read_jsonl(cache).size() == 5);
  const Json warm = Json::parse(run(args).out);
  for (const Json& v : warm.at("variants")) CHECK(v.at("cache_hit") == true);
  CHECK(read_jsonl(cache).size() == 5);
}

TEST_CASE("batch, report, compact") {
  test::TempDir dir;
  const auto out = (dir / "records.jsonl").string();
  const auto scores = (dir / "scores.csv").string();
  const std::vector<std::string> args = {"batch", "--responses", test::fixture_path("responses.jsonl").string(),
                                         "--policy", "robustness", "--out", out, "--mock", mock(),
                                         "--workers", "3", "--scores-out", scores};
  const Run r = run(args);
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out == "graded 6, skipped 1, failed 0\n");
  CHECK(r.err.find("s01/count_strings_of_given_length#1: skipped") != std::string::npos);

  auto records = read_jsonl(out);
  REQUIRE(records.size() == 6);
  CHECK(records[0].at("response_text") == "count_odd_nums");
  CHECK(records[1].at("response_text") == "count_strings");
  CHECK(records[1].at("partial_score").get<double>() == doctest::Approx(0.6));
  CHECK(records[5].at("response_text") == "explain_the_loop");
  CHECK(records[5].at("correct") == false);

  // Re-running against the same inputs yields the same records apart from timestamps.
  REQUIRE(run(args).code == cli::kExitOk);
  auto again = read_jsonl(out);
  REQUIRE(again.size() == records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    records[k].erase("graded_at");
    again[k].erase("graded_at");
    CHECK(again[k] == records[k]);
  }

  const std::string csv = test::read_file(scores);
  CHECK(csv.rfind("student,", 0) == 0);
  CHECK(csv.find("s01,") != std::string::npos);

  // Report over the batch records and a parameter file.
  const auto params = (dir / "params.json").string();
  test::write_file(params, R"({"items":[{"id":"q1","a":1.2,"b":-0.5},{"id":"q2","a":0.3,"b":1.0}]})");
  const auto report_dir = (dir / "report").string();
  Run rep = run({"report", "--records", out, "--out", report_dir, "--params", params});
  REQUIRE(rep.code == cli::kExitOk);
  const std::string lengths = test::read_file(dir / "report/lengths.csv");
  CHECK(lengths.find("count_strings_of_given_length,2,1") != std::string::npos);
  const std::string correctness = test::read_file(dir / "report/correctness.csv");
  CHECK(correctness.find("count_strings_of_given_length,robustness,1,1,2,0.5") != std::string::npos);
  CHECK(test::read_file(dir / "report/icc.csv").rfind("theta,q1,q2\n-3.00,", 0) == 0);

  // Append a duplicate and compact it away.
  append_jsonl(out, read_jsonl(out).front());
  Run compact = run({"compact", "--file", out});
  CHECK(compact.code == cli::kExitOk);
  CHECK(compact.out == "dropped 1 superseded records\n");
  CHECK(read_jsonl(out).size() == 6);
}

TEST_CASE("fit-irt and bands") {
  test::TempDir dir;
  test::Rng rng(31);
  const auto truth = test::draw_parameters(rng, 100, 4);
  const auto matrix = test::exact_matrix(truth);
  std::ostringstream csv;
  matrix.to_csv(csv);
  test::write_file(dir / "scores.csv", csv.str());

  const auto params = (dir / "params.json").string();
  Run fit = run({"fit-irt", "--scores", (dir / "scores.csv").string(), "--out", params});
  REQUIRE(fit.code == cli::kExitOk);
  CHECK(fit.out.find("fitted 4 items, 100 students") != std::string::npos);
  const Json doc = Json::parse(test::read_file(params));
  for (const Json& item : doc.at("items")) {
    CHECK(item.at("a").get<double>() >= 0.0);
    CHECK(item.at("a").get<double>() <= 2.0);
    CHECK(item.at("b").get<double>() >= -3.0);
    CHECK(item.at("b").get<double>() <= 3.0);
  }
  for (const Json& s : doc.at("students")) {
    CHECK(std::abs(s.at("theta").get<double>()) <= 3.0);
  }
  CHECK(doc.at("report").at("final_loss").get<double>() <=
        doc.at("report").at("entropy_floor").get<double>() + 1e-6);

  Run bands = run({"bands", "--params", params});
  CHECK(bands.code == cli::kExitOk);
  CHECK(bands.out.rfind("item,a,band\nq0,", 0) == 0);

  CHECK(run({"fit-irt", "--scores", (dir / "missing.csv").string(), "--out", params}).code ==
        cli::kExitDomainError);
  CHECK(run({"fit-irt", "--scores", (dir / "scores.csv").string(), "--out", params, "--method", "newton"}).code ==
        cli::kExitUsage);
}

TEST_CASE("kappa") {
  Run r = run({"kappa", "--a", test::fixture_path("rater_a.txt").string(), "--b",
               test::fixture_path("rater_b.txt").string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(std::stod(r.out) == doctest::Approx(7.0 / 11.0).epsilon(1e-9));

  test::TempDir dir;
  auto label = [](const std::string& rater, const std::string& student, const std::string& cat) {
    return Json{{"rater_id", rater},
                {"response_ref", {{"student_id", student}, {"question_id", "q"}, {"attempt", 1}}},
                {"category", cat}}
        .dump();
  };
  test::write_file(dir / "a.jsonl", label("a", "s1", "R") + "\n" + label("a", "s2", "M") + "\n");
  test::write_file(dir / "b.jsonl", label("b", "s2", "M") + "\n" + label("b", "s1", "R") + "\n");
  r = run({"kappa", "--a", (dir / "a.jsonl").string(), "--b", (dir / "b.jsonl").string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(std::stod(r.out) == 1.0);

  test::write_file(dir / "short.txt", "R\n");
  CHECK(run({"kappa", "--a", (dir / "short.txt").string(), "--b", test::fixture_path("rater_a.txt").string()})
            .code == cli::kExitDomainError);
}

TEST_CASE("bank check") {
  Run r = run({"bank", "check", "--runner", test::fake_runner_path()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("absolute_values_of_list: ok") != std::string::npos);

  r = run({"bank", "check", "--runner", "/nonexistent/runner"});
  CHECK(r.code == cli::kExitDomainError);
  CHECK(run({"bank"}).code == cli::kExitUsage);
}
