#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "eipl/bank.hpp"
#include "eipl/codegen.hpp"
#include "eipl/completion_cache.hpp"
#include "eipl/config.hpp"
#include "eipl/errors.hpp"
#include "eipl/grading.hpp"
#include "eipl/http_client.hpp"
#include "eipl/mock_fixture.hpp"
#include "eipl/psychometrics.hpp"
#include "eipl/records.hpp"
#include "eipl/report.hpp"
#include "eipl/subprocess_backend.hpp"
#include "eipl/validation.hpp"

namespace eipl::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags shared by the commands that grade.
struct EngineFlags {
  std::string config_path;
  std::string model_id;
  std::string base_url;
  std::string bank_path;
  std::string cache_path;
  std::string runner;
  std::string mock_path;
  int n_variants = 0;
  int word_limit = 0;
  int max_attempts = 0;
  int workers = 0;
  bool no_cache = false;
};

void add_engine_flags(CLI::App& cmd, EngineFlags& flags) {
  cmd.add_option("--config", flags.config_path, "Engine config JSON (overrides EIPL_CONFIG)");
  cmd.add_option("--model", flags.model_id, "Model id sent to the completion endpoint");
  cmd.add_option("--base-url", flags.base_url, "Chat-completions base URL");
  cmd.add_option("--bank", flags.bank_path, "Question bank JSON");
  cmd.add_option("--cache", flags.cache_path, "Completion cache JSONL");
  cmd.add_flag("--no-cache", flags.no_cache, "Do not read or write the completion cache");
  cmd.add_option("--runner", flags.runner, "Runner command for the subprocess execution backend");
  cmd.add_option("--mock", flags.mock_path, "Offline fixture with scripted completions and suite results");
  cmd.add_option("--n-variants", flags.n_variants, "Variants generated by robustness grading");
  cmd.add_option("--word-limit", flags.word_limit, "Maximum words in a function name");
  cmd.add_option("--max-attempts", flags.max_attempts, "Attempts per student and question");
}

EngineConfig resolve_config(const EngineFlags& flags) {
  std::optional<fs::path> path;
  if (!flags.config_path.empty()) path = flags.config_path;
  EngineConfig config = load_engine_config(path, process_env);
  if (!flags.model_id.empty()) config.model_id = flags.model_id;
  if (!flags.base_url.empty()) config.base_url = flags.base_url;
  if (!flags.bank_path.empty()) config.bank_path = flags.bank_path;
  if (!flags.cache_path.empty()) config.cache_path = flags.cache_path;
  if (!flags.runner.empty()) config.runner_command = flags.runner;
  if (flags.n_variants > 0) config.n_variants = flags.n_variants;
  if (flags.word_limit > 0) config.word_limit = flags.word_limit;
  if (flags.max_attempts > 0) config.max_attempts = flags.max_attempts;
  if (flags.workers > 0) config.worker_limit = flags.workers;
  config.check();
  return config;
}

QuestionBank open_bank(const EngineConfig& config) {
  return load_bank(config.bank_path.empty() ? default_bank_path() : fs::path(config.bank_path));
}

// Everything a grading command needs, owned in one place.
struct Engine {
  EngineConfig config;
  QuestionBank bank;
  std::unique_ptr<GenerationClient> client;
  std::unique_ptr<ExecutionBackend> backend;
  std::unique_ptr<CompletionCache> cache;

  GradingContext context() { return GradingContext{*client, *backend, cache.get(), config.grading_settings()}; }
};

Engine open_engine(const EngineFlags& flags) {
  Engine engine;
  engine.config = resolve_config(flags);
  engine.bank = open_bank(engine.config);

  std::optional<MockFixture> fixture;
  if (!flags.mock_path.empty()) fixture = load_mock_fixture(flags.mock_path);

  if (fixture) {
    engine.client = std::make_unique<ScriptedClient>(fixture->completions);
  } else {
    const std::string key = api_key_from_environment();
    if (key.empty()) throw UsageError("EIPL_API_KEY is not set (use --mock for offline grading)");
    engine.client = std::make_unique<ChatCompletionsClient>(HttpClientConfig{engine.config.base_url, key});
  }

  if (!engine.config.runner_command.empty()) {
    engine.backend = std::make_unique<SubprocessBackend>(
        SubprocessBackendConfig{split_command(engine.config.runner_command)});
  } else if (fixture) {
    engine.backend = stub_backend(fixture->results);
  } else {
    throw UsageError("no execution backend: pass --runner (or set runner_command) or --mock");
  }

  // Scripted completions never go into the persistent cache unless asked.
  const bool explicit_cache = !flags.cache_path.empty();
  if (flags.no_cache || (fixture && !explicit_cache)) {
    engine.cache = std::make_unique<CompletionCache>();
  } else {
    engine.cache = std::make_unique<CompletionCache>(fs::path(engine.config.cache_path));
  }
  return engine;
}

Json outcome_json(const GradingOutcome& outcome) {
  Json doc = grading_record(outcome, UtcTime{});
  doc.erase("graded_at");
  return doc;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::vector<std::string> read_label_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    labels.emplace_back(to_string(parse_solo_category(line)));
  }
  return labels;
}

// ---------------------------------------------------------------------------

int run_validate(const std::string& name, int word_limit, std::ostream& out) {
  const ValidationResult result = validate_function_name(name, word_limit);
  out << resubmission_message(result, word_limit) << '\n';
  return result.valid ? kExitOk : kExitDomainError;
}

int run_grade(const EngineFlags& flags, const std::string& question_id, const std::string& name,
              const std::string& policy_text, const std::string& student_id, int attempt, std::ostream& out) {
  const GradingPolicy policy = parse_grading_policy(policy_text);
  Engine engine = open_engine(flags);
  const Question* question = engine.bank.find(question_id);
  if (!question) throw Error("unknown question '" + question_id + "'");

  const ValidationResult validation = validate_function_name(name, engine.config.word_limit);
  if (!validation.valid) {
    out << Json{{"validation", validation}, {"message", resubmission_message(validation, engine.config.word_limit)}}.dump(2)
        << '\n';
    return kExitDomainError;
  }
  StudentResponse response{student_id, question_id, attempt, name, UtcTime{}};
  GradingContext ctx = engine.context();
  out << outcome_json(grade(policy, response, *question, ctx)).dump(2) << '\n';
  return kExitOk;
}

int run_batch(const EngineFlags& flags, const std::string& responses_path, const std::string& policy_text,
              const std::string& out_path, const std::string& scores_path, std::ostream& out, std::ostream& err) {
  const GradingPolicy policy = parse_grading_policy(policy_text);
  Engine engine = open_engine(flags);
  const std::vector<StudentResponse> responses = read_responses(responses_path);

  struct Slot {
    std::optional<GradingOutcome> outcome;
    std::string problem;
  };
  std::vector<Slot> slots(responses.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    GradingContext ctx = engine.context();
    for (std::size_t i = next++; i < responses.size(); i = next++) {
      const StudentResponse& r = responses[i];
      try {
        const Question* q = engine.bank.find(r.question_id);
        if (!q) throw Error("unknown question '" + r.question_id + "'");
        const ValidationResult v = validate_function_name(r.text, engine.config.word_limit, q->subject_language);
        if (!v.valid) {
          slots[i].problem = "skipped invalid response: " + resubmission_message(v, engine.config.word_limit);
          continue;
        }
        slots[i].outcome = grade(policy, r, *q, ctx);
      } catch (const std::exception& e) {
        slots[i].problem = std::string("error: ") + e.what();
      }
    }
  };
  {
    const int workers = std::clamp<int>(engine.config.worker_limit, 1, std::max<int>(1, static_cast<int>(responses.size())));
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<Json> records;
  int skipped = 0;
  int failed = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].outcome) {
      records.push_back(grading_record(*slots[i].outcome, utc_now()));
      continue;
    }
    const auto& r = responses[i];
    err << r.student_id << '/' << r.question_id << '#' << r.attempt << ": " << slots[i].problem << '\n';
    (slots[i].problem.rfind("skipped", 0) == 0 ? skipped : failed) += 1;
  }
  write_jsonl(out_path, records);

  if (!scores_path.empty()) {
    std::map<std::string, std::map<std::string, double>> best;
    std::set<std::string> items;
    for (const Slot& slot : slots) {
      if (!slot.outcome) continue;
      const auto& ref = slot.outcome->response_ref;
      auto [it, inserted] = best[ref.student_id].try_emplace(ref.question_id, slot.outcome->partial_score);
      if (!inserted) it->second = std::max(it->second, slot.outcome->partial_score);
      items.insert(ref.question_id);
    }
    std::vector<std::string> students;
    for (const auto& [s, _] : best) students.push_back(s);
    irt::ScoreMatrix matrix(students, {items.begin(), items.end()});
    for (const auto& [s, row] : best) {
      for (const auto& [q, score] : row) matrix.set(s, q, score);
    }
    std::ostringstream csv;
    matrix.to_csv(csv);
    write_text_file(scores_path, csv.str());
  }

  out << "graded " << records.size() << ", skipped " << skipped << ", failed " << failed << '\n';
  return failed == 0 ? kExitOk : kExitDomainError;
}

int run_fit(const std::string& scores_path, const std::string& out_path, const irt::FitConfig& config,
            std::ostream& out) {
  std::ifstream in(scores_path);
  if (!in) throw ParseError("cannot open " + scores_path);
  const irt::ScoreMatrix matrix = irt::ScoreMatrix::from_csv(in);
  const irt::FitResult result = irt::fit_2pl(matrix, config);
  write_text_file(out_path, irt::fit_result_json(matrix, result).dump(2) + "\n");
  out << "fitted " << matrix.item_count() << " items, " << matrix.student_count() << " students in "
      << result.report.iterations << " iterations (" << to_string(result.report.stop_reason)
      << "), loss " << result.report.final_loss << '\n';
  return kExitOk;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError(path + " is not valid JSON");
  return doc;
}

int run_bands(const std::string& params_path, std::ostream& out) {
  out << "item,a,band\n";
  for (const auto& item : irt::item_parameters_from_json(read_json_file(params_path))) {
    out << item.id << ',' << item.params.discrimination << ','
        << irt::to_string(irt::classify_discrimination(item.params.discrimination)) << '\n';
  }
  return kExitOk;
}

int run_kappa(const std::string& path_a, const std::string& path_b, std::ostream& out) {
  const bool jsonl = fs::path(path_a).extension() == ".jsonl" && fs::path(path_b).extension() == ".jsonl";
  std::vector<std::string> a;
  std::vector<std::string> b;
  if (jsonl) {
    // SOLO label records, paired by the response they label.
    std::map<ResponseRef, SoloCategory> by_ref;
    for (const SoloLabel& l : read_solo_labels(path_b)) by_ref[l.response_ref] = l.category;
    const auto labels_a = read_solo_labels(path_a);
    if (labels_a.size() != by_ref.size()) {
      throw LengthMismatchError("rater files label different numbers of responses");
    }
    for (const SoloLabel& l : labels_a) {
      auto it = by_ref.find(l.response_ref);
      if (it == by_ref.end()) throw LengthMismatchError("response labelled by only one rater");
      a.emplace_back(to_string(l.category));
      b.emplace_back(to_string(it->second));
    }
  } else {
    a = read_label_lines(path_a);
    b = read_label_lines(path_b);
  }
  const double kappa = cohens_kappa(std::span<const std::string>(a), std::span<const std::string>(b));
  out << std::setprecision(12) << kappa << '\n';
  return kExitOk;
}

int run_report(const std::string& records_path, const std::string& out_dir, const std::string& params_path,
               std::ostream& out) {
  std::vector<StudentResponse> responses;
  std::vector<GradingOutcome> outcomes;
  std::set<ResponseRef> seen;
  for (const Json& record : read_jsonl(records_path)) {
    GradingOutcome outcome = outcome_from_record(record);
    // One length entry per response even if it was graded under both policies.
    if (seen.insert(outcome.response_ref).second) {
      responses.push_back({outcome.response_ref.student_id, outcome.response_ref.question_id,
                           outcome.response_ref.attempt, outcome.response_text, UtcTime{}});
    }
    outcomes.push_back(std::move(outcome));
  }
  const ReportTables tables = descriptive_report(responses, outcomes);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::ostringstream lengths;
  write_lengths_csv(lengths, tables);
  write_text_file(dir / "lengths.csv", lengths.str());
  std::ostringstream correctness;
  write_correctness_csv(correctness, tables);
  write_text_file(dir / "correctness.csv", correctness.str());
  int files = 2;
  if (!params_path.empty()) {
    const auto items = irt::item_parameters_from_json(read_json_file(params_path));
    std::ostringstream icc;
    irt::write_icc_csv(icc, items);
    write_text_file(dir / "icc.csv", icc.str());
    ++files;
  }
  out << "wrote " << files << " tables to " << dir.string() << '\n';
  return kExitOk;
}

int run_bank_check(const EngineFlags& flags, std::ostream& out) {
  const EngineConfig config = resolve_config(flags);
  if (config.runner_command.empty()) {
    throw BackendUnavailableError("bank check needs a runner (--runner or runner_command)");
  }
  const QuestionBank bank = open_bank(config);
  SubprocessBackend backend(SubprocessBackendConfig{split_command(config.runner_command)});
  bool all_pass = true;
  for (const BankCheckRow& row : check_bank(bank, backend)) {
    all_pass = all_pass && row.result.passed_all;
    out << row.question_id << ": " << (row.result.passed_all ? "ok" : "FAIL");
    for (const CaseResult& c : row.result.case_results) {
      if (c.status != CaseStatus::Pass) out << " [case " << c.case_index << ' ' << to_string(c.status) << ": " << c.observed << ']';
    }
    out << '\n';
  }
  return all_pass ? kExitOk : kExitDomainError;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Function-name EiPE autograder and psychometrics toolkit", "eipl"};
  app.require_subcommand(1);

  std::string name;
  int word_limit = kDefaultWordLimit;
  auto* validate = app.add_subcommand("validate", "Check a submitted function name");
  validate->add_option("name", name, "Function name")->required();
  validate->add_option("--word-limit", word_limit, "Maximum words")->check(CLI::PositiveNumber);

  EngineFlags grade_flags;
  std::string question_id;
  std::string policy = "one-attempt";
  std::string student_id = "cli";
  int attempt = 1;
  auto* grade_cmd = app.add_subcommand("grade", "Grade one function name against one question");
  grade_cmd->add_option("--question", question_id, "Question id")->required();
  grade_cmd->add_option("--name", name, "Submitted function name")->required();
  grade_cmd->add_option("--policy", policy, "one-attempt | robustness")
      ->check(CLI::IsMember({"one-attempt", "robustness"}));
  grade_cmd->add_option("--student", student_id, "Student id recorded in the outcome");
  grade_cmd->add_option("--attempt", attempt, "Attempt number recorded in the outcome")->check(CLI::PositiveNumber);
  add_engine_flags(*grade_cmd, grade_flags);

  EngineFlags batch_flags;
  std::string responses_path;
  std::string out_path;
  std::string scores_out;
  auto* batch = app.add_subcommand("batch", "Grade a JSONL file of responses");
  batch->add_option("--responses", responses_path, "Responses JSONL")->required();
  batch->add_option("--policy", policy, "one-attempt | robustness")
      ->required()
      ->check(CLI::IsMember({"one-attempt", "robustness"}));
  batch->add_option("--out", out_path, "Grading records JSONL")->required();
  batch->add_option("--scores-out", scores_out, "Also write a students x questions score CSV (best attempt)");
  batch->add_option("--workers", batch_flags.workers, "Concurrent gradings")->check(CLI::PositiveNumber);
  add_engine_flags(*batch, batch_flags);

  std::string scores_path;
  irt::FitConfig fit_config;
  std::string method = "accelerated";
  auto* fit = app.add_subcommand("fit-irt", "Fit a 2PL model to a score CSV");
  fit->add_option("--scores", scores_path, "Score CSV")->required();
  fit->add_option("--out", out_path, "Parameter JSON")->required();
  fit->add_option("--method", method, "accelerated | plain")->check(CLI::IsMember({"accelerated", "plain"}));
  fit->add_option("--max-iters", fit_config.max_iters, "Iteration cap");
  fit->add_option("--step", fit_config.step, "Initial step size");
  fit->add_option("--tolerance", fit_config.tolerance, "Relative loss-change tolerance");

  std::string params_path;
  auto* bands = app.add_subcommand("bands", "Classify fitted discriminations");
  bands->add_option("--params", params_path, "Parameter JSON from fit-irt")->required();

  std::string path_a;
  std::string path_b;
  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two raters' SOLO labels");
  kappa->add_option("--a", path_a, "Rater A labels (.jsonl records or one label per line)")->required();
  kappa->add_option("--b", path_b, "Rater B labels")->required();

  std::string records_path;
  std::string out_dir;
  auto* report = app.add_subcommand("report", "Descriptive tables from grading records");
  report->add_option("--records", records_path, "Grading records JSONL")->required();
  report->add_option("--out", out_dir, "Output directory")->required();
  report->add_option("--params", params_path, "Parameter JSON; adds icc.csv");

  EngineFlags bank_flags;
  auto* bank = app.add_subcommand("bank", "Question bank tools");
  bank->require_subcommand(1);
  auto* bank_check = bank->add_subcommand("check", "Run every reference solution against its own suite");
  add_engine_flags(*bank_check, bank_flags);

  std::string compact_path;
  auto* compact = app.add_subcommand("compact", "Drop superseded records from a JSONL store");
  compact->add_option("--file", compact_path, "Cache or grading-record JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return run_validate(name, word_limit, out);
    if (grade_cmd->parsed()) return run_grade(grade_flags, question_id, name, policy, student_id, attempt, out);
    if (batch->parsed()) return run_batch(batch_flags, responses_path, policy, out_path, scores_out, out, err);
    if (fit->parsed()) {
      fit_config.method = method == "plain" ? irt::FitMethod::Plain : irt::FitMethod::Accelerated;
      return run_fit(scores_path, out_path, fit_config, out);
    }
    if (bands->parsed()) return run_bands(params_path, out);
    if (kappa->parsed()) return run_kappa(path_a, path_b, out);
    if (report->parsed()) return run_report(records_path, out_dir, params_path, out);
    if (bank_check->parsed()) return run_bank_check(bank_flags, out);
    if (compact->parsed()) {
      out << "dropped " << compact_jsonl(compact_path) << " superseded records\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace eipl::cli
