#include "eipl/report.hpp"

#include <map>
#include <ostream>
#include <tuple>

#include "eipl/validation.hpp"

namespace eipl {

ReportTables descriptive_report(const std::vector<StudentResponse>& responses,
                                const std::vector<GradingOutcome>& outcomes) {
  ReportTables tables;

  std::map<std::pair<std::string, int>, int> lengths;
  for (const StudentResponse& r : responses) ++lengths[{r.question_id, count_words(r.text)}];
  for (const auto& [key, count] : lengths) tables.lengths.push_back({key.first, key.second, count});

  std::map<std::pair<std::string, GradingPolicy>, std::pair<int, int>> correctness;
  for (const GradingOutcome& o : outcomes) {
    auto& [correct, total] = correctness[{o.response_ref.question_id, o.policy}];
    correct += o.correct ? 1 : 0;
    ++total;
  }
  for (const auto& [key, tally] : correctness) {
    tables.correctness.push_back({key.first, key.second, tally.first, tally.second,
                                  static_cast<double>(tally.first) / static_cast<double>(tally.second)});
  }
  return tables;
}

void write_lengths_csv(std::ostream& out, const ReportTables& tables) {
  out << "question_id,length_words,count\n";
  for (const auto& row : tables.lengths) out << row.question_id << ',' << row.length << ',' << row.count << '\n';
}

void write_correctness_csv(std::ostream& out, const ReportTables& tables) {
  out << "question_id,policy,correct,incorrect,total,proportion_correct\n";
  for (const auto& row : tables.correctness) {
    out << row.question_id << ',' << to_string(row.policy) << ',' << row.correct << ',' << row.total - row.correct
        << ',' << row.total << ',' << row.proportion_correct << '\n';
  }
}

}  // namespace eipl
